//! The binary-support numeric search against the symmetric-channel closed
//! forms, across random channel sizes and noise levels.

use privcpd_core::divergence::RenyiOrder;
use privcpd_core::mechanisms::SymmetricChannelParams;
use privcpd_core::rng::SplitMix64;
use privcpd_core::sdpi::{
    eta_jeffreys_inf_symmetric, eta_numeric, eta_renyi_inf_symmetric, SearchParams,
};

#[test]
fn numeric_search_matches_symmetric_closed_forms() {
    let mut rng = SplitMix64::new(0x5D91);
    let search = SearchParams::default();
    for case in 0..20 {
        let q = 2 + (rng.next_u64() % 4) as usize;
        let u = rng.next_f64() / (q as f64 - 1.0);
        let params = SymmetricChannelParams::new(q, u).unwrap();
        let w = params.to_channel().unwrap();

        let closed_inf = eta_renyi_inf_symmetric(&params).eta;
        let numeric_inf = eta_numeric(&w, RenyiOrder::INF, false, &search).unwrap();
        assert!(
            (numeric_inf.eta - closed_inf).abs() <= 5e-3,
            "case {case} (q {q}, u {u}): renyi-inf numeric {} vs closed {closed_inf}",
            numeric_inf.eta
        );

        let closed_j = eta_jeffreys_inf_symmetric(&params).eta;
        let numeric_j = eta_numeric(&w, RenyiOrder::INF, true, &search).unwrap();
        assert!(
            (numeric_j.eta - closed_j).abs() <= 5e-3,
            "case {case} (q {q}, u {u}): jeffreys-inf numeric {} vs closed {closed_j}",
            numeric_j.eta
        );

        for eta in [closed_inf, numeric_inf.eta, closed_j, numeric_j.eta] {
            assert!((0.0..=1.0 + 1e-9).contains(&eta));
        }
    }
}
