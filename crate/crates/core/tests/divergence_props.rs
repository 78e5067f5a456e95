//! Property tests for the divergence toolkit: data processing through
//! arbitrary channels, the Pinsker and Chernoff-TV inequalities, and order
//! monotonicity.

use proptest::prelude::*;

use privcpd_core::divergence::{
    chernoff_information, jeffreys_renyi, kl_divergence, renyi_divergence, tv_distance,
    Distribution, RenyiOrder,
};
use privcpd_core::mechanisms::{pushforward, Channel};

fn pmf(q: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(1e-4..1.0f64, q).prop_map(|raw| {
        let s: f64 = raw.iter().sum();
        Distribution::new(raw.into_iter().map(|x| x / s).collect()).unwrap()
    })
}

fn channel(q_in: usize, q_out: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(prop::collection::vec(1e-4..1.0f64, q_out), q_in).prop_map(|rows| {
        let rows = rows
            .into_iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.into_iter().map(|x| x / s).collect()
            })
            .collect();
        Channel::new(rows).unwrap()
    })
}

proptest! {
    #[test]
    fn data_processing_never_increases_divergences(
        p in pmf(4),
        q in pmf(4),
        w in channel(4, 3),
    ) {
        let wp = pushforward(&p, &w).unwrap();
        let wq = pushforward(&q, &w).unwrap();

        let tv_in = tv_distance(&p, &q).unwrap().value();
        let tv_out = tv_distance(&wp, &wq).unwrap().value();
        prop_assert!(tv_out <= tv_in + 1e-9);

        let kl_in = kl_divergence(&p, &q).unwrap().value();
        let kl_out = kl_divergence(&wp, &wq).unwrap().value();
        prop_assert!(kl_out <= kl_in + 1e-9);

        for rho in [1.5, 2.0, f64::INFINITY] {
            let order = RenyiOrder::new(rho).unwrap();
            let d_in = renyi_divergence(order, &p, &q).unwrap().value();
            let d_out = renyi_divergence(order, &wp, &wq).unwrap().value();
            prop_assert!(d_out <= d_in + 1e-9, "rho {rho}: {d_out} > {d_in}");
        }

        let j_in = jeffreys_renyi(RenyiOrder::INF, &p, &q).unwrap().value();
        let j_out = jeffreys_renyi(RenyiOrder::INF, &wp, &wq).unwrap().value();
        prop_assert!(j_out <= j_in + 1e-9);

        let ich_in = chernoff_information(&p, &q).unwrap().value.value();
        let ich_out = chernoff_information(&wp, &wq).unwrap().value.value();
        prop_assert!(ich_out <= ich_in + 1e-9);
    }

    #[test]
    fn pinsker_inequality(p in pmf(5), q in pmf(5)) {
        let tv = tv_distance(&p, &q).unwrap().value();
        let kl = kl_divergence(&p, &q).unwrap().value();
        prop_assert!(tv <= (0.5 * kl).sqrt() + 1e-12);
    }

    #[test]
    fn chernoff_tv_lower_bound(p in pmf(5), q in pmf(5)) {
        let tv = tv_distance(&p, &q).unwrap().value();
        prop_assume!(tv < 1.0);
        let ich = chernoff_information(&p, &q).unwrap().value.value();
        prop_assert!(ich >= -0.5 * (1.0 - tv * tv).ln() - 1e-9);
    }

    #[test]
    fn jeffreys_is_symmetric(p in pmf(3), q in pmf(3)) {
        for rho in [1.0, 2.0, f64::INFINITY] {
            let order = RenyiOrder::new(rho).unwrap();
            let ab = jeffreys_renyi(order, &p, &q).unwrap().value();
            let ba = jeffreys_renyi(order, &q, &p).unwrap().value();
            prop_assert!((ab - ba).abs() < 1e-12);
        }
    }
}
