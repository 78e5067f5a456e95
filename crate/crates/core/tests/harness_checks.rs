//! End-to-end harness checks at desk scale: empirical curves sit under the
//! theoretical bounds, and the budget sweep reproduces the blind-detector
//! and floor-cap regimes at tiny ε.

use privcpd_core::experiments::{
    run_accuracy_curve, run_eps_sweep, run_exponent_ratio, ExperimentConfig, FamilySpec, Mechanism,
};

fn bernoulli_config(trials: usize, alpha_grid: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        p0: FamilySpec::Bernoulli { theta: 0.1 },
        p1: FamilySpec::Bernoulli { theta: 0.4 },
        n: 2000,
        k_star: 1000,
        trials,
        alpha_grid,
        epsilon_grid: None,
        mechanism: Mechanism::None,
        master_seed: 0xBE2,
    }
}

#[test]
fn bernoulli_curve_respects_nonprivate_bound() {
    let alpha_grid: Vec<usize> = std::iter::once(1).chain((1..=29).map(|i| i * 10)).collect();
    let curve = run_accuracy_curve(&bernoulli_config(10_000, alpha_grid)).unwrap();
    let mut informative = 0;
    for row in &curve.rows {
        if row.beta_theory >= 1.0 {
            continue;
        }
        informative += 1;
        let slack =
            3.0 * (row.beta_empirical * (1.0 - row.beta_empirical) / row.trials as f64).sqrt();
        assert!(
            row.beta_empirical <= row.beta_theory + slack,
            "alpha {}: empirical {} vs theory {}",
            row.alpha,
            row.beta_empirical,
            row.beta_theory
        );
    }
    assert!(informative >= 10);
    // the bound is already informative at alpha = 40 and the detector far
    // sharper than it
    let at_40 = curve.rows.iter().find(|r| r.alpha == 40).unwrap();
    assert!(at_40.beta_theory < 1.0);
    assert!(at_40.beta_empirical < at_40.beta_theory);
}

fn tpois_config(trials: usize, alpha: usize, eps: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        p0: FamilySpec::TruncatedPoisson { lambda: 1.0, m: 10 },
        p1: FamilySpec::TruncatedPoisson { lambda: 4.0, m: 10 },
        n: 2000,
        k_star: 1000,
        trials,
        alpha_grid: vec![alpha],
        epsilon_grid: Some(eps),
        mechanism: Mechanism::None,
        master_seed: 3,
    }
}

#[test]
fn tiny_budget_blinds_both_detectors() {
    let table = run_eps_sweep(&tpois_config(2000, 5, vec![0.01])).unwrap();
    let row = table.rows[0];
    assert!((row.beta_rr - 0.9959).abs() < 0.01, "rr {}", row.beta_rr);
    assert!((row.beta_bm - 0.9958).abs() < 0.01, "bm {}", row.beta_bm);
    assert!(row.beta_nonprivate < 0.02);
}

#[test]
fn tiny_budget_exponent_ratios_sit_at_floor_cap() {
    // With beta_private ~ 1 and the non-private error floored at
    // 1/(2 trials), the ratio lands near ln 2 / ln(4 trials), the smallest
    // value the floored-exponent computation can produce.
    let table = run_exponent_ratio(&tpois_config(2000, 50, vec![0.01])).unwrap();
    let row = table.rows[0];
    let cap = 2.0f64.ln() / (4.0f64 * 2000.0).ln();
    assert!(row.ratio_rr <= cap + 0.01, "rr {}", row.ratio_rr);
    assert!(row.ratio_bm <= cap + 0.01, "bm {}", row.ratio_bm);
    assert!(row.ratio_rr >= 0.9 * cap);
}
