//! Seeded Monte Carlo harness: accuracy curves over the tolerance level,
//! privacy-budget sweeps comparing the two private detectors, and
//! error-exponent ratios against the tanh²(ε/2) privacy-cost factor.
//!
//! Every output is a pure function of the configuration and master seed:
//! trial t draws its data stream from `(master_seed, t, Data)` and its
//! privatization stream from `(master_seed, t, Privatize)`, so trials can be
//! fanned out to any number of workers without changing a single byte of
//! the results. Sweeps reuse the same per-trial streams across budgets and
//! mechanisms (common random numbers).

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    error_exponent, floor_empirical_beta, privacy_cost_factor, theorem_bmcpd, theorem_npcpd,
    theorem_rrcpd, BmSeriesVariant, BoundInputs,
};
use crate::detector::{bm_cpd, detect, rr_cpd, Dataset};
use crate::divergence::Distribution;
use crate::error::{Error, Result};
use crate::mechanisms::PrivacyBudget;
use crate::rng::{trial_stream, SplitMix64, Stage};

/// Parametric family of a pre- or post-change distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Bernoulli { theta: f64 },
    Binomial { n: usize, p: f64 },
    /// Poisson(λ) restricted to {0, …, m} and renormalized.
    TruncatedPoisson { lambda: f64, m: usize },
    /// Geometric with success probability p, masses ∝ (1-p)^k·p on
    /// {0, …, m}, renormalized.
    TruncatedGeometric { p: f64, m: usize },
    Explicit { pmf: Vec<f64> },
}

/// Materialize a family as a concrete pmf.
pub fn make_family(spec: &FamilySpec) -> Result<Distribution> {
    match spec {
        FamilySpec::Bernoulli { theta } => Distribution::bernoulli(*theta),
        FamilySpec::Binomial { n, p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidParameter(format!(
                    "binomial probability {p} outside [0, 1]"
                )));
            }
            let mut mass = vec![0.0; n + 1];
            if *p == 0.0 {
                mass[0] = 1.0;
            } else if *p == 1.0 {
                mass[*n] = 1.0;
            } else {
                // log-space recurrence over ln C(n, k) p^k (1-p)^(n-k)
                let mut log_term = (*n as f64) * (1.0 - p).ln();
                for (k, slot) in mass.iter_mut().enumerate() {
                    *slot = log_term.exp();
                    if k < *n {
                        log_term +=
                            ((*n - k) as f64).ln() - ((k + 1) as f64).ln() + p.ln() - (1.0 - p).ln();
                    }
                }
            }
            Distribution::new(normalize(mass)?)
        }
        FamilySpec::TruncatedPoisson { lambda, m } => {
            if !(*lambda >= 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "poisson rate {lambda} must be non-negative"
                )));
            }
            let mut mass = vec![0.0; m + 1];
            let mut term = 1.0; // λ^k / k!, up to the common e^{-λ} factor
            for (k, slot) in mass.iter_mut().enumerate() {
                *slot = term;
                term *= lambda / (k + 1) as f64;
            }
            Distribution::new(normalize(mass)?)
        }
        FamilySpec::TruncatedGeometric { p, m } => {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "geometric probability {p} outside (0, 1]"
                )));
            }
            let mut mass = vec![0.0; m + 1];
            let mut term = *p;
            for slot in mass.iter_mut() {
                *slot = term;
                term *= 1.0 - p;
            }
            Distribution::new(normalize(mass)?)
        }
        FamilySpec::Explicit { pmf } => Distribution::new(pmf.clone()),
    }
}

fn normalize(mass: Vec<f64>) -> Result<Vec<f64>> {
    let sum: f64 = mass.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::InvalidParameter(
            "family parameters give zero or non-finite total mass".into(),
        ));
    }
    Ok(mass.into_iter().map(|x| x / sum).collect())
}

/// Draw `x_1..x_{k*-1} ~ p0` and `x_{k*}..x_n ~ p1` (1-based positions),
/// consuming exactly one uniform variate per symbol.
pub fn sample_dataset(
    p0: &Distribution,
    p1: &Distribution,
    n: usize,
    k_star: usize,
    rng: &mut SplitMix64,
) -> Result<Dataset> {
    if k_star < 2 || k_star > n {
        return Err(Error::InvalidParameter(format!(
            "change-point {k_star} outside [2, n] with n = {n}"
        )));
    }
    if p0.alphabet_size() != p1.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: p0.alphabet_size(),
            got: p1.alphabet_size(),
        });
    }
    let symbols = (1..=n)
        .map(|i| {
            let src = if i < k_star { p0 } else { p1 };
            src.sample_index(rng.next_f64())
        })
        .collect();
    Dataset::new(symbols, p0.alphabet_size(), Some(k_star))
}

/// Which detector a simulation drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    None,
    Rr,
    Bm,
}

/// Full description of a Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p0: FamilySpec,
    pub p1: FamilySpec,
    pub n: usize,
    pub k_star: usize,
    pub trials: usize,
    /// Tolerance levels for accuracy curves; sweeps use the first entry.
    pub alpha_grid: Vec<usize>,
    /// Privacy budgets; accuracy curves with a private mechanism use the
    /// first entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_grid: Option<Vec<f64>>,
    pub mechanism: Mechanism,
    pub master_seed: u64,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.k_star < 2 || self.k_star > self.n {
            return Err(Error::InvalidConfig(format!(
                "k_star {} outside [2, n] with n = {}",
                self.k_star, self.n
            )));
        }
        Ok(())
    }

    fn first_epsilon(&self) -> Result<PrivacyBudget> {
        let grid = self
            .epsilon_grid
            .as_ref()
            .filter(|g| !g.is_empty())
            .ok_or_else(|| {
                Error::InvalidConfig("a private mechanism needs a non-empty epsilon_grid".into())
            })?;
        PrivacyBudget::new(grid[0])
    }

    fn first_alpha(&self) -> Result<usize> {
        self.alpha_grid
            .first()
            .copied()
            .ok_or_else(|| Error::InvalidConfig("alpha_grid must be non-empty".into()))
    }
}

/// One (α, β) point of an accuracy curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurveRow {
    pub alpha: usize,
    pub beta_empirical: f64,
    pub beta_theory: f64,
    pub trials: usize,
}

/// Empirical error probabilities against the matching theoretical bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracyCurve {
    pub version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<CurveRow>,
}

/// Absolute deviations |k̂ - k*| for every trial, in trial order.
fn trial_deviations(
    cfg: &ExperimentConfig,
    p0: &Distribution,
    p1: &Distribution,
    mechanism: Mechanism,
    eps: Option<PrivacyBudget>,
) -> Result<Vec<u64>> {
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut data_rng = trial_stream(cfg.master_seed, t, Stage::Data);
            let dataset = sample_dataset(p0, p1, cfg.n, cfg.k_star, &mut data_rng)?;
            let result = match mechanism {
                Mechanism::None => detect(&dataset, p0, p1)?,
                Mechanism::Rr => {
                    let mut priv_rng = trial_stream(cfg.master_seed, t, Stage::Privatize);
                    rr_cpd(&dataset, p0, p1, eps.expect("budget checked"), &mut priv_rng)?
                }
                Mechanism::Bm => {
                    let mut priv_rng = trial_stream(cfg.master_seed, t, Stage::Privatize);
                    bm_cpd(&dataset, p0, p1, eps.expect("budget checked"), &mut priv_rng)?
                }
            };
            Ok(result.k_hat.abs_diff(cfg.k_star) as u64)
        })
        .collect()
}

fn empirical_beta(deviations: &[u64], alpha: usize) -> f64 {
    let misses = deviations.iter().filter(|&&d| d > alpha as u64).count();
    misses as f64 / deviations.len() as f64
}

/// Run the configured detector over seeded trials and tabulate the
/// empirical miss rate β(α) next to the matching theoretical bound.
pub fn run_accuracy_curve(cfg: &ExperimentConfig) -> Result<AccuracyCurve> {
    cfg.validate()?;
    let p0 = make_family(&cfg.p0)?;
    let p1 = make_family(&cfg.p1)?;
    let eps = match cfg.mechanism {
        Mechanism::None => None,
        _ => Some(cfg.first_epsilon()?),
    };
    let deviations = trial_deviations(cfg, &p0, &p1, cfg.mechanism, eps)?;

    let base_inputs = match cfg.mechanism {
        Mechanism::None => BoundInputs::non_private(cfg.n, 1, &p0, &p1)?,
        Mechanism::Rr => BoundInputs::for_rr(cfg.n, 1, &p0, &p1, eps.unwrap())?,
        Mechanism::Bm => BoundInputs::for_bm(cfg.n, 1, &p0, &p1, eps.unwrap())?,
    };
    let rows = cfg
        .alpha_grid
        .iter()
        .map(|&alpha| {
            let inputs = base_inputs.with_alpha(alpha);
            let beta_theory = match cfg.mechanism {
                Mechanism::None => theorem_npcpd(&inputs).beta,
                Mechanism::Rr => theorem_rrcpd(&inputs)?.0.beta,
                Mechanism::Bm => theorem_bmcpd(&inputs, BmSeriesVariant::Verbatim)?.0.beta,
            };
            Ok(CurveRow {
                alpha,
                beta_empirical: empirical_beta(&deviations, alpha),
                beta_theory,
                trials: cfg.trials,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyCurve {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        rows,
    })
}

/// One privacy budget of an ε-sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpsSweepRow {
    pub epsilon: f64,
    pub beta_rr: f64,
    pub beta_bm: f64,
    pub beta_nonprivate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsSweepTable {
    pub version: String,
    pub config: ExperimentConfig,
    pub alpha: usize,
    pub rows: Vec<EpsSweepRow>,
}

/// At the fixed tolerance `alpha_grid[0]`, run both private detectors at
/// every budget in the grid; the non-private baseline runs once on the same
/// per-trial data streams.
pub fn run_eps_sweep(cfg: &ExperimentConfig) -> Result<EpsSweepTable> {
    cfg.validate()?;
    let alpha = cfg.first_alpha()?;
    let grid = cfg
        .epsilon_grid
        .clone()
        .filter(|g| !g.is_empty())
        .ok_or_else(|| Error::InvalidConfig("eps sweep needs a non-empty epsilon_grid".into()))?;
    let p0 = make_family(&cfg.p0)?;
    let p1 = make_family(&cfg.p1)?;

    let np = trial_deviations(cfg, &p0, &p1, Mechanism::None, None)?;
    let beta_nonprivate = empirical_beta(&np, alpha);

    let rows = grid
        .iter()
        .map(|&e| {
            let eps = PrivacyBudget::new(e)?;
            let rr = trial_deviations(cfg, &p0, &p1, Mechanism::Rr, Some(eps))?;
            let bm = trial_deviations(cfg, &p0, &p1, Mechanism::Bm, Some(eps))?;
            Ok(EpsSweepRow {
                epsilon: e,
                beta_rr: empirical_beta(&rr, alpha),
                beta_bm: empirical_beta(&bm, alpha),
                beta_nonprivate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsSweepTable {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        alpha,
        rows,
    })
}

/// One privacy budget of a cost-of-privacy table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExponentRatioRow {
    pub epsilon: f64,
    pub ratio_rr: f64,
    pub ratio_bm: f64,
    pub tanh_sq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentRatioTable {
    pub version: String,
    pub config: ExperimentConfig,
    pub alpha: usize,
    pub rows: Vec<ExponentRatioRow>,
}

/// Ratios of private to non-private empirical error exponents at the fixed
/// tolerance `alpha_grid[0]`, next to the tanh²(ε/2) attenuation factor.
/// Empirical zeros are floored at 1/(2·trials); reported ratios are clipped
/// to at most 1.
pub fn run_exponent_ratio(cfg: &ExperimentConfig) -> Result<ExponentRatioTable> {
    cfg.validate()?;
    let alpha = cfg.first_alpha()?;
    let grid = cfg
        .epsilon_grid
        .clone()
        .filter(|g| !g.is_empty())
        .ok_or_else(|| {
            Error::InvalidConfig("exponent-ratio sweep needs a non-empty epsilon_grid".into())
        })?;
    let p0 = make_family(&cfg.p0)?;
    let p1 = make_family(&cfg.p1)?;

    let np = trial_deviations(cfg, &p0, &p1, Mechanism::None, None)?;
    let beta_np = floor_empirical_beta(empirical_beta(&np, alpha), cfg.trials);
    let lambda_np = error_exponent(alpha, beta_np)?;

    let rows = grid
        .iter()
        .map(|&e| {
            let eps = PrivacyBudget::new(e)?;
            let rr = trial_deviations(cfg, &p0, &p1, Mechanism::Rr, Some(eps))?;
            let bm = trial_deviations(cfg, &p0, &p1, Mechanism::Bm, Some(eps))?;
            let lambda_rr = error_exponent(
                alpha,
                floor_empirical_beta(empirical_beta(&rr, alpha), cfg.trials),
            )?;
            let lambda_bm = error_exponent(
                alpha,
                floor_empirical_beta(empirical_beta(&bm, alpha), cfg.trials),
            )?;
            Ok(ExponentRatioRow {
                epsilon: e,
                ratio_rr: (lambda_rr / lambda_np).min(1.0),
                ratio_bm: (lambda_bm / lambda_np).min(1.0),
                tanh_sq: privacy_cost_factor(eps),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentRatioTable {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        alpha,
        rows,
    })
}

/// Output serialization format for [`write_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A result table that can render itself as CSV (header + rows, alpha or
/// epsilon first, empirical before theory columns) and as JSON (records
/// plus config metadata and library version).
pub trait ResultTable: Serialize {
    fn csv(&self) -> String;

    fn json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl ResultTable for AccuracyCurve {
    fn csv(&self) -> String {
        let mut out = String::from("alpha,beta_empirical,beta_theory,trials\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.alpha, r.beta_empirical, r.beta_theory, r.trials
            );
        }
        out
    }
}

impl ResultTable for EpsSweepTable {
    fn csv(&self) -> String {
        let mut out = String::from("epsilon,beta_rr,beta_bm,beta_nonprivate\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.epsilon, r.beta_rr, r.beta_bm, r.beta_nonprivate
            );
        }
        out
    }
}

impl ResultTable for ExponentRatioTable {
    fn csv(&self) -> String {
        let mut out = String::from("epsilon,ratio_rr,ratio_bm,tanh_sq\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.epsilon, r.ratio_rr, r.ratio_bm, r.tanh_sq
            );
        }
        out
    }
}

/// Write a result table to `path` in the requested format.
pub fn write_results<T: ResultTable>(table: &T, path: &Path, format: OutputFormat) -> Result<()> {
    let payload = match format {
        OutputFormat::Csv => table.csv(),
        OutputFormat::Json => table.json()?,
    };
    std::fs::write(path, payload).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
