//! Closed-form finite-sample accuracy bounds for the three estimators, and
//! the cost-of-privacy quantities derived from them.
//!
//! Each theorem bound is the minimum of two terms: a series term driven by
//! the squared ratio of a KL-type separation to the score sensitivity
//! (bound A), and a Chernoff-information term (bound B). Both are doubled
//! and clipped to [0, 1].

use serde::{Deserialize, Serialize};

use crate::divergence::{
    chernoff_information, jeffreys_renyi, kl_divergence, tv_distance, Distribution, RenyiOrder,
};
use crate::error::{Error, Result};
use crate::mechanisms::{select_tau_star, PrivacyBudget};

/// Everything the bound evaluators consume. `s`, `c`, `ich` describe the
/// pre-privatization pair; the optional fields are needed only by the
/// private bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Dataset size n >= 2.
    pub n: usize,
    /// Tolerance level α ∈ [1, n].
    pub alpha: usize,
    /// Sensitivity s = D^J_∞(P0, P1), in nats; may be +inf.
    pub s: f64,
    /// C = min(KL(P0‖P1), KL(P1‖P0)), in nats; may be +inf.
    pub c: f64,
    /// Chernoff information I_ch(P0, P1), in nats; may be +inf.
    pub ich: f64,
    /// Privacy budget, for the private bounds.
    pub epsilon: Option<f64>,
    /// Alphabet size, for the randomized-response bound.
    pub q: Option<usize>,
    /// d_TV(P0, P1), for the private bounds.
    pub dtv: Option<f64>,
    /// `Σ_{x in S_τ*} |P0(x) - P1(x)|`, for the binary-mechanism bound.
    pub s_tau_gap: Option<f64>,
}

impl BoundInputs {
    /// Compute (s, C, I_ch) from the distribution pair.
    pub fn non_private(n: usize, alpha: usize, p0: &Distribution, p1: &Distribution) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "dataset size {n} must be at least 2"
            )));
        }
        if alpha < 1 || alpha > n {
            return Err(Error::InvalidParameter(format!(
                "alpha {alpha} outside [1, n] with n = {n}"
            )));
        }
        Ok(Self {
            n,
            alpha,
            s: sensitivity(p0, p1)?,
            c: kl_divergence(p0, p1)?
                .value()
                .min(kl_divergence(p1, p0)?.value()),
            ich: chernoff_information(p0, p1)?.value.value(),
            epsilon: None,
            q: None,
            dtv: None,
            s_tau_gap: None,
        })
    }

    /// Extend with the quantities the randomized-response bound needs.
    pub fn for_rr(
        n: usize,
        alpha: usize,
        p0: &Distribution,
        p1: &Distribution,
        eps: PrivacyBudget,
    ) -> Result<Self> {
        let mut inputs = Self::non_private(n, alpha, p0, p1)?;
        inputs.epsilon = Some(eps.epsilon());
        inputs.q = Some(p0.alphabet_size());
        inputs.dtv = Some(tv_distance(p0, p1)?.value());
        Ok(inputs)
    }

    /// Extend with the quantities the binary-mechanism bound needs; the
    /// quantizer gap is taken at the τ* selected for this budget.
    pub fn for_bm(
        n: usize,
        alpha: usize,
        p0: &Distribution,
        p1: &Distribution,
        eps: PrivacyBudget,
    ) -> Result<Self> {
        let mut inputs = Self::non_private(n, alpha, p0, p1)?;
        let selection = select_tau_star(p0, p1, eps)?;
        inputs.epsilon = Some(eps.epsilon());
        inputs.dtv = Some(tv_distance(p0, p1)?.value());
        inputs.s_tau_gap = Some(selection.quantizer.mass_gap(p0, p1));
        Ok(inputs)
    }

    pub fn with_alpha(mut self, alpha: usize) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Which term of the min produced the reported β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundRegime {
    Series,
    Chernoff,
}

/// Evaluated bound: the series term, its geometric-sum relaxation, the
/// Chernoff term, and the final β = min(1, 2·min(series, chernoff)).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_a: f64,
    pub bound_a_closed: f64,
    pub bound_b: f64,
    pub beta: f64,
    pub regime: BoundRegime,
}

/// Score sensitivity `s = D^J_∞(P0, P1)`, equivalently the range of the
/// per-symbol log-likelihood ratio `max_x ln(p1/p0) - min_x ln(p1/p0)`.
/// `+inf` under any one-sided support violation.
pub fn sensitivity(p0: &Distribution, p1: &Distribution) -> Result<f64> {
    Ok(jeffreys_renyi(RenyiOrder::INF, p0, p1)?.value())
}

/// `i* = max(1, ceil(log2((n-1)/alpha)))`. The proof assumes α < n-1; for
/// larger α one series term is kept so the sum never degenerates to zero.
fn series_depth(n: usize, alpha: usize) -> u32 {
    let ratio = (n as f64 - 1.0) / alpha as f64;
    if ratio <= 1.0 {
        return 1;
    }
    (ratio.log2().ceil() as u32).max(1)
}

/// `(C/s)^2` with the conventions that make degenerate inputs vacuous:
/// zero separation or infinite sensitivity give a zero exponent.
fn exponent_coefficient(c: f64, s: f64) -> f64 {
    if c <= 0.0 || !s.is_finite() || s <= 0.0 {
        0.0
    } else if !c.is_finite() {
        f64::INFINITY
    } else {
        (c / s) * (c / s)
    }
}

fn series_sum(alpha: usize, coeff: f64, depth: u32) -> f64 {
    (1..=depth)
        .map(|i| (-(2f64.powi(i as i32 - 1)) * alpha as f64 * coeff).exp())
        .sum()
}

/// Geometric relaxation of the series: `t(1-t^M)/(1-t)` with
/// `t = exp(-alpha * coeff)` and `M = floor((n-1)/alpha)`; `+inf`-like
/// (vacuous) inputs yield the trivial value.
fn geometric_closed_form(n: usize, alpha: usize, coeff: f64) -> f64 {
    let t = (-(alpha as f64) * coeff).exp();
    let m = ((n - 1) / alpha).max(1) as i32;
    if t >= 1.0 {
        // series of ones: report the term count, caller clips
        return m as f64;
    }
    t * (1.0 - t.powi(m)) / (1.0 - t)
}

fn assemble_report(n: usize, alpha: usize, coeff: f64, chernoff_term: f64) -> BoundReport {
    let depth = series_depth(n, alpha);
    let bound_a = series_sum(alpha, coeff, depth);
    let bound_a_closed = geometric_closed_form(n, alpha, coeff);
    let (regime, smaller) = if chernoff_term <= bound_a {
        (BoundRegime::Chernoff, chernoff_term)
    } else {
        (BoundRegime::Series, bound_a)
    };
    BoundReport {
        bound_a,
        bound_a_closed,
        bound_b: chernoff_term,
        beta: (2.0 * smaller).min(1.0),
        regime,
    }
}

/// Accuracy bound for the non-private estimator:
/// `β <= 2 min{ Σ_{i<=i*} exp(-2^(i-1) α C²/s²), exp(-α I_ch) }`.
pub fn theorem_npcpd(inputs: &BoundInputs) -> BoundReport {
    let coeff = exponent_coefficient(inputs.c, inputs.s);
    let chernoff_term = if inputs.ich.is_finite() {
        (-(inputs.alpha as f64) * inputs.ich).exp()
    } else {
        0.0
    };
    assemble_report(inputs.n, inputs.alpha, coeff, chernoff_term)
}

/// Closed-form relaxation of the non-private bound:
/// `β <= 2 min{ t(1-t^M)/(1-t), exp(-α I_ch) }`, clipped to [0, 1].
pub fn corollary_npcpd_closed(inputs: &BoundInputs) -> f64 {
    let coeff = exponent_coefficient(inputs.c, inputs.s);
    if coeff <= 0.0 {
        return 1.0; // t = 1: the geometric form is vacuous
    }
    let series = geometric_closed_form(inputs.n, inputs.alpha, coeff);
    let chernoff_term = if inputs.ich.is_finite() {
        (-(inputs.alpha as f64) * inputs.ich).exp()
    } else {
        0.0
    };
    (2.0 * series.min(chernoff_term)).min(1.0)
}

/// Effective constants of the randomized-response bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RrConstants {
    /// `s_r = min(2ε, tanh(ε/2)·s)`.
    pub s_r: f64,
    /// `C_r = 2((e^ε-1)/(e^ε+q-1))² d_TV²`.
    pub c_r: f64,
}

fn require(value: Option<f64>, what: &str) -> Result<f64> {
    value.ok_or_else(|| Error::InvalidParameter(format!("bound inputs missing {what}")))
}

/// Accuracy bound for the randomized-response estimator:
/// `β <= 2 min{ Σ exp(-2^(i-1) α C_r²/s_r²), (1 - C_r/2)^(α/2) }`.
pub fn theorem_rrcpd(inputs: &BoundInputs) -> Result<(BoundReport, RrConstants)> {
    let eps = require(inputs.epsilon, "epsilon")?;
    let q = inputs
        .q
        .ok_or_else(|| Error::InvalidParameter("bound inputs missing alphabet size".into()))?;
    let dtv = require(inputs.dtv, "dtv")?;
    let s_r = effective_sensitivity(eps, inputs.s);
    let contraction = (eps.exp() - 1.0) / (eps.exp() + q as f64 - 1.0);
    let c_r = 2.0 * contraction * contraction * dtv * dtv;
    let coeff = exponent_coefficient(c_r, s_r);
    let chernoff_term = (1.0 - c_r / 2.0).max(0.0).powf(inputs.alpha as f64 / 2.0);
    Ok((
        assemble_report(inputs.n, inputs.alpha, coeff, chernoff_term),
        RrConstants { s_r, c_r },
    ))
}

/// Effective constants of the binary-mechanism bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BmConstants {
    /// `s_b = min(2ε, tanh(ε/2)·s)`.
    pub s_b: f64,
    /// `C_b = 2 tanh²(ε/2) d_TV²` (drives the Chernoff term).
    pub c_b: f64,
    /// `C̃_b = 2 tanh²(ε/2) Σ_{x in S_τ*}|P0(x)-P1(x)|` (drives the series).
    pub c_tilde_b: f64,
}

/// Which form of the series constant the binary-mechanism bound uses.
///
/// `Verbatim` takes the quantizer mass gap linearly, as the bound states.
/// `SquaredGap` squares it, mirroring how the randomized-response constant
/// enters; kept only for sensitivity analysis of that discrepancy (for a
/// binary alphabet it makes the two private bounds coincide exactly).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BmSeriesVariant {
    #[default]
    Verbatim,
    SquaredGap,
}

/// Accuracy bound for the binary-mechanism estimator:
/// `β <= 2 min{ Σ exp(-2^(i-1) α C̃_b²/s_b²), (1 - C_b/2)^(α/2) }`.
pub fn theorem_bmcpd(
    inputs: &BoundInputs,
    variant: BmSeriesVariant,
) -> Result<(BoundReport, BmConstants)> {
    let eps = require(inputs.epsilon, "epsilon")?;
    let dtv = require(inputs.dtv, "dtv")?;
    let gap = require(inputs.s_tau_gap, "s_tau_gap")?;
    let s_b = effective_sensitivity(eps, inputs.s);
    let th = (eps / 2.0).tanh();
    let c_b = 2.0 * th * th * dtv * dtv;
    let gap_term = match variant {
        BmSeriesVariant::Verbatim => gap,
        BmSeriesVariant::SquaredGap => gap * gap,
    };
    let c_tilde_b = 2.0 * th * th * gap_term;
    let coeff = exponent_coefficient(c_tilde_b, s_b);
    let chernoff_term = (1.0 - c_b / 2.0).max(0.0).powf(inputs.alpha as f64 / 2.0);
    Ok((
        assemble_report(inputs.n, inputs.alpha, coeff, chernoff_term),
        BmConstants { s_b, c_b, c_tilde_b },
    ))
}

/// `min(2ε, tanh(ε/2)·s)`; infinite sensitivity falls back to the 2ε cap.
fn effective_sensitivity(eps: f64, s: f64) -> f64 {
    let contracted = if s.is_finite() {
        (eps / 2.0).tanh() * s
    } else {
        f64::INFINITY
    };
    (2.0 * eps).min(contracted)
}

/// Multiplicative attenuation of the error exponent under an ε-LDP
/// constraint: `tanh²(ε/2)`.
pub fn privacy_cost_factor(eps: PrivacyBudget) -> f64 {
    let t = (eps.epsilon() / 2.0).tanh();
    t * t
}

/// Error exponent `Λ = -ln(β/2)/α` of an error probability at tolerance α.
/// Requires β ∈ (0, 1]; empirical zeros must be floored first (see
/// [`floor_empirical_beta`]).
pub fn error_exponent(alpha: usize, beta: f64) -> Result<f64> {
    if alpha < 1 {
        return Err(Error::InvalidParameter("alpha must be >= 1".into()));
    }
    if beta.is_nan() || beta <= 0.0 || beta > 2.0 {
        return Err(Error::InvalidParameter(format!(
            "beta {beta} outside (0, 2] for exponent computation"
        )));
    }
    Ok(-(beta / 2.0).ln() / alpha as f64)
}

/// One-sided floor for empirical error rates: a zero count over `trials`
/// trials is replaced by `1/(2·trials)` so the exponent stays finite.
pub fn floor_empirical_beta(beta: f64, trials: usize) -> f64 {
    beta.max(1.0 / (2.0 * trials as f64))
}
