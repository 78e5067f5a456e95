//! ε-LDP privatization mechanisms over finite alphabets: the q-ary
//! randomized response and the two-step binary mechanism (likelihood-ratio
//! quantizer followed by a binary randomized response), plus the generic
//! channel machinery they share.

use serde::{Deserialize, Serialize};

use crate::divergence::{
    chernoff_information, jeffreys_renyi, sample_from_weights, Distribution, DivergenceValue,
    RenyiOrder,
};
use crate::error::{Error, Result};

const ROW_SLACK: f64 = 1e-9;

/// A privacy budget ε > 0, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "privacy budget {epsilon} must be a positive finite real"
            )));
        }
        Ok(Self(epsilon))
    }

    pub fn epsilon(&self) -> f64 {
        self.0
    }
}

/// A row-stochastic transition matrix W(y|x); rows index inputs.
///
/// JSON form is `{"rows": [[...], ...], "epsilon": ...}`; deserialization
/// re-validates row stochasticity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct Channel {
    rows: Vec<Vec<f64>>,
    /// Budget the channel was built for, when it came from a mechanism
    /// constructor; carried through JSON for the CLI.
    pub epsilon: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = Error;
    fn try_from(repr: ChannelRepr) -> Result<Self> {
        let mut ch = Channel::new(repr.rows)?;
        ch.epsilon = repr.epsilon;
        Ok(ch)
    }
}

impl From<Channel> for ChannelRepr {
    fn from(ch: Channel) -> ChannelRepr {
        ChannelRepr {
            rows: ch.rows,
            epsilon: ch.epsilon,
        }
    }
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidChannel("empty transition matrix".into()));
        }
        let width = rows[0].len();
        let mut normalized = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidChannel(format!(
                    "row {i} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|&w| !w.is_finite() || w < 0.0) {
                return Err(Error::InvalidChannel(format!(
                    "row {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SLACK {
                return Err(Error::InvalidChannel(format!("row {i} sums to {sum}")));
            }
            normalized.push(row.into_iter().map(|w| w / sum).collect());
        }
        Ok(Self {
            rows: normalized,
            epsilon: None,
        })
    }

    pub fn identity(q: usize) -> Result<Self> {
        let rows = (0..q)
            .map(|i| {
                let mut r = vec![0.0; q];
                r[i] = 1.0;
                r
            })
            .collect();
        Self::new(rows)
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.rows[x][y]
    }

    /// Privatize one symbol: inverse-CDF over the stored row order,
    /// consuming exactly the one uniform variate `u`.
    pub fn sample_symbol(&self, x: usize, u: f64) -> usize {
        sample_from_weights(&self.rows[x], u)
    }
}

/// Parameters (q, u, v) of a q-ary symmetric channel: diagonal v,
/// off-diagonal u, with v = 1 - (q-1)u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricChannelParams {
    pub q: usize,
    pub u: f64,
    pub v: f64,
}

impl SymmetricChannelParams {
    /// Build from the off-diagonal probability; v is implied.
    pub fn new(q: usize, u: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "symmetric channel needs q >= 2, got {q}"
            )));
        }
        let v = 1.0 - (q as f64 - 1.0) * u;
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0 + 1e-12).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal {u} gives diagonal {v} outside [0, 1] for q = {q}"
            )));
        }
        Ok(Self { q, u, v: v.min(1.0) })
    }

    /// The randomized response channel at budget ε: v = e^ε/(e^ε+q-1).
    pub fn randomized_response(q: usize, eps: PrivacyBudget) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "randomized response needs q >= 2, got {q}"
            )));
        }
        let denom = eps.epsilon().exp() + q as f64 - 1.0;
        Ok(Self {
            q,
            u: 1.0 / denom,
            v: eps.epsilon().exp() / denom,
        })
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let rows = (0..self.q)
            .map(|i| {
                (0..self.q)
                    .map(|j| if i == j { self.v } else { self.u })
                    .collect()
            })
            .collect();
        Channel::new(rows)
    }
}

/// The q-ary randomized response mechanism at budget ε: keeps the symbol
/// with probability e^ε/(e^ε+q-1), flips to each other symbol with
/// probability 1/(e^ε+q-1). Satisfies ε-LDP with equality.
pub fn rr_channel(q: usize, eps: PrivacyBudget) -> Result<Channel> {
    let params = SymmetricChannelParams::randomized_response(q, eps)?;
    let mut ch = params.to_channel()?;
    ch.epsilon = Some(eps.epsilon());
    Ok(ch)
}

/// A likelihood-ratio quantizer: the input alphabet is split into
/// `S_tau = {x : p0(x) >= tau * p1(x)}` (mapped to bit 0) and its
/// complement (mapped to bit 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub tau: f64,
    /// Indicator of membership in S_tau, indexed by symbol.
    pub s_tau: Vec<bool>,
}

impl Quantizer {
    /// Symbols in S_tau.
    pub fn members(&self) -> Vec<usize> {
        self.s_tau
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    pub fn len_s_tau(&self) -> usize {
        self.s_tau.iter().filter(|&&m| m).count()
    }

    /// `Σ_{x in S_tau} |p0(x) - p1(x)|`, the separation the quantizer retains.
    pub fn mass_gap(&self, p0: &Distribution, p1: &Distribution) -> f64 {
        self.s_tau
            .iter()
            .zip(p0.mass().iter().zip(p1.mass()))
            .filter(|(&m, _)| m)
            .map(|(_, (&a, &b))| (a - b).abs())
            .sum()
    }
}

/// Likelihood ratio p0(x)/p1(x) with the conventions used for quantization:
/// `+inf` when p1(x) = 0 (including the massless 0/0 atoms, which are
/// assigned to S_tau; any assignment gives identical output distributions).
fn likelihood_ratio(p0: f64, p1: f64) -> f64 {
    if p1 == 0.0 {
        f64::INFINITY
    } else {
        p0 / p1
    }
}

/// Build the quantizer for threshold `tau > 0`.
pub fn quantizer(p0: &Distribution, p1: &Distribution, tau: f64) -> Result<Quantizer> {
    if p0.alphabet_size() != p1.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: p0.alphabet_size(),
            got: p1.alphabet_size(),
        });
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quantizer threshold {tau} must be a positive finite real"
        )));
    }
    let s_tau = p0
        .mass()
        .iter()
        .zip(p1.mass())
        .map(|(&a, &b)| likelihood_ratio(a, b) >= tau)
        .collect();
    Ok(Quantizer { tau, s_tau })
}

/// The binary mechanism W^b_tau at budget ε: quantize with `tau`, then pass
/// the bit through the binary randomized response. The row for x in S_tau is
/// `(e^ε, 1)/(e^ε+1)`, else `(1, e^ε)/(e^ε+1)`.
pub fn binary_mechanism(
    p0: &Distribution,
    p1: &Distribution,
    tau: f64,
    eps: PrivacyBudget,
) -> Result<Channel> {
    let quant = quantizer(p0, p1, tau)?;
    binary_mechanism_for(&quant, eps)
}

/// The binary mechanism induced by an already-built quantizer.
pub fn binary_mechanism_for(quant: &Quantizer, eps: PrivacyBudget) -> Result<Channel> {
    let denom = eps.epsilon().exp() + 1.0;
    let keep = eps.epsilon().exp() / denom;
    let flip = 1.0 / denom;
    let rows = quant
        .s_tau
        .iter()
        .map(|&in_s| {
            if in_s {
                vec![keep, flip]
            } else {
                vec![flip, keep]
            }
        })
        .collect();
    let mut ch = Channel::new(rows)?;
    ch.epsilon = Some(eps.epsilon());
    Ok(ch)
}

/// Output distribution `q(y) = Σ_x p(x) W(y|x)`.
pub fn pushforward(p: &Distribution, w: &Channel) -> Result<Distribution> {
    if p.alphabet_size() != w.input_size() {
        return Err(Error::AlphabetMismatch {
            expected: w.input_size(),
            got: p.alphabet_size(),
        });
    }
    let mut out = vec![0.0; w.output_size()];
    for (x, &px) in p.mass().iter().enumerate() {
        for (y, &wyx) in w.rows()[x].iter().enumerate() {
            out[y] += px * wyx;
        }
    }
    Distribution::new(out)
}

/// Check ε-LDP entrywise: `W(y|x) <= e^ε W(y|x') + 1e-12` for all y, x, x'.
/// Over finite alphabets this is sufficient, since the probability of any
/// output event is a sum over singletons.
pub fn verify_ldp(w: &Channel, eps: PrivacyBudget) -> bool {
    let factor = eps.epsilon().exp();
    for y in 0..w.output_size() {
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for x in 0..w.input_size() {
            let v = w.prob(y, x);
            min = min.min(v);
            max = max.max(v);
        }
        if max > factor * min + 1e-12 {
            return false;
        }
    }
    true
}

/// Predicate form of the projective-distance cap: after any ε-LDP channel,
/// the order-∞ symmetrized Rényi divergence of the outputs is at most 2ε.
pub fn ldp_divergence_cap_check(
    p0: &Distribution,
    p1: &Distribution,
    w: &Channel,
    eps: PrivacyBudget,
) -> Result<bool> {
    let q0 = pushforward(p0, w)?;
    let q1 = pushforward(p1, w)?;
    let d = jeffreys_renyi(RenyiOrder::INF, &q0, &q1)?;
    Ok(d.value() <= 2.0 * eps.epsilon() + 1e-9)
}

/// Result of the quantizer-threshold selection for the binary mechanism.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauSelection {
    pub tau_star: f64,
    pub quantizer: Quantizer,
    /// Post-privatization Chernoff information at tau_star.
    pub ich: DivergenceValue,
}

/// Choose the quantizer threshold maximizing the post-privatization Chernoff
/// information `I_ch(Q0^tau, Q1^tau)`.
///
/// The objective is piecewise constant in tau with breakpoints at the
/// likelihood ratios p0(x)/p1(x), so the finitely many distinct partitions
/// are enumerated exactly: candidate thresholds are the sorted distinct
/// finite positive ratios, plus one value beyond the largest (isolating only
/// the ratio-∞ atoms). Ties break toward the smallest |S_tau|, then the
/// smallest tau.
pub fn select_tau_star(
    p0: &Distribution,
    p1: &Distribution,
    eps: PrivacyBudget,
) -> Result<TauSelection> {
    if p0.alphabet_size() != p1.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: p0.alphabet_size(),
            got: p1.alphabet_size(),
        });
    }
    if p0.mass() == p1.mass() {
        return Err(Error::IdenticalDistributions);
    }

    let mut candidates: Vec<f64> = p0
        .mass()
        .iter()
        .zip(p1.mass())
        .map(|(&a, &b)| likelihood_ratio(a, b))
        .filter(|r| r.is_finite() && *r > 0.0)
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    candidates.dedup();
    // one threshold beyond every finite ratio: S_tau keeps only ratio-inf atoms
    let beyond = candidates.last().map_or(1.0, |&m| 2.0 * m.max(0.5));
    candidates.push(beyond);

    let mut best: Option<(f64, TauSelection)> = None;
    for &tau in &candidates {
        let quant = quantizer(p0, p1, tau)?;
        let w = binary_mechanism_for(&quant, eps)?;
        let q0 = pushforward(p0, &w)?;
        let q1 = pushforward(p1, &w)?;
        let ich = chernoff_information(&q0, &q1)?;
        let value = ich.value.value();
        let better = match &best {
            None => true,
            Some((best_value, best_sel)) => {
                value > *best_value
                    || (value == *best_value
                        && (quant.len_s_tau() < best_sel.quantizer.len_s_tau()
                            || (quant.len_s_tau() == best_sel.quantizer.len_s_tau()
                                && tau < best_sel.tau_star)))
            }
        };
        if better {
            best = Some((
                value,
                TauSelection {
                    tau_star: tau,
                    quantizer: quant,
                    ich: ich.value,
                },
            ));
        }
    }
    Ok(best.expect("candidate list is never empty").1)
}
