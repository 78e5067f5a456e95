//! Offline change-point estimators: the non-private suffix log-likelihood
//! scan, and its two ε-LDP variants that privatize the data through the
//! randomized response or the binary mechanism before scanning.

use serde::{Deserialize, Serialize};

use crate::divergence::Distribution;
use crate::error::{Error, Result};
use crate::mechanisms::{
    binary_mechanism_for, pushforward, rr_channel, select_tau_star, PrivacyBudget,
};
use crate::rng::SplitMix64;

/// An ordered sequence of alphabet symbols, optionally annotated with the
/// true change-point k* (1-based, in (1, n]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    symbols: Vec<usize>,
    alphabet_size: usize,
    true_change_point: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    symbols: Vec<usize>,
    alphabet_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_change_point: Option<usize>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = Error;
    fn try_from(r: DatasetRepr) -> Result<Self> {
        Dataset::new(r.symbols, r.alphabet_size, r.true_change_point)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(d: Dataset) -> DatasetRepr {
        DatasetRepr {
            symbols: d.symbols,
            alphabet_size: d.alphabet_size,
            true_change_point: d.true_change_point,
        }
    }
}

impl Dataset {
    pub fn new(
        symbols: Vec<usize>,
        alphabet_size: usize,
        true_change_point: Option<usize>,
    ) -> Result<Self> {
        let n = symbols.len();
        if n < 2 {
            return Err(Error::InvalidData(format!(
                "dataset needs at least 2 symbols, got {n}"
            )));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::InvalidData(format!(
                "symbol {bad} outside alphabet of size {alphabet_size}"
            )));
        }
        if let Some(k) = true_change_point {
            if k < 2 || k > n {
                return Err(Error::InvalidData(format!(
                    "change-point {k} outside (1, n] with n = {n}"
                )));
            }
        }
        Ok(Self {
            symbols,
            alphabet_size,
            true_change_point,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn true_change_point(&self) -> Option<usize> {
        self.true_change_point
    }
}

/// Output of a detection run: the estimate, the full score vector, and (for
/// the private detectors) the privatized dataset that was actually scanned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    /// 1-based index of the smallest score maximizer.
    pub k_hat: usize,
    /// `scores[k-1] = l(D, k)` in nats; entries may be ±inf.
    pub scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub privatized: Option<Dataset>,
}

/// Per-symbol log-likelihood ratio with explicit infinity bookkeeping.
/// Keeping the three states separate avoids NaN from inf - inf and makes the
/// mixed-infinity case detectable.
enum LogRatio {
    Finite(f64),
    PosInf,
    NegInf,
}

fn symbol_log_ratio(x: usize, p0: &Distribution, p1: &Distribution) -> Result<LogRatio> {
    let a = p0.prob(x);
    let b = p1.prob(x);
    match (a > 0.0, b > 0.0) {
        (true, true) => Ok(LogRatio::Finite((b / a).ln())),
        (true, false) => Ok(LogRatio::NegInf),
        (false, true) => Ok(LogRatio::PosInf),
        (false, false) => Err(Error::InvalidData(format!(
            "observed symbol {x} has zero probability under both hypotheses"
        ))),
    }
}

/// Suffix scores `l(D, k) = Σ_{i=k}^{n} ln(p1(x_i)/p0(x_i))` for k = 1..n,
/// computed in one reverse scan. A ±inf log-ratio absorbs finite terms; a
/// suffix containing both signs of infinity is an error.
pub fn glrt_scores(d: &Dataset, p0: &Distribution, p1: &Distribution) -> Result<Vec<f64>> {
    if d.alphabet_size() != p0.alphabet_size() || p0.alphabet_size() != p1.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: d.alphabet_size(),
            got: p0.alphabet_size().max(p1.alphabet_size()),
        });
    }
    let n = d.len();
    let mut scores = vec![0.0; n];
    let mut finite_sum = 0.0;
    let mut pos = 0usize;
    let mut neg = 0usize;
    for k in (0..n).rev() {
        match symbol_log_ratio(d.symbols()[k], p0, p1)? {
            LogRatio::Finite(r) => finite_sum += r,
            LogRatio::PosInf => pos += 1,
            LogRatio::NegInf => neg += 1,
        }
        scores[k] = match (pos, neg) {
            (0, 0) => finite_sum,
            (_, 0) => f64::INFINITY,
            (0, _) => f64::NEG_INFINITY,
            _ => return Err(Error::IndeterminateScore),
        };
    }
    Ok(scores)
}

fn smallest_argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best + 1
}

/// Non-private estimator: k̂ is the smallest index maximizing the suffix
/// score. Every index in [1, n] is in the argmax domain; ties (e.g. when
/// p0 = p1 makes all scores zero) resolve to the smallest index.
pub fn detect(d: &Dataset, p0: &Distribution, p1: &Distribution) -> Result<DetectionResult> {
    let scores = glrt_scores(d, p0, p1)?;
    Ok(DetectionResult {
        k_hat: smallest_argmax(&scores),
        scores,
        privatized: None,
    })
}

fn privatize(
    d: &Dataset,
    w: &crate::mechanisms::Channel,
    rng: &mut SplitMix64,
) -> Result<Dataset> {
    // one uniform variate per symbol, consumed in data order
    let symbols = d
        .symbols()
        .iter()
        .map(|&x| w.sample_symbol(x, rng.next_f64()))
        .collect();
    Dataset::new(symbols, w.output_size(), d.true_change_point())
}

/// Randomized-response estimator: privatize every symbol independently
/// through the q-ary randomized response at budget ε, then run [`detect`]
/// on the privatized data against the induced output distributions.
pub fn rr_cpd(
    d: &Dataset,
    p0: &Distribution,
    p1: &Distribution,
    eps: PrivacyBudget,
    rng: &mut SplitMix64,
) -> Result<DetectionResult> {
    if d.alphabet_size() != p0.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: d.alphabet_size(),
            got: p0.alphabet_size(),
        });
    }
    let w = rr_channel(d.alphabet_size(), eps)?;
    let q0 = pushforward(p0, &w)?;
    let q1 = pushforward(p1, &w)?;
    let privatized = privatize(d, &w, rng)?;
    let mut result = detect(&privatized, &q0, &q1)?;
    result.privatized = Some(privatized);
    Ok(result)
}

/// Binary-mechanism estimator: pick the quantizer threshold maximizing the
/// post-privatization Chernoff information, privatize through that binary
/// mechanism, and run [`detect`] on the bit sequence against the induced
/// Bernoulli outputs. Requires p0 ≠ p1.
pub fn bm_cpd(
    d: &Dataset,
    p0: &Distribution,
    p1: &Distribution,
    eps: PrivacyBudget,
    rng: &mut SplitMix64,
) -> Result<DetectionResult> {
    if d.alphabet_size() != p0.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: d.alphabet_size(),
            got: p0.alphabet_size(),
        });
    }
    let selection = select_tau_star(p0, p1, eps)?;
    let w = binary_mechanism_for(&selection.quantizer, eps)?;
    let q0 = pushforward(p0, &w)?;
    let q1 = pushforward(p1, &w)?;
    let privatized = privatize(d, &w, rng)?;
    let mut result = detect(&privatized, &q0, &q1)?;
    result.privatized = Some(privatized);
    Ok(result)
}
