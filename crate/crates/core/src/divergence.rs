//! Probability distributions over finite alphabets and the divergence
//! measures between them: total variation, KL, Rényi of any order
//! ρ ∈ [1, ∞], symmetrized (Jeffreys) Rényi, Chernoff information, and the
//! f_λ family.
//!
//! All logarithms are natural; divergences are reported in nats. Zero-mass
//! conventions: `0·ln(0/q) = 0`, `0^λ · x^(1-λ) = 0`, and atoms with
//! `p(x) = q(x) = 0` are skipped. A divergence is `+inf` exactly when the
//! relevant absolute-continuity condition fails on the support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Renormalize when the mass sum is within this distance of 1; reject beyond.
const NORMALIZATION_SLACK: f64 = 1e-9;

/// A probability mass function over the alphabet `{0, 1, …, q-1}`.
///
/// Construction renormalizes sums within `1e-9` of one (absorbing float
/// noise from empirical pmfs) and rejects anything farther off. After
/// construction the mass sums to 1 within `1e-12`. Serializes as the bare
/// mass vector; deserialization re-validates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    mass: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(mass: Vec<f64>) -> Result<Self> {
        Distribution::new(mass)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Vec<f64> {
        d.mass
    }
}

impl Distribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidDistribution(
                "alphabet must contain at least one symbol".into(),
            ));
        }
        if mass.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidDistribution(
                "mass entries must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::InvalidDistribution(format!(
                "mass sums to {sum}, not 1"
            )));
        }
        let mass = mass.into_iter().map(|m| m / sum).collect();
        Ok(Self { mass })
    }

    /// Bernoulli convention: `Ber(theta)` is `[1-theta, theta]` over `{0, 1}`,
    /// i.e. `theta` is the mass on symbol 1.
    pub fn bernoulli(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "bernoulli parameter {theta} outside [0, 1]"
            )));
        }
        Self::new(vec![1.0 - theta, theta])
    }

    /// Point mass on `symbol` in an alphabet of size `q`.
    pub fn point_mass(symbol: usize, q: usize) -> Result<Self> {
        if symbol >= q {
            return Err(Error::InvalidParameter(format!(
                "point mass symbol {symbol} outside alphabet of size {q}"
            )));
        }
        let mut mass = vec![0.0; q];
        mass[symbol] = 1.0;
        Self::new(mass)
    }

    pub fn uniform(q: usize) -> Result<Self> {
        Self::new(vec![1.0 / q as f64; q.max(1)])
    }

    pub fn alphabet_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn prob(&self, symbol: usize) -> f64 {
        self.mass[symbol]
    }

    /// Inverse-CDF sampling over the stored symbol order; consumes exactly
    /// the one uniform variate `u` handed in.
    pub fn sample_index(&self, u: f64) -> usize {
        sample_from_weights(&self.mass, u)
    }
}

/// Shared inverse-CDF walk for distributions and channel rows. Falls back to
/// the last positive-mass entry when `u` lands beyond the accumulated sum.
pub(crate) fn sample_from_weights(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .unwrap_or(weights.len() - 1)
}

fn check_same_alphabet(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: p.alphabet_size(),
            got: q.alphabet_size(),
        });
    }
    Ok(())
}

/// Order of a Rényi divergence: an extended real in [1, ∞], with ∞
/// representable exactly as `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub const KL: RenyiOrder = RenyiOrder(1.0);
    pub const INF: RenyiOrder = RenyiOrder(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "Renyi order {value} outside [1, inf]"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

/// A non-negative extended real in nats. `+inf` marks an
/// absolute-continuity violation on the relevant support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    value: f64,
    finite: bool,
}

impl DivergenceValue {
    pub(crate) fn finite(value: f64) -> Self {
        debug_assert!(value.is_finite() && value >= 0.0);
        Self {
            value,
            finite: true,
        }
    }

    pub(crate) const INFINITE: DivergenceValue = DivergenceValue {
        value: f64::INFINITY,
        finite: false,
    };

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    fn add(self, other: DivergenceValue) -> DivergenceValue {
        if self.finite && other.finite {
            DivergenceValue::finite(self.value + other.value)
        } else {
            DivergenceValue::INFINITE
        }
    }
}

/// Total variation distance `½ Σ_x |p(x) - q(x)|`; always finite, in [0, 1].
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<DivergenceValue> {
    check_same_alphabet(p, q)?;
    let sum: f64 = p
        .mass()
        .iter()
        .zip(q.mass())
        .map(|(&a, &b)| (a - b).abs())
        .sum();
    Ok(DivergenceValue::finite(0.5 * sum))
}

/// KL divergence `Σ_{x: p(x)>0} p(x) ln(p(x)/q(x))`; `+inf` when some atom
/// has `p(x) > 0` and `q(x) = 0`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<DivergenceValue> {
    check_same_alphabet(p, q)?;
    let mut sum = 0.0;
    for (&a, &b) in p.mass().iter().zip(q.mass()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(DivergenceValue::INFINITE);
        }
        sum += a * (a / b).ln();
    }
    // fp cancellation can leave a tiny negative residue for p ≈ q
    Ok(DivergenceValue::finite(sum.max(0.0)))
}

/// Rényi divergence of order ρ ∈ [1, ∞].
///
/// - ρ = 1 delegates to [`kl_divergence`];
/// - ρ ∈ (1, ∞): `(1/(ρ-1)) ln Σ_x p(x)^ρ q(x)^(1-ρ)`;
/// - ρ = ∞: `ln max_{x: p(x)>0} p(x)/q(x)`.
pub fn renyi_divergence(
    rho: RenyiOrder,
    p: &Distribution,
    q: &Distribution,
) -> Result<DivergenceValue> {
    check_same_alphabet(p, q)?;
    if rho.value() == 1.0 {
        return kl_divergence(p, q);
    }
    if rho.is_infinite() {
        let mut max_ratio = 0.0f64;
        for (&a, &b) in p.mass().iter().zip(q.mass()) {
            if a == 0.0 {
                continue;
            }
            if b == 0.0 {
                return Ok(DivergenceValue::INFINITE);
            }
            max_ratio = max_ratio.max(a / b);
        }
        return Ok(DivergenceValue::finite(max_ratio.ln().max(0.0)));
    }
    let r = rho.value();
    let mut sum = 0.0;
    for (&a, &b) in p.mass().iter().zip(q.mass()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(DivergenceValue::INFINITE);
        }
        sum += a.powf(r) * b.powf(1.0 - r);
    }
    Ok(DivergenceValue::finite((sum.ln() / (r - 1.0)).max(0.0)))
}

/// Symmetrized Rényi divergence `D_ρ(p‖q) + D_ρ(q‖p)`. The order-∞ case is
/// the projective distance.
pub fn jeffreys_renyi(
    rho: RenyiOrder,
    p: &Distribution,
    q: &Distribution,
) -> Result<DivergenceValue> {
    let fwd = renyi_divergence(rho, p, q)?;
    let bwd = renyi_divergence(rho, q, p)?;
    Ok(fwd.add(bwd))
}

/// Chernoff information together with the minimizing exponent λ*.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChernoffInformation {
    pub value: DivergenceValue,
    pub lambda_star: f64,
}

/// `ψ(λ) = ln Σ_x p(x)^λ q(x)^(1-λ)` over the common support.
/// Returns `None` when the supports are disjoint.
fn log_moment(p: &Distribution, q: &Distribution, lambda: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut nonempty = false;
    for (&a, &b) in p.mass().iter().zip(q.mass()) {
        if a > 0.0 && b > 0.0 {
            sum += a.powf(lambda) * b.powf(1.0 - lambda);
            nonempty = true;
        }
    }
    if nonempty {
        Some(sum.ln())
    } else {
        None
    }
}

/// Golden-section search for the minimum of a convex `f` on `[a, b]`,
/// shrinking the bracket below `tol`. Deterministic.
fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Chernoff information `-min_{λ∈(0,1)} ln Σ_x p(x)^λ q(x)^(1-λ)`.
///
/// The objective is convex in λ; the minimizer is located by golden-section
/// search on `[1e-9, 1-1e-9]` to absolute tolerance `1e-10` in λ. Disjoint
/// supports yield `+inf`.
pub fn chernoff_information(p: &Distribution, q: &Distribution) -> Result<ChernoffInformation> {
    check_same_alphabet(p, q)?;
    if log_moment(p, q, 0.5).is_none() {
        return Ok(ChernoffInformation {
            value: DivergenceValue::INFINITE,
            lambda_star: 0.5,
        });
    }
    let psi = |lambda: f64| log_moment(p, q, lambda).expect("common support checked");
    let (lambda_star, psi_min) = golden_section_min(psi, 1e-9, 1.0 - 1e-9, 1e-10);
    Ok(ChernoffInformation {
        value: DivergenceValue::finite((-psi_min).max(0.0)),
        lambda_star,
    })
}

/// `D_{f_λ}(p‖q) = 1 - Σ_x p(x)^λ q(x)^(1-λ)` for the convex generator
/// `f_λ(t) = 1 - t^λ`, λ ∈ (0, 1).
pub fn f_lambda_divergence(
    lambda: f64,
    p: &Distribution,
    q: &Distribution,
) -> Result<DivergenceValue> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} outside (0, 1)"
        )));
    }
    check_same_alphabet(p, q)?;
    let mut sum = 0.0;
    for (&a, &b) in p.mass().iter().zip(q.mass()) {
        if a > 0.0 && b > 0.0 {
            sum += a.powf(lambda) * b.powf(1.0 - lambda);
        }
    }
    Ok(DivergenceValue::finite((1.0 - sum).max(0.0)))
}
