//! Contraction (SDPI) coefficients of channels: how much a divergence can
//! shrink through a stochastic map,
//! `η_D(W) = sup_{P0,P1} D(P0 W, P1 W) / D(P0, P1)`.
//!
//! For q-ary symmetric channels the coefficients for total variation and for
//! the order-∞ Rényi and symmetrized-Rényi divergences have closed forms.
//! For general channels the supremum is attained by input pairs supported on
//! two atoms, which makes a numeric search over binary-support pairs exact up
//! to grid resolution; a full-simplex sampling oracle is provided to validate
//! that reduction.

use serde::{Deserialize, Serialize};

use crate::divergence::{jeffreys_renyi, renyi_divergence, Distribution, RenyiOrder};
use crate::error::{Error, Result};
use crate::mechanisms::{pushforward, Channel, SymmetricChannelParams};
use crate::rng::SplitMix64;

/// Input divergences below this are treated as 0/0 and excluded from the
/// supremum.
const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Which divergence the coefficient is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SdpiMeasure {
    /// Rényi divergence of the given order ρ ∈ [1, ∞].
    Renyi(RenyiOrder),
    /// Symmetrized Rényi divergence of order ∞ (projective distance).
    JeffreysInf,
}

/// An SDPI coefficient estimate, with the witness pair when it came from a
/// search. Numeric estimates are lower bounds on the true supremum within
/// the search resolution; the closed forms are exact limits (approached by
/// degenerate or uniform witnesses, so no finite witness attains them).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpiEstimate {
    pub eta: f64,
    pub witness_p0: Option<Distribution>,
    pub witness_p1: Option<Distribution>,
    pub achieved_ratio: f64,
    pub is_closed_form: bool,
    /// Set when every candidate ratio was 0/0 (e.g. all channel rows equal).
    pub degenerate: bool,
}

impl SdpiEstimate {
    fn closed_form(eta: f64) -> Self {
        Self {
            eta,
            witness_p0: None,
            witness_p1: None,
            achieved_ratio: eta,
            is_closed_form: true,
            degenerate: false,
        }
    }
}

/// Dobrushin coefficient of a q-ary symmetric channel: η_TV = |v - u|.
pub fn eta_tv_symmetric(params: &SymmetricChannelParams) -> SdpiEstimate {
    SdpiEstimate::closed_form((params.v - params.u).abs())
}

/// Order-∞ Rényi contraction of a q-ary symmetric channel:
/// η_∞ = |v - u| / max(u, v), approached by near-degenerate binary inputs.
pub fn eta_renyi_inf_symmetric(params: &SymmetricChannelParams) -> SdpiEstimate {
    SdpiEstimate::closed_form((params.v - params.u).abs() / params.u.max(params.v))
}

/// Order-∞ symmetrized-Rényi contraction of a q-ary symmetric channel:
/// η^J_∞ = |v - u| / (v + u), approached by near-uniform binary inputs.
/// For the binary randomized response at budget ε this equals tanh(ε/2).
pub fn eta_jeffreys_inf_symmetric(params: &SymmetricChannelParams) -> SdpiEstimate {
    SdpiEstimate::closed_form((params.v - params.u).abs() / (params.v + params.u))
}

/// Controls for the binary-support search in [`eta_numeric`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchParams {
    /// Distance from the simplex boundary at which the (p, q) grid is
    /// clipped; the ∞-order suprema live in boundary limits, so the reported
    /// eta undershoots by O(offset).
    pub boundary_offset: f64,
    /// Points per axis in the initial grid.
    pub resolution: usize,
    /// Rounds of coordinate-descent refinement around the best grid point.
    pub refine_rounds: usize,
    /// Window shrink factor per refinement round.
    pub shrink: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            boundary_offset: 1e-4,
            resolution: 200,
            refine_rounds: 3,
            shrink: 10.0,
        }
    }
}

fn measure_value(measure: SdpiMeasure, p: &Distribution, q: &Distribution) -> Result<f64> {
    let v = match measure {
        SdpiMeasure::Renyi(rho) => renyi_divergence(rho, p, q)?,
        SdpiMeasure::JeffreysInf => jeffreys_renyi(RenyiOrder::INF, p, q)?,
    };
    Ok(v.value())
}

/// `D(P0 W, P1 W) / D(P0, P1)`, or `None` when the pair is excluded:
/// denominator below the 0/0 floor, or an absolute-continuity violation
/// (infinite input divergence contributes ratio 0 for ρ >= 1).
fn divergence_ratio(
    w: &Channel,
    measure: SdpiMeasure,
    p0: &Distribution,
    p1: &Distribution,
) -> Result<Option<f64>> {
    let den = measure_value(measure, p0, p1)?;
    if !den.is_finite() || den < DENOMINATOR_FLOOR {
        return Ok(None);
    }
    let q0 = pushforward(p0, w)?;
    let q1 = pushforward(p1, w)?;
    let num = measure_value(measure, &q0, &q1)?;
    Ok(Some(num / den))
}

/// Embed a two-atom distribution `(mass on x1, rest on x2)` in the full
/// input alphabet.
fn binary_support(q: usize, x1: usize, x2: usize, p: f64) -> Distribution {
    let mut mass = vec![0.0; q];
    mass[x1] = p;
    mass[x2] = 1.0 - p;
    Distribution::new(mass).expect("binary-support mass is a valid pmf")
}

fn validate_measure(rho: RenyiOrder, jeffreys: bool) -> Result<SdpiMeasure> {
    if jeffreys {
        if !rho.is_infinite() {
            return Err(Error::InvalidParameter(
                "the symmetrized search is only supported at order infinity".into(),
            ));
        }
        Ok(SdpiMeasure::JeffreysInf)
    } else {
        Ok(SdpiMeasure::Renyi(rho))
    }
}

/// Numeric SDPI coefficient via binary-support search.
///
/// The supremum restricted to pairs supported on two atoms (x1, x2) is
/// scanned on a `resolution`-per-axis grid over
/// `(p, q) ∈ (offset, 1-offset)^2`, then sharpened by coordinate descent
/// with a shrinking window. The best ratio found is returned together with
/// its witness pair; it is a lower bound on the true supremum within the
/// search resolution.
pub fn eta_numeric(
    w: &Channel,
    rho: RenyiOrder,
    jeffreys: bool,
    search: &SearchParams,
) -> Result<SdpiEstimate> {
    let measure = validate_measure(rho, jeffreys)?;
    let q = w.input_size();
    if q < 2 {
        return Err(Error::InvalidParameter(
            "SDPI search needs an input alphabet of at least two symbols".into(),
        ));
    }
    let lo = search.boundary_offset;
    let hi = 1.0 - search.boundary_offset;
    let n = search.resolution.max(2);
    let axis: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();

    let mut best: Option<(f64, usize, usize, f64, f64)> = None;
    for x1 in 0..q {
        for x2 in (x1 + 1)..q {
            for &p in &axis {
                for &r in &axis {
                    let p0 = binary_support(q, x1, x2, p);
                    let p1 = binary_support(q, x1, x2, r);
                    if let Some(ratio) = divergence_ratio(w, measure, &p0, &p1)? {
                        if best.is_none_or(|(b, ..)| ratio > b) {
                            best = Some((ratio, x1, x2, p, r));
                        }
                    }
                }
            }
        }
    }

    // No usable pair (every candidate was 0/0) or no contraction at all
    // (identical rows make every output pair coincide): eta = 0, flagged.
    let Some((mut best_ratio, x1, x2, mut bp, mut br)) = best.filter(|&(r, ..)| r > 0.0) else {
        return Ok(SdpiEstimate {
            eta: 0.0,
            witness_p0: None,
            witness_p1: None,
            achieved_ratio: 0.0,
            is_closed_form: false,
            degenerate: true,
        });
    };

    // Coordinate descent: re-grid one coordinate at a time inside a window
    // that shrinks each round.
    let mut window = (hi - lo) / (n - 1) as f64;
    for _ in 0..search.refine_rounds {
        for coord in 0..2 {
            let center = if coord == 0 { bp } else { br };
            let a = (center - window).max(lo);
            let b = (center + window).min(hi);
            for i in 0..n {
                let t = a + (b - a) * i as f64 / (n - 1) as f64;
                let (p, r) = if coord == 0 { (t, br) } else { (bp, t) };
                let p0 = binary_support(q, x1, x2, p);
                let p1 = binary_support(q, x1, x2, r);
                if let Some(ratio) = divergence_ratio(w, measure, &p0, &p1)? {
                    if ratio > best_ratio {
                        best_ratio = ratio;
                        bp = p;
                        br = r;
                    }
                }
            }
        }
        window /= search.shrink;
    }

    Ok(SdpiEstimate {
        eta: best_ratio,
        witness_p0: Some(binary_support(q, x1, x2, bp)),
        witness_p1: Some(binary_support(q, x1, x2, br)),
        achieved_ratio: best_ratio,
        is_closed_form: false,
        degenerate: false,
    })
}

/// Full-simplex validation oracle: the maximum divergence ratio over
/// `samples` input pairs drawn uniformly (Dirichlet(1,…,1)) from the whole
/// simplex, plus every ordered pair from a coarse simplex grid (step 1/4,
/// corners included). Pairs with denominator below `1e-12` are skipped.
///
/// Restricted to `input_size <= 4` for cost control. Since the supremum is
/// attained on binary-support pairs, this can exceed [`eta_numeric`] only by
/// search slack.
pub fn eta_bruteforce_oracle(
    w: &Channel,
    rho: RenyiOrder,
    jeffreys: bool,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let measure = validate_measure(rho, jeffreys)?;
    let q = w.input_size();
    if q > 4 {
        return Err(Error::InvalidParameter(format!(
            "oracle restricted to input alphabets of size <= 4, got {q}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut best = 0.0f64;

    let dirichlet = |rng: &mut SplitMix64| {
        let raw: Vec<f64> = (0..q).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
        let s: f64 = raw.iter().sum();
        Distribution::new(raw.into_iter().map(|x| x / s).collect())
            .expect("normalized exponentials form a pmf")
    };
    for _ in 0..samples {
        let p0 = dirichlet(&mut rng);
        let p1 = dirichlet(&mut rng);
        if let Some(ratio) = divergence_ratio(w, measure, &p0, &p1)? {
            best = best.max(ratio);
        }
    }

    // coarse simplex grid with step 1/4; includes the vertex point masses
    let grid = simplex_grid(q, 4);
    for p0 in &grid {
        for p1 in &grid {
            if let Some(ratio) = divergence_ratio(w, measure, p0, p1)? {
                best = best.max(ratio);
            }
        }
    }
    Ok(best)
}

/// All pmfs over `q` symbols with masses that are multiples of `1/steps`.
fn simplex_grid(q: usize, steps: usize) -> Vec<Distribution> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; q];
    fill_grid(&mut counts, 0, steps, &mut out);
    out
}

fn fill_grid(counts: &mut Vec<usize>, idx: usize, remaining: usize, out: &mut Vec<Distribution>) {
    if idx == counts.len() - 1 {
        counts[idx] = remaining;
        let total: usize = counts.iter().sum();
        let mass = counts.iter().map(|&c| c as f64 / total as f64).collect();
        out.push(Distribution::new(mass).expect("grid point is a valid pmf"));
        return;
    }
    for c in 0..=remaining {
        counts[idx] = c;
        fill_grid(counts, idx + 1, remaining - c, out);
    }
}
