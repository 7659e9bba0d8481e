//! Deterministic stability verdicts and admissible noise-intensity ranges.
//!
//! Both noise placements reduce to positivity of a scalar quadratic on
//! `Z > 0`. With boundary noise, `A = C − β`, `B = θ − λ` and
//!
//! ```text
//! 2A Z² + (2A − 2B − α²) Z + α² − 2B > 0,
//! Z₁,₂ = 3A − B ∓ 2√(2A(A − B)).
//! ```
//!
//! With interior noise, `A = C − β`, `B = λ − θ` and
//!
//! ```text
//! (2A + α²) Z² + (2(A + B) − α²) Z + 2B > 0,
//! T₁,₂ = A + 3B ∓ 2√(2B(A + B)).
//! ```
//!
//! `C` is any valid trace constant for `θ`: the explicit `C_θ` or, in 1D, the
//! optimal `C*_θ`. All ranges are for `α²/2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DomainGeometry, IntensityInterval, ModelParams, NoisePlacement, TheoremCase};
use crate::trace::{dirichlet_bound, explicit_constant, optimal_constant_1d};

/// Tolerance used for optimal constants computed inside range sweeps.
const OPTIMAL_TOL: f64 = 1e-13;

/// Which trace constant feeds the range formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    ExplicitC,
    Optimal1D,
}

/// Evaluates the trace constant for `θ` from the requested source.
pub fn trace_constant(theta: f64, g: &DomainGeometry, source: ConstantSource) -> Result<f64> {
    match source {
        ConstantSource::ExplicitC => Ok(explicit_constant(theta, g)),
        ConstantSource::Optimal1D => {
            let l = g.interval_length().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "optimal trace constant is only available in 1D (d = {})",
                    g.dimension
                ))
            })?;
            optimal_constant_1d(theta, l, OPTIMAL_TOL)
        }
    }
}

/// Upper bound of the trace constant over all `θ`.
fn trace_constant_cap(g: &DomainGeometry, source: ConstantSource) -> f64 {
    match (source, g.interval_length()) {
        (ConstantSource::Optimal1D, Some(l)) => dirichlet_bound(l),
        _ => 0.25 * g.d_over_r().powi(2),
    }
}

/// The `(A, B)` pair of one range evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeInputs {
    pub a: f64,
    pub b: f64,
    pub constant_source: ConstantSource,
}

impl RangeInputs {
    pub fn boundary(p: &ModelParams, theta: f64, c: f64, source: ConstantSource) -> Self {
        Self {
            a: c - p.beta,
            b: theta - p.lambda,
            constant_source: source,
        }
    }

    pub fn interior(p: &ModelParams, theta: f64, c: f64, source: ConstantSource) -> Self {
        Self {
            a: c - p.beta,
            b: p.lambda - theta,
            constant_source: source,
        }
    }
}

/// `Z₁ ≤ Z₂` for boundary noise.
pub fn boundary_z(a: f64, b: f64) -> Result<(f64, f64)> {
    let disc = 2.0 * a * (a - b);
    if disc < 0.0 {
        return Err(Error::NegativeDiscriminant(disc));
    }
    let root = 2.0 * disc.sqrt();
    let mid = 3.0 * a - b;
    Ok((mid - root, mid + root))
}

/// `T₁ ≤ T₂` for interior noise.
pub fn interior_t(a: f64, b: f64) -> Result<(f64, f64)> {
    let disc = 2.0 * b * (a + b);
    if disc < 0.0 {
        return Err(Error::NegativeDiscriminant(disc));
    }
    let root = 2.0 * disc.sqrt();
    let mid = a + 3.0 * b;
    Ok((mid - root, mid + root))
}

/// Admissible `α²/2` range for boundary noise at a given `θ` and trace
/// constant `c`; `None` when neither hypothesis (`A > B > 0` or
/// `A > 0 ≥ B`) holds.
pub fn boundary_noise_range(
    p: &ModelParams,
    theta: f64,
    c: f64,
) -> Result<Option<IntensityInterval>> {
    let (a, b) = (c - p.beta, theta - p.lambda);
    if !(a > 0.0 && a > b) {
        return Ok(None);
    }
    let (z1, z2) = boundary_z(a, b)?;
    let interval = if a > 2.0 * b {
        IntensityInterval {
            lower: b.max(0.0),
            upper: z2,
            lower_closed: true,
            theorem_case: TheoremCase::BoundaryAGt2B,
            theta_used: theta,
        }
    } else {
        IntensityInterval {
            lower: z1,
            upper: z2,
            lower_closed: false,
            theorem_case: TheoremCase::Boundary2BGeA,
            theta_used: theta,
        }
    };
    Ok(Some(interval))
}

/// Admissible `α²/2` range for interior noise; `None` unless `B > 0` and
/// `A + B > 0`.
pub fn interior_noise_range(
    p: &ModelParams,
    theta: f64,
    c: f64,
) -> Result<Option<IntensityInterval>> {
    let (a, b) = (c - p.beta, p.lambda - theta);
    if !(b > 0.0 && a + b > 0.0) {
        return Ok(None);
    }
    let (t1, t2) = interior_t(a, b)?;
    let interval = if b > -2.0 * a {
        IntensityInterval {
            lower: (-a).max(0.0),
            upper: t2,
            lower_closed: true,
            theorem_case: TheoremCase::InteriorBGtMinus2A,
            theta_used: theta,
        }
    } else {
        IntensityInterval {
            lower: t1,
            upper: t2,
            lower_closed: false,
            theorem_case: TheoremCase::InteriorMinus2AGeB,
            theta_used: theta,
        }
    };
    Ok(Some(interval))
}

/// Persistence of stability under boundary noise (`θ = λ`, explicit
/// constant): `[0, (3 + 2√2)(C_λ − β))`.
pub fn boundary_persistence_range(
    p: &ModelParams,
    g: &DomainGeometry,
) -> Result<IntensityInterval> {
    let c = explicit_constant(p.lambda, g);
    if !(p.beta < c) {
        return Err(Error::HypothesisFailed(format!(
            "persistence needs beta < C_lambda (beta = {}, C_lambda = {c})",
            p.beta
        )));
    }
    let mut r =
        boundary_noise_range(p, p.lambda, c)?.expect("A > 0 = B satisfies the boundary hypotheses");
    r.theorem_case = TheoremCase::BoundaryPersistence;
    Ok(r)
}

/// An open interval of admissible `θ` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ThetaInterval {
    pub fn contains(&self, theta: f64) -> bool {
        theta > self.lo && theta < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// The `θ ∈ (0, d/2R]` satisfying `C_θ − β > θ − λ > 0` with the explicit
/// constant, i.e. `(λ, d/2R] ∩ ((d/R − 1 − √Ψ)/2, (d/R − 1 + √Ψ)/2)` with
/// `Ψ = (1 − d/R)² − 4(β − λ)`.
pub fn theta_feasible_interval_boundary(
    p: &ModelParams,
    g: &DomainGeometry,
) -> Option<ThetaInterval> {
    let k = g.d_over_r() - 1.0;
    let psi = k * k - 4.0 * (p.beta - p.lambda);
    if !(psi > 0.0) {
        return None;
    }
    let s = psi.sqrt();
    let lo = p.lambda.max(0.5 * (k - s));
    let hi = g.saturation_theta().min(0.5 * (k + s));
    (lo < hi).then_some(ThetaInterval { lo, hi })
}

/// The unique `θ̂ < λ` with `θ̂ + C_θ̂ = β + λ` (explicit constant); requires
/// `β < C_λ`.
pub fn theta_hat_persistence_interior(p: &ModelParams, g: &DomainGeometry) -> Result<f64> {
    let c_lambda = explicit_constant(p.lambda, g);
    if !(p.beta < c_lambda) {
        return Err(Error::HypothesisFailed(format!(
            "theta-hat needs beta < C_lambda (beta = {}, C_lambda = {c_lambda})",
            p.beta
        )));
    }
    let target = p.beta + p.lambda;
    let dr = g.d_over_r();
    let sat = g.saturation_theta();
    // θ² − (d/R + 1)θ + target = 0, smaller root in cancellation-free form.
    let disc = (dr + 1.0).powi(2) - 4.0 * target;
    if disc >= 0.0 {
        let root = 2.0 * target / ((dr + 1.0) + disc.sqrt());
        if root <= sat {
            return Ok(root);
        }
    }
    Ok(target - 0.25 * dr * dr)
}

/// Persistence of stability under interior noise:
/// `[0, 8(λ − θ̂))`.
pub fn interior_persistence_range(
    p: &ModelParams,
    g: &DomainGeometry,
) -> Result<IntensityInterval> {
    let theta_hat = theta_hat_persistence_interior(p, g)?;
    Ok(IntensityInterval {
        lower: 0.0,
        upper: 8.0 * (p.lambda - theta_hat),
        lower_closed: true,
        theorem_case: TheoremCase::InteriorPersistence,
        theta_used: theta_hat,
    })
}

/// Interior-noise stabilisation in the `θ → 0` limit, valid for `β < λ`:
/// `[β, T₂)` if `2β < λ`, else `(T₁, T₂)` with
/// `T₁,₂ = 3λ − β ∓ 2√(2λ(λ − β))`.
pub fn interior_small_theta_range(p: &ModelParams) -> Result<IntensityInterval> {
    if !(p.beta < p.lambda) {
        return Err(Error::HypothesisFailed(format!(
            "small-theta interior range needs beta < lambda (beta = {}, lambda = {})",
            p.beta, p.lambda
        )));
    }
    let (t1, t2) = interior_t(-p.beta, p.lambda)?;
    let closed = 2.0 * p.beta < p.lambda;
    Ok(IntensityInterval {
        lower: if closed { p.beta } else { t1 },
        upper: t2,
        lower_closed: closed,
        theorem_case: TheoremCase::InteriorSmallTheta,
        theta_used: 0.0,
    })
}

/// Result of the large-`β` interior-noise construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorLargeBeta {
    /// `θ` with `λ − θ > β − C_θ ≥ 0` and `θ ≤ d/2R`.
    pub theta_range: ThetaInterval,
    /// Range at the midpoint of `theta_range`.
    pub interval: IntensityInterval,
}

/// Interior-noise stabilisation for `max{λ, C_λ} < β ≤ (d/R − 1)²/4 + λ`
/// and `d > R`.
///
/// The admissible `θ` solve `θ < min{d/2R, λ}` together with
/// `θ² − (d/R − 1)θ + β − λ ≤ 0`.
pub fn interior_large_beta_range(p: &ModelParams, g: &DomainGeometry) -> Result<InteriorLargeBeta> {
    let c_lambda = explicit_constant(p.lambda, g);
    let k = g.d_over_r() - 1.0;
    if !(p.beta > p.lambda.max(c_lambda)) {
        return Err(Error::HypothesisFailed(format!(
            "needs beta > max(lambda, C_lambda) = {}",
            p.lambda.max(c_lambda)
        )));
    }
    if !(k > 0.0) {
        return Err(Error::HypothesisFailed(format!(
            "needs d > R (d/R = {})",
            g.d_over_r()
        )));
    }
    let phi = k * k - 4.0 * (p.beta - p.lambda);
    if phi < 0.0 {
        return Err(Error::HypothesisFailed(format!(
            "needs beta <= (d/R - 1)^2/4 + lambda = {}",
            0.25 * k * k + p.lambda
        )));
    }
    let s = phi.sqrt();
    let lo = (0.5 * (k - s)).max(0.0);
    let hi = g.saturation_theta().min(p.lambda).min(0.5 * (k + s));
    if !(lo < hi) {
        return Err(Error::EmptyFeasibleSet(format!(
            "theta window [{lo}, {hi}) is empty"
        )));
    }
    let theta_range = ThetaInterval { lo, hi };
    let theta = theta_range.midpoint();
    let mut interval = interior_noise_range(p, theta, explicit_constant(theta, g))?
        .ok_or_else(|| Error::HypothesisFailed(format!("no interior range at theta = {theta}")))?;
    interval.theorem_case = TheoremCase::InteriorLargeBeta;
    Ok(InteriorLargeBeta {
        theta_range,
        interval,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

/// Stability of the zero state without noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterministicVerdict {
    pub verdict: Verdict,
    /// `C_λ` or `C*_λ`, depending on the source.
    pub threshold_constant: f64,
    pub constant_source: ConstantSource,
    /// Best `δ = min{ε, C_{λ−ε} − β}` found on the ε-grid (stable case).
    pub delta: Option<f64>,
    /// `2δ`, the guaranteed decay rate of `‖U(t)‖²_H`.
    pub decay_rate: Option<f64>,
}

/// Number of ε samples used to maximise `δ`.
pub const EPSILON_GRID: usize = 1000;

pub fn deterministic_verdict(
    p: &ModelParams,
    g: &DomainGeometry,
    source: ConstantSource,
) -> Result<DeterministicVerdict> {
    let c = trace_constant(p.lambda, g, source)?;
    let (verdict, delta) = if c > p.beta {
        let deltas: Vec<f64> = (1..=EPSILON_GRID)
            .into_par_iter()
            .map(|i| {
                let eps = p.lambda * i as f64 / (EPSILON_GRID + 1) as f64;
                trace_constant(p.lambda - eps, g, source).map(|ce| eps.min(ce - p.beta))
            })
            .collect::<Result<_>>()?;
        let best = deltas.into_iter().fold(f64::NEG_INFINITY, f64::max);
        (Verdict::Stable, (best > 0.0).then_some(best))
    } else if c < p.beta && source == ConstantSource::Optimal1D {
        (Verdict::Unstable, None)
    } else {
        (Verdict::Inconclusive, None)
    };
    Ok(DeterministicVerdict {
        verdict,
        threshold_constant: c,
        constant_source: source,
        delta,
        decay_rate: delta.map(|d| 2.0 * d),
    })
}

/// Outcome of sweeping `θ` over its feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSweep {
    pub placement: NoisePlacement,
    pub constant_source: ConstantSource,
    pub feasible: ThetaInterval,
    /// Per-`θ` intervals in ascending `θ`.
    pub per_theta: Vec<IntensityInterval>,
    /// Union of the per-`θ` intervals as disjoint `(lower, upper)` pieces.
    pub union: Vec<(f64, f64)>,
    /// `(inf lower, sup upper)`.
    pub envelope: (f64, f64),
    pub connected: bool,
}

/// Golden-section maximiser of a concave function on `[lo, hi]`.
fn maximise_concave(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisects a predicate that flips exactly once on `[lo, hi]`; returns the
/// switching point.
fn bisect_predicate(pred: impl Fn(f64) -> Result<bool>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let at_lo = pred(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The open set of `θ > 0` satisfying the general range hypotheses for the
/// given placement. `C_θ − θ` is concave and `C_θ` non-decreasing for both
/// sources, so the set is an interval.
pub fn theta_feasible_set(
    p: &ModelParams,
    g: &DomainGeometry,
    placement: NoisePlacement,
    source: ConstantSource,
) -> Result<ThetaInterval> {
    let c = |t: f64| trace_constant(t, g, source);
    let target = p.beta - p.lambda;
    let cap = trace_constant_cap(g, source);
    let (search_hi, label) = match placement {
        NoisePlacement::Boundary => (p.lambda + (cap - p.beta).max(0.0), "boundary"),
        NoisePlacement::Interior => (p.lambda, "interior"),
        NoisePlacement::None => {
            return Err(Error::InvalidArgument(
                "theta sweep needs a noise placement".into(),
            ))
        }
    };
    if !(search_hi > 0.0) {
        return Err(Error::EmptyFeasibleSet(format!(
            "{label} noise: C_theta never exceeds beta = {}",
            p.beta
        )));
    }
    let excess = |t: f64| c(t).map(|ct| ct - t - target);
    let t_star = maximise_concave(excess, 0.0, search_hi)?;
    if !(excess(t_star)? > 0.0) {
        let reason = match placement {
            NoisePlacement::Interior => format!(
                "interior noise needs lambda - theta > beta - C_theta for some theta < lambda; \
                 max of C_theta - theta is {:.6} <= beta - lambda = {target:.6}",
                excess(t_star)? + target
            ),
            _ => format!(
                "boundary noise needs C_theta - beta > theta - lambda; max of C_theta - theta \
                 is {:.6} <= beta - lambda = {target:.6}",
                excess(t_star)? + target
            ),
        };
        return Err(Error::EmptyFeasibleSet(reason));
    }
    let mut lo = if excess(0.0)? > 0.0 {
        0.0
    } else {
        bisect_predicate(|t| excess(t).map(|e| e > 0.0), 0.0, t_star)?
    };
    let mut hi = if excess(search_hi)? > 0.0 {
        search_hi
    } else {
        bisect_predicate(|t| excess(t).map(|e| e > 0.0), t_star, search_hi)?
    };
    if placement == NoisePlacement::Boundary {
        // Also need A = C_θ − β > 0.
        if !(c(hi)? > p.beta) {
            return Err(Error::EmptyFeasibleSet(format!(
                "boundary noise needs C_theta > beta = {} on the admissible theta window",
                p.beta
            )));
        }
        if !(c(lo)? > p.beta) {
            lo = bisect_predicate(|t| c(t).map(|ct| ct > p.beta), lo, hi)?;
        }
    } else {
        hi = hi.min(p.lambda);
    }
    if !(lo < hi) {
        return Err(Error::EmptyFeasibleSet(format!(
            "{label} noise: theta window ({lo}, {hi}) is empty"
        )));
    }
    Ok(ThetaInterval { lo, hi })
}

/// Sweeps `n_theta` evenly spaced `θ` (cell midpoints) across the feasible
/// set, merges the per-`θ` ranges and reports their envelope.
pub fn optimize_range_over_theta(
    p: &ModelParams,
    g: &DomainGeometry,
    placement: NoisePlacement,
    source: ConstantSource,
    n_theta: usize,
) -> Result<ThetaSweep> {
    if n_theta == 0 {
        return Err(Error::InvalidArgument("n_theta must be at least 1".into()));
    }
    let feasible = theta_feasible_set(p, g, placement, source)?;
    let width = feasible.hi - feasible.lo;
    let per_theta: Vec<Option<IntensityInterval>> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = feasible.lo + (i as f64 + 0.5) * width / n_theta as f64;
            let c = trace_constant(theta, g, source)?;
            match placement {
                NoisePlacement::Boundary => boundary_noise_range(p, theta, c),
                _ => interior_noise_range(p, theta, c),
            }
        })
        .collect::<Result<_>>()?;
    let per_theta: Vec<IntensityInterval> = per_theta.into_iter().flatten().collect();
    if per_theta.is_empty() {
        return Err(Error::EmptyFeasibleSet(
            "no sampled theta produced an admissible range".into(),
        ));
    }
    let union = merge_intervals(&per_theta);
    let envelope = (
        per_theta
            .iter()
            .map(|r| r.lower)
            .fold(f64::INFINITY, f64::min),
        per_theta
            .iter()
            .map(|r| r.upper)
            .fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(ThetaSweep {
        placement,
        constant_source: source,
        feasible,
        connected: union.len() == 1,
        per_theta,
        union,
        envelope,
    })
}

/// Union of intervals as sorted disjoint pieces. Pieces that touch are
/// merged.
pub fn merge_intervals(intervals: &[IntensityInterval]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = intervals.iter().map(|r| (r.lower, r.upper)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in sorted {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Which scalar quadratic the positivity oracle checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleConvention {
    /// `2A Z² + (2A − 2B − α²) Z + α² − 2B`.
    Boundary,
    /// `(2A + α²) Z² + (2(A + B) − α²) Z + 2B`.
    Interior,
}

/// Smallest `Z` sampled by the oracle, relative to `z_max`.
const ORACLE_DECADES: f64 = 12.0;

/// Brute-force check that the stability quadratic is strictly positive for
/// all sampled `Z ∈ (0, z_max]`: a log-spaced grid of `n_z` points plus a
/// golden-section refinement around the smallest sample.
pub fn quadratic_positivity_oracle(
    a: f64,
    b: f64,
    half_alpha_sq: f64,
    convention: OracleConvention,
    z_max: f64,
    n_z: usize,
) -> bool {
    let alpha_sq = 2.0 * half_alpha_sq;
    let q = |z: f64| match convention {
        OracleConvention::Boundary => {
            2.0 * a * z * z + (2.0 * a - 2.0 * b - alpha_sq) * z + alpha_sq - 2.0 * b
        }
        OracleConvention::Interior => {
            (2.0 * a + alpha_sq) * z * z + (2.0 * (a + b) - alpha_sq) * z + 2.0 * b
        }
    };
    let n = n_z.max(2);
    let log_hi = z_max.ln();
    let log_lo = log_hi - ORACLE_DECADES * std::f64::consts::LN_10;
    let step = (log_hi - log_lo) / (n - 1) as f64;
    let mut min_i = 0;
    let mut min_v = f64::INFINITY;
    for i in 0..n {
        let v = q((log_lo + i as f64 * step).exp());
        if !(v > 0.0) {
            return false;
        }
        if v < min_v {
            min_v = v;
            min_i = i;
        }
    }
    // Narrow dips can fall between samples; search the neighbouring cells.
    let lo = log_lo + min_i.saturating_sub(1) as f64 * step;
    let hi = log_lo + (min_i + 1).min(n - 1) as f64 * step;
    let z_min = maximise_concave(|s| Ok(-q(s.exp())), lo, hi).expect("infallible objective");
    q(z_min.exp()) > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DomainGeometry {
        DomainGeometry::new(1, 0.5)
    }

    fn sec5() -> ModelParams {
        ModelParams::new(0.02, 0.001, 0.0, NoisePlacement::Boundary)
    }

    #[test]
    fn boundary_range_two_sided_case() {
        let r = boundary_noise_range(&sec5(), 0.5, 0.75).unwrap().unwrap();
        assert_eq!(r.theorem_case, TheoremCase::Boundary2BGeA);
        assert!(!r.lower_closed);
        // Z₁,₂ = 1.691 ∓ 2√(1.46 · 0.231)
        let root = 2.0 * (1.46f64 * 0.231).sqrt();
        assert!((r.lower - (1.691 - root)).abs() < 1e-12);
        assert!((r.upper - (1.691 + root)).abs() < 1e-12);
        assert!((r.lower - 0.5295).abs() < 1e-4 && (r.upper - 2.8525).abs() < 1e-4);
    }

    #[test]
    fn boundary_range_at_theta_equal_lambda() {
        let p = ModelParams::new(0.3, 0.4, 0.0, NoisePlacement::Boundary);
        let c = 0.9;
        let r = boundary_noise_range(&p, p.lambda, c).unwrap().unwrap();
        assert_eq!(r.theorem_case, TheoremCase::BoundaryAGt2B);
        assert_eq!(r.lower, 0.0);
        assert!((r.upper - (3.0 + 2.0 * 2f64.sqrt()) * (c - p.beta)).abs() < 1e-12);
    }

    #[test]
    fn boundary_range_absent_without_hypotheses() {
        assert!(boundary_noise_range(&sec5(), 0.5, 0.02).unwrap().is_none());
        assert!(boundary_noise_range(&sec5(), 0.5, 0.01).unwrap().is_none());
        // A > 0 but A ≤ B.
        assert!(boundary_noise_range(&sec5(), 0.9, 0.5).unwrap().is_none());
    }

    #[test]
    fn negative_discriminant_is_reported() {
        assert!(matches!(
            boundary_z(1.0, 2.0),
            Err(Error::NegativeDiscriminant(_))
        ));
        assert!(matches!(
            interior_t(-2.0, 1.0),
            Err(Error::NegativeDiscriminant(_))
        ));
    }

    #[test]
    fn interior_range_small_theta_limit() {
        let p = ModelParams::new(0.4, 1.0, 0.0, NoisePlacement::Interior);
        let r = interior_noise_range(&p, 0.0, 0.0).unwrap().unwrap();
        assert!(r.lower_closed);
        assert!((r.lower - 0.4).abs() < 1e-15);
        assert!((r.upper - (2.6 + 2.0 * 1.2f64.sqrt())).abs() < 1e-12);
        let b = interior_small_theta_range(&p).unwrap();
        assert_eq!(b.theorem_case, TheoremCase::InteriorSmallTheta);
        assert!((b.upper - r.upper).abs() < 1e-15 && b.lower == r.lower);
    }

    #[test]
    fn interior_range_absent_at_theta_equal_lambda() {
        let p = ModelParams::new(0.1, 0.5, 0.0, NoisePlacement::Interior);
        assert!(interior_noise_range(&p, 0.5, 0.9).unwrap().is_none());
        let r = interior_noise_range(&p, 0.2, 0.3).unwrap().unwrap();
        assert_eq!(r.lower, 0.0);
    }

    #[test]
    fn theta_feasible_interval_section5() {
        let t = theta_feasible_interval_boundary(&sec5(), &unit()).unwrap();
        let r = (1.0f64 - 0.076).sqrt();
        assert!((t.lo - 0.5 * (1.0 - r)).abs() < 1e-14);
        assert!((t.hi - 0.5 * (1.0 + r)).abs() < 1e-14);
        assert!((t.lo - 0.0194).abs() < 1e-3 && (t.hi - 0.9806).abs() < 1e-3);
    }

    #[test]
    fn theta_feasible_interval_degenerate_cases() {
        // Ψ = 0: β = (d/R − 1)²/4 + λ.
        let p = ModelParams::new(0.375, 0.125, 0.0, NoisePlacement::Boundary);
        assert!(theta_feasible_interval_boundary(&p, &unit()).is_none());
        // λ ≥ (d/R − 1)/2 with β ≥ C_λ.
        let p = ModelParams::new(0.9, 0.6, 0.0, NoisePlacement::Boundary);
        assert!(p.beta >= explicit_constant(p.lambda, &unit()));
        assert!(theta_feasible_interval_boundary(&p, &unit()).is_none());
    }

    #[test]
    fn theta_hat_examples() {
        let p = ModelParams::new(0.2, 0.5, 0.0, NoisePlacement::Interior);
        let th = theta_hat_persistence_interior(&p, &unit()).unwrap();
        assert!((th - 0.5 * (3.0 - 6.2f64.sqrt())).abs() < 1e-14);
        assert!((th + explicit_constant(th, &unit()) - 0.7).abs() < 1e-12);
        let r = interior_persistence_range(&p, &unit()).unwrap();
        assert!((r.upper - 8.0 * (0.5 - th)).abs() < 1e-14);
        assert!((r.upper - 1.9599).abs() < 1e-4);

        let p = ModelParams::new(0.3, 0.5, 0.0, NoisePlacement::Interior);
        let th = theta_hat_persistence_interior(&p, &unit()).unwrap();
        assert!((th - 0.5 * (3.0 - 5.8f64.sqrt())).abs() < 1e-14);
        assert!((th - 0.29584).abs() < 1e-5);
        assert!((th + explicit_constant(th, &unit()) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn theta_hat_limit_and_failure() {
        let c_lambda = explicit_constant(0.5, &unit());
        let p = ModelParams::new(c_lambda - 1e-9, 0.5, 0.0, NoisePlacement::Interior);
        let th = theta_hat_persistence_interior(&p, &unit()).unwrap();
        assert!((0.5 - th).abs() < 1e-6);
        let p = ModelParams::new(c_lambda, 0.5, 0.0, NoisePlacement::Interior);
        assert!(matches!(
            theta_hat_persistence_interior(&p, &unit()),
            Err(Error::HypothesisFailed(_))
        ));
    }

    #[test]
    fn theta_hat_closes_interior_range() {
        for &(beta, lambda) in &[(0.2, 0.5), (0.05, 0.3), (0.6, 0.9), (0.95, 1.5)] {
            let p = ModelParams::new(beta, lambda, 0.0, NoisePlacement::Interior);
            let Ok(th) = theta_hat_persistence_interior(&p, &unit()) else {
                continue;
            };
            let r = interior_noise_range(&p, th, explicit_constant(th, &unit()))
                .unwrap()
                .unwrap();
            assert!(r.lower.abs() < 1e-10);
            let expect = 8.0 * (lambda - th);
            assert!(((r.upper - expect) / expect).abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_case_continuity() {
        // A = 2B exactly: the two branches meet at Z₁ = B.
        let b = 0.3;
        let (z1, _) = boundary_z(2.0 * b, b).unwrap();
        assert!((z1 - b).abs() < 1e-14);
    }

    #[test]
    fn verdict_examples() {
        let p = ModelParams::deterministic(0.5, 1.0);
        let v = deterministic_verdict(&p, &unit(), ConstantSource::ExplicitC).unwrap();
        assert_eq!(v.verdict, Verdict::Stable);
        assert_eq!(v.threshold_constant, 1.0);
        // max_ε min{ε, 0.5 − ε²} at ε = (√3 − 1)/2.
        let exact = 0.5 * (3f64.sqrt() - 1.0);
        assert!((v.delta.unwrap() - exact).abs() < 1e-3);
        assert!(v.delta.unwrap() <= exact);

        let v = deterministic_verdict(&sec5(), &unit(), ConstantSource::Optimal1D).unwrap();
        assert_eq!(v.verdict, Verdict::Unstable);
        assert!(v.threshold_constant < 0.02);

        let c = explicit_constant(0.3, &unit());
        let p = ModelParams::deterministic(c, 0.3);
        let v = deterministic_verdict(&p, &unit(), ConstantSource::ExplicitC).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn optimal_source_never_less_stable_than_explicit() {
        for i in 1..20 {
            for j in 1..20 {
                let p = ModelParams::deterministic(0.1 * i as f64, 0.1 * j as f64);
                let e = deterministic_verdict(&p, &unit(), ConstantSource::ExplicitC).unwrap();
                let o = deterministic_verdict(&p, &unit(), ConstantSource::Optimal1D).unwrap();
                assert!(o.threshold_constant >= e.threshold_constant - 1e-12);
                if e.verdict == Verdict::Stable {
                    assert_eq!(o.verdict, Verdict::Stable);
                }
                if o.verdict == Verdict::Unstable {
                    assert_ne!(e.verdict, Verdict::Stable);
                }
            }
        }
    }

    #[test]
    fn sweep_reproduces_section5_envelope() {
        let s = optimize_range_over_theta(
            &sec5(),
            &unit(),
            NoisePlacement::Boundary,
            ConstantSource::ExplicitC,
            2000,
        )
        .unwrap();
        assert!((s.feasible.lo - 0.0194).abs() < 1e-3);
        assert!((s.envelope.0 - 0.0278).abs() < 1e-3, "{:?}", s.envelope);
        assert!((s.envelope.1 - 3.137).abs() < 1e-2, "{:?}", s.envelope);
        assert!(s.connected);
    }

    #[test]
    fn sweep_with_one_theta_returns_that_interval() {
        let s = optimize_range_over_theta(
            &sec5(),
            &unit(),
            NoisePlacement::Boundary,
            ConstantSource::ExplicitC,
            1,
        )
        .unwrap();
        let theta = s.per_theta[0].theta_used;
        assert!((theta - s.feasible.midpoint()).abs() < 1e-15);
        let direct = boundary_noise_range(&sec5(), theta, explicit_constant(theta, &unit()))
            .unwrap()
            .unwrap();
        assert_eq!(s.per_theta, vec![direct]);
        assert_eq!(s.envelope, (direct.lower, direct.upper));
    }

    #[test]
    fn interior_sweep_reports_failed_hypotheses_for_section5() {
        let err = optimize_range_over_theta(
            &sec5(),
            &unit(),
            NoisePlacement::Interior,
            ConstantSource::ExplicitC,
            100,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyFeasibleSet(_)));
        let p = ModelParams::new(0.02, 0.001, 0.0, NoisePlacement::Interior);
        assert!(interior_small_theta_range(&p).is_err());
    }

    #[test]
    fn optimal_sweep_is_wider_than_explicit() {
        let e = optimize_range_over_theta(
            &sec5(),
            &unit(),
            NoisePlacement::Boundary,
            ConstantSource::ExplicitC,
            200,
        )
        .unwrap();
        let o = optimize_range_over_theta(
            &sec5(),
            &unit(),
            NoisePlacement::Boundary,
            ConstantSource::Optimal1D,
            200,
        )
        .unwrap();
        assert!(o.feasible.lo <= e.feasible.lo + 1e-9);
        assert!(o.feasible.hi >= e.feasible.hi - 1e-9);
        assert!(o.envelope.1 >= e.envelope.1);
    }

    #[test]
    fn large_beta_interior_construction() {
        // d/R = 2, λ = 0.6 > (d/R − 1)/2; need C_λ = 0.84 < β ≤ 0.85.
        let p = ModelParams::new(0.845, 0.6, 0.0, NoisePlacement::Interior);
        let r = interior_large_beta_range(&p, &unit()).unwrap();
        assert_eq!(r.interval.theorem_case, TheoremCase::InteriorLargeBeta);
        let th = r.interval.theta_used;
        let a = explicit_constant(th, &unit()) - p.beta;
        let b = p.lambda - th;
        assert!(b > -a && -a >= 0.0);
        assert!(matches!(
            interior_large_beta_range(
                &ModelParams::new(0.1, 0.3, 0.0, NoisePlacement::Interior),
                &unit()
            ),
            Err(Error::HypothesisFailed(_))
        ));
    }

    #[test]
    fn large_beta_interior_window_empty_for_small_lambda() {
        // λ ≤ (d/R − 1)/2 together with β > C_λ pushes the lower θ bound
        // above λ.
        let g = DomainGeometry::new(2, 0.5);
        let p = ModelParams::new(1.2, 0.3, 0.0, NoisePlacement::Interior);
        assert!(p.beta > explicit_constant(p.lambda, &g));
        assert!(matches!(
            interior_large_beta_range(&p, &g),
            Err(Error::EmptyFeasibleSet(_))
        ));
    }

    #[test]
    fn oracle_examples() {
        let (a, b) = (0.73, 0.499);
        assert!(quadratic_positivity_oracle(
            a,
            b,
            1.5,
            OracleConvention::Boundary,
            1e3,
            10_000
        ));
        let (_, z2) = boundary_z(a, b).unwrap();
        assert!(!quadratic_positivity_oracle(
            a,
            b,
            z2 + 0.1,
            OracleConvention::Boundary,
            1e3,
            10_000
        ));
        assert!(quadratic_positivity_oracle(
            1.0,
            0.0,
            0.0,
            OracleConvention::Boundary,
            1e3,
            10_000
        ));
    }
}
