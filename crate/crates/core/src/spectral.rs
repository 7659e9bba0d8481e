//! Linear analysis on `(0, 1)`.
//!
//! Shifting `û = e^{−βt} u` turns the linearised problem into the heat
//! equation with dynamical Robin coefficient `b = β + λ`. Separated solutions
//! are `e^{−μ²t} φ(x)` with
//!
//! ```text
//! φ(x) = cos(μx) + ((b − μ²)/μ) sin(μx)
//! g(μ) = (μ⁴ − (2b + 1)μ² + b²) sin μ − (2μ³ − 2bμ) cos μ = 0.
//! ```
//!
//! Roots with `cos μ = 0` are zeros of `g` as well; they are tagged
//! [`Branch::CosZero`]. The zero state of the linearised equation is unstable
//! iff `β > μ₁²`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{trapezoid_product, HState, ModelParams};
use crate::roots::{bisect, scan_sign_changes};

/// Default number of modes kept in series evaluations.
pub const DEFAULT_MODES: usize = 64;

const SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Tan,
    CosZero,
}

/// A positive root of the characteristic equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuRoot {
    pub mu: f64,
    pub branch: Branch,
    /// `|g(μ)|` at the returned root.
    pub residual: f64,
}

/// One separated mode of the linearised problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMode {
    pub index: usize,
    pub mu: f64,
    /// `β − μ²`.
    pub growth_rate: f64,
    pub coeff_cos: f64,
    /// `(β + λ − μ²)/μ`.
    pub coeff_sin: f64,
    pub branch: Branch,
}

impl SpectralMode {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeff_cos * (self.mu * x).cos() + self.coeff_sin * (self.mu * x).sin()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.mu * (-self.coeff_cos * (self.mu * x).sin() + self.coeff_sin * (self.mu * x).cos())
    }

    /// The mode sampled on `n_nodes` points of `[0, 1]` as an H-state.
    pub fn to_state(&self, n_nodes: usize) -> Result<HState> {
        HState::from_fn(n_nodes, 1.0, |x| self.eval(x))
    }

    /// Residuals of the two dynamical boundary conditions of the shifted
    /// problem, `(b − μ²) φ(0) − φ'(0)` and `(b − μ²) φ(1) + φ'(1)`.
    pub fn boundary_residuals(&self, b: f64) -> (f64, f64) {
        let k = b - self.mu * self.mu;
        (
            k * self.eval(0.0) - self.derivative(0.0),
            k * self.eval(1.0) + self.derivative(1.0),
        )
    }
}

/// Pole-free characteristic function `g(μ)`.
pub fn characteristic_residual(mu: f64, b: f64) -> f64 {
    let mu2 = mu * mu;
    (mu2 * mu2 - (2.0 * b + 1.0) * mu2 + b * b) * mu.sin()
        - (2.0 * mu2 * mu - 2.0 * b * mu) * mu.cos()
}

/// `g(μ)/μ`, equal to `b² + 2b > 0` at `μ = 0`.
fn scaled_characteristic(mu: f64, b: f64) -> f64 {
    let mu2 = mu * mu;
    let sinc = if mu.abs() < 1e-8 {
        1.0 - mu2 / 6.0
    } else {
        mu.sin() / mu
    };
    (mu2 * mu2 - (2.0 * b + 1.0) * mu2 + b * b) * sinc - (2.0 * mu2 - 2.0 * b) * mu.cos()
}

/// Candidate roots with `cos μ = 0`: `μ = ∓½ + √(¼ + b)` when they land on
/// `π/2 + kπ`.
fn cos_zero_candidates(b: f64, tol: f64) -> Vec<f64> {
    let s = (0.25 + b).sqrt();
    [s - 0.5, s + 0.5]
        .into_iter()
        .filter(|&mu| {
            mu > 0.0 && {
                let k = ((mu - 0.5 * PI) / PI).round();
                k >= 0.0 && (mu - (0.5 * PI + k * PI)).abs() <= tol.max(1e-12)
            }
        })
        .collect()
}

/// First `n_roots` positive roots of `g` in ascending order.
pub fn mu_roots(b: f64, n_roots: usize, tol: f64) -> Result<Vec<MuRoot>> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "b must be positive (got {b})"
        )));
    }
    if n_roots == 0 {
        return Err(Error::InvalidArgument("n_roots must be at least 1".into()));
    }
    let f = |mu: f64| scaled_characteristic(mu, b);
    // μ₁ ≈ √(2b/3) for small b, so refine the scan near zero.
    let fine_step = SCAN_STEP.min(0.02 * b.sqrt());
    let fine_end = 1.0f64.min(20.0 * b.sqrt()).max(fine_step);
    let cap = 10.0 * (n_roots as f64 * PI + b.sqrt() + 10.0);
    let mut window = n_roots as f64 * PI + 2.0 * b.sqrt() + 2.0;

    let mut brackets = scan_sign_changes(f, 0.0, fine_end, fine_step, n_roots);
    let mut scanned_to = fine_end;
    while brackets.len() < n_roots {
        let end = window.min(cap);
        brackets.extend(scan_sign_changes(
            f,
            scanned_to,
            end,
            SCAN_STEP,
            n_roots - brackets.len(),
        ));
        scanned_to = end;
        if brackets.len() >= n_roots || end >= cap {
            break;
        }
        window *= 2.0;
    }
    // A zero landing exactly on the boundary between scans is reported twice.
    brackets.dedup_by(|a, b| a.0 == a.1 && b.0 == b.1 && a.0 == b.0);

    let mut roots: Vec<f64> = brackets
        .iter()
        .map(|&(lo, hi)| {
            if lo == hi {
                Ok(lo)
            } else {
                bisect(f, lo, hi, 0.0)
            }
        })
        .collect::<Result<_>>()?;
    for c in cos_zero_candidates(b, tol) {
        if c <= scanned_to && !roots.iter().any(|r| (r - c).abs() < 1e-9) {
            roots.push(c);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.truncate(n_roots);
    if roots.len() < n_roots {
        return Err(Error::RootCountShortfall {
            wanted: n_roots,
            found: roots.len(),
            window: scanned_to,
        });
    }
    Ok(roots
        .into_iter()
        .map(|mu| MuRoot {
            mu,
            branch: if mu.cos().abs() < 1e-9 {
                Branch::CosZero
            } else {
                Branch::Tan
            },
            residual: characteristic_residual(mu, b).abs(),
        })
        .collect())
}

/// Modes `φ_n` for the parameters `p` (`b = β + λ`).
pub fn spectral_modes(p: &ModelParams, n_modes: usize, tol: f64) -> Result<Vec<SpectralMode>> {
    let b = p.b();
    Ok(mu_roots(b, n_modes, tol)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| SpectralMode {
            index: i + 1,
            mu: r.mu,
            growth_rate: p.beta - r.mu * r.mu,
            coeff_cos: 1.0,
            coeff_sin: (b - r.mu * r.mu) / r.mu,
            branch: r.branch,
        })
        .collect())
}

/// Small-`b` expansion `μ₁² ≈ (2/3)b − b²/27` in its published form. The
/// second-order coefficient is not exact; see [`mu1_squared_expansion`].
pub fn mu1_squared_asymptotic(b: f64) -> f64 {
    2.0 * b / 3.0 - b * b / 27.0
}

/// Two-term expansion `μ₁² = (2/3)b − b²/81 + O(b³)` obtained by expanding
/// `tan μ` to fifth order.
pub fn mu1_squared_expansion(b: f64) -> f64 {
    2.0 * b / 3.0 - b * b / 81.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstabilityReport {
    pub unstable: bool,
    pub mu1_sq: f64,
    /// `β − μ₁²`.
    pub margin: f64,
}

/// `β > μ₁²(β + λ)`.
pub fn instability_predicate(p: &ModelParams) -> Result<InstabilityReport> {
    let mu1 = mu_roots(p.b(), 1, 1e-14)?[0].mu;
    let mu1_sq = mu1 * mu1;
    Ok(InstabilityReport {
        unstable: p.beta > mu1_sq,
        mu1_sq,
        margin: p.beta - mu1_sq,
    })
}

/// Mismatch `(b + k + √k)² e^{√k} − (b + k − √k)² e^{−√k}` of the growing
/// separated ansatz `e^{kt}`, `k > 0`. It is strictly positive, so no such
/// mode exists.
pub fn growing_mode_mismatch(k: f64, b: f64) -> f64 {
    let s = k.sqrt();
    (b + k + s).powi(2) * s.exp() - (b + k - s).powi(2) * (-s).exp()
}

/// Truncated eigen-expansion of the linearised solution for given initial
/// data, with coefficients `<U₀, Φ_n>_H / ‖Φ_n‖²_H` computed by trapezoid
/// quadrature on the initial-data grid plus the two boundary masses.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    beta: f64,
    modes: Vec<SpectralMode>,
    coefficients: Vec<f64>,
}

impl SeriesSolution {
    pub fn new(u0: &HState, modes: &[SpectralMode], p: &ModelParams) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument(
                "series needs at least one mode".into(),
            ));
        }
        if (u0.length() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "series solution is defined on (0, 1) (got L = {})",
                u0.length()
            )));
        }
        let h = u0.spacing();
        let n = u0.len();
        let v = u0.values();
        let coefficients = modes
            .iter()
            .map(|m| {
                let phi: Vec<f64> = (0..n).map(|i| m.eval(i as f64 * h)).collect();
                let pair = trapezoid_product(v, &phi, h) + v[0] * phi[0] + v[n - 1] * phi[n - 1];
                let norm = trapezoid_product(&phi, &phi, h) + phi[0].powi(2) + phi[n - 1].powi(2);
                pair / norm
            })
            .collect();
        Ok(Self {
            beta: p.beta,
            modes: modes.to_vec(),
            coefficients,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.modes
            .iter()
            .zip(&self.coefficients)
            .map(|(m, c)| c * ((self.beta - m.mu * m.mu) * t).exp() * m.eval(x))
            .sum()
    }

    pub fn state(&self, n_nodes: usize, t: f64) -> Result<HState> {
        HState::from_fn(n_nodes, 1.0, |x| self.eval(x, t))
    }
}

/// Evaluates the truncated series at `(x, t)`.
pub fn series_solution(
    u0: &HState,
    modes: &[SpectralMode],
    p: &ModelParams,
    x: f64,
    t: f64,
) -> Result<f64> {
    Ok(SeriesSolution::new(u0, modes, p)?.eval(x, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{h_inner, NoisePlacement};

    fn unstable_params() -> ModelParams {
        ModelParams::new(0.02, 0.001, 0.0, NoisePlacement::Boundary)
    }

    #[test]
    fn first_root_for_section5() {
        let r = mu_roots(0.021, 1, 1e-14).unwrap();
        assert!((r[0].mu - 0.1182986).abs() < 1e-7, "{}", r[0].mu);
        let mu_sq = r[0].mu * r[0].mu;
        assert!((mu_sq - 0.0139946).abs() < 1e-7);
        // Published expansion is off by (2/81)b² here.
        assert!((mu_sq - mu1_squared_asymptotic(0.021)).abs() < 1.2e-5);
        assert!((mu_sq - mu1_squared_expansion(0.021)).abs() < 1e-8);
        assert!(r[0].residual < 1e-14);
        assert_eq!(r[0].branch, Branch::Tan);
    }

    #[test]
    fn residual_near_and_away_from_root() {
        assert!(characteristic_residual(0.118, 0.021).abs() < 1e-4);
        let g = characteristic_residual(PI / 4.0, 0.021);
        assert!(g.abs() > 1e-2);
        // Between μ₁ and μ₂ the sign is the opposite of the sign at 0⁺.
        assert!(g < 0.0);
    }

    #[test]
    fn roots_are_increasing_with_spacing_tending_to_pi() {
        let r = mu_roots(0.021, 40, 1e-12).unwrap();
        for w in r.windows(2) {
            assert!(w[1].mu > w[0].mu);
        }
        let last_gap = r[39].mu - r[38].mu;
        assert!((last_gap - PI).abs() < 1e-2, "{last_gap}");
    }

    #[test]
    fn cos_zero_branch_detected_when_degenerate() {
        let b = -0.25 + (0.5 + PI / 2.0).powi(2);
        let r = mu_roots(b, 4, 1e-12).unwrap();
        let hit = r
            .iter()
            .find(|m| m.branch == Branch::CosZero)
            .expect("cos-zero root");
        assert!((hit.mu - PI / 2.0).abs() < 1e-9);
        // Generic b: no such root.
        assert!(mu_roots(0.021, 10, 1e-12)
            .unwrap()
            .iter()
            .all(|m| m.branch == Branch::Tan));
    }

    #[test]
    fn modes_satisfy_dynamical_boundary_conditions() {
        let p = unstable_params();
        for m in spectral_modes(&p, 20, 1e-14).unwrap() {
            let (l, r) = m.boundary_residuals(p.b());
            let scale = 1.0 + m.mu * m.mu * (1.0 + m.coeff_sin.abs());
            assert!(
                l.abs() < 1e-8 * scale && r.abs() < 1e-8 * scale,
                "mode {}: {l} {r}",
                m.index
            );
        }
    }

    #[test]
    fn modes_are_h_orthogonal() {
        let p = unstable_params();
        let modes = spectral_modes(&p, 6, 1e-14).unwrap();
        let states: Vec<HState> = modes.iter().map(|m| m.to_state(20001).unwrap()).collect();
        for i in 0..6 {
            for j in 0..i {
                let ip = h_inner(&states[i], &states[j]).unwrap();
                let n = (states[i].h_norm_sq() * states[j].h_norm_sq()).sqrt();
                assert!((ip / n).abs() < 1e-6, "<{i},{j}> = {ip}");
            }
        }
    }

    #[test]
    fn instability_examples() {
        let r = instability_predicate(&unstable_params()).unwrap();
        assert!(r.unstable);
        assert!((r.margin - 0.0060054).abs() < 1e-7, "{}", r.margin);
        let r = instability_predicate(&ModelParams::deterministic(0.001, 0.02)).unwrap();
        assert!(!r.unstable);
        // β = μ₁² exactly is not unstable: pick β, then λ with μ₁²(β+λ) = β.
        let beta = 0.01;
        let lambda = bisect(
            |l| {
                let mu = mu_roots(beta + l, 1, 1e-15).unwrap()[0].mu;
                mu * mu - beta
            },
            1e-6,
            0.1,
            0.0,
        )
        .unwrap();
        let r = instability_predicate(&ModelParams::deterministic(beta, lambda)).unwrap();
        assert!(r.margin.abs() < 1e-12);
    }

    #[test]
    fn expansion_remainders() {
        let roots: Vec<(f64, f64)> = [1e-4, 1e-3, 1e-2]
            .iter()
            .map(|&b| {
                let mu = mu_roots(b, 1, 1e-15).unwrap()[0].mu;
                (b, mu * mu)
            })
            .collect();
        for &(b, mu_sq) in &roots {
            // Corrected two-term form leaves a cubic remainder, K ≈ -3.66e-4.
            let k = (mu_sq - mu1_squared_expansion(b)) / b.powi(3);
            assert!((k + 3.658e-4).abs() < 2e-6, "b = {b}: K = {k}");
            // Published form leaves a quadratic one, (2/81)b².
            let q = (mu_sq - mu1_squared_asymptotic(b)) / (b * b);
            assert!((q - 2.0 / 81.0).abs() < 1e-3, "b = {b}: {q}");
        }
    }

    #[test]
    fn no_growing_separated_modes() {
        for &b in &[1e-4, 0.021, 1.0, 50.0] {
            for i in 1..200 {
                let k = 1e-3 * (1.1f64).powi(i);
                assert!(growing_mode_mismatch(k, b) > 0.0);
            }
        }
    }

    #[test]
    fn series_reproduces_single_mode() {
        let p = unstable_params();
        let modes = spectral_modes(&p, 8, 1e-14).unwrap();
        let u0 = modes[0].to_state(401).unwrap();
        let s = SeriesSolution::new(&u0, &modes, &p).unwrap();
        assert!((s.coefficients()[0] - 1.0).abs() < 1e-14);
        for c in &s.coefficients()[1..] {
            assert!(c.abs() < 1e-4);
        }
        let growth = (100.0 * modes[0].growth_rate).exp();
        assert!((growth.ln() - 0.60054).abs() < 1e-4);
        for &x in &[0.0, 0.3, 1.0] {
            let v = s.eval(x, 100.0);
            assert!((v - growth * modes[0].eval(x)).abs() < 1e-3 * growth);
        }
    }

    #[test]
    fn series_reconstructs_smooth_data_at_t0() {
        let p = unstable_params();
        let u0 = HState::from_fn(4001, 1.0, |x| 1.0 + x * (1.0 - x) + 0.3 * x.powi(3)).unwrap();
        let mut prev = f64::INFINITY;
        for n in [4, 16, 64] {
            let modes = spectral_modes(&p, n, 1e-14).unwrap();
            let rec = SeriesSolution::new(&u0, &modes, &p)
                .unwrap()
                .state(4001, 0.0)
                .unwrap();
            let diff = HState::new(
                rec.values()
                    .iter()
                    .zip(u0.values())
                    .map(|(a, b)| a - b)
                    .collect(),
                1.0,
            )
            .unwrap();
            let err = diff.h_norm_sq().sqrt();
            assert!(err < prev, "n = {n}: {err} vs {prev}");
            prev = err;
        }
        assert!(prev < 1e-2);
    }
}
