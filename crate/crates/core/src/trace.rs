//! Poincaré–trace constants.
//!
//! For `θ ≥ 0` the inequality `C ‖u‖²_D ≤ ‖∇u‖²_D + θ ‖u‖²_∂D` holds with the
//! explicit constant
//!
//! ```text
//! C_θ = θ (d/R − θ)    for θ < d/2R
//! C_θ = d² / 4R²       for θ ≥ d/2R
//! ```
//!
//! and with the optimal constant `C*_θ`, the first eigenvalue of `−Δ` with
//! Robin condition `∂_ν u + θ u = 0`. In 1D on `(0, L)` the eigenfunctions are
//! `cos(μx) + (θ/μ) sin(μx)` and `μ` solves
//!
//! ```text
//! (μ² − θ²) sin(μL) − 2θμ cos(μL) = 0,
//! ```
//!
//! which is solved here by sign scanning plus bisection. A finite-difference
//! eigensolve provides an independent second route.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::DomainGeometry;
use crate::roots::{bisect, scan_sign_changes};
use crate::tridiag::SymTridiagonal;

/// How the optimal constant in a [`TraceConstantReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    ExplicitOnly,
    Transcendental,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConstantReport {
    pub theta: f64,
    pub explicit_value: f64,
    pub optimal_value: Option<f64>,
    pub dirichlet_bound: Option<f64>,
    pub method: TraceMethod,
}

impl TraceConstantReport {
    /// `C_θ ≤ C*_θ ≤ λ₁`, with a relative slack `rel_tol` for rounding.
    pub fn sandwich_holds(&self, rel_tol: f64) -> bool {
        match (self.optimal_value, self.dirichlet_bound) {
            (Some(opt), Some(dir)) => {
                self.explicit_value <= opt * (1.0 + rel_tol) + rel_tol
                    && opt <= dir * (1.0 + rel_tol)
            }
            _ => true,
        }
    }
}

/// Explicit (sub-optimal) trace constant `C_θ` for any dimension.
pub fn explicit_constant(theta: f64, g: &DomainGeometry) -> f64 {
    let d_over_r = g.d_over_r();
    if theta < 0.5 * d_over_r {
        theta * (d_over_r - theta)
    } else {
        0.25 * d_over_r * d_over_r
    }
}

/// First Dirichlet eigenvalue `π²/L²` of `(0, L)`.
pub fn dirichlet_bound(length: f64) -> f64 {
    PI * PI / (length * length)
}

/// Pole-free Robin characteristic function divided by `μ`, so that it stays
/// strictly negative at `μ = 0`:
/// `(μ² − θ²) sin(μL)/μ − 2θ cos(μL)`.
pub fn robin_characteristic(mu: f64, theta: f64, length: f64) -> f64 {
    let sinc = if mu.abs() < 1e-8 {
        length * (1.0 - (mu * length).powi(2) / 6.0)
    } else {
        (mu * length).sin() / mu
    };
    (mu * mu - theta * theta) * sinc - 2.0 * theta * (mu * length).cos()
}

/// Smallest positive root `μ₁` of the Robin characteristic equation, with
/// `μ₁ ∈ (0, π/L]`.
pub fn robin_first_root(theta: f64, length: f64, mu_tol: f64) -> Result<f64> {
    if !(theta > 0.0) || !(length > 0.0) || !(mu_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "robin root needs theta > 0, L > 0, tol > 0 (got {theta}, {length}, {mu_tol})"
        )));
    }
    let f = |mu: f64| robin_characteristic(mu, theta, length);
    let end = PI / length;
    let step = 0.01f64.min(PI / 100.0) / length;
    let bracket = scan_sign_changes(f, 0.0, end, step, 1)
        .into_iter()
        .next()
        .ok_or(Error::NoRootInBracket { lo: 0.0, hi: end })?;
    if bracket.0 == bracket.1 {
        return Ok(bracket.0);
    }
    bisect(f, bracket.0, bracket.1, mu_tol)
}

/// Optimal 1D constant `C*_θ = μ₁²` on `(0, L)`, accurate to `tol`.
/// Returns 0 at `θ = 0` (Neumann limit).
pub fn optimal_constant_1d(theta: f64, length: f64, tol: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(0.0);
    }
    if !(length > 0.0) {
        return Err(Error::BadGeometry {
            field: "interval_length",
            value: length,
        });
    }
    // |d(μ²)| ≤ 2 (π/L) |dμ| on the bracket.
    let mu_tol = (tol * length / (2.0 * PI)).max(f64::EPSILON);
    let mu = robin_first_root(theta, length, mu_tol)?;
    Ok(mu * mu)
}

/// First Robin eigenfunction `ψ₁(x) = cos(μ₁x) + (θ/μ₁) sin(μ₁x)`, positive on
/// `[0, L]`.
pub fn robin_first_eigenfunction(theta: f64, length: f64) -> Result<impl Fn(f64) -> f64> {
    let mu = robin_first_root(theta, length, 1e-15)?;
    let ratio = theta / mu;
    Ok(move |x: f64| (mu * x).cos() + ratio * (mu * x).sin())
}

/// Smallest `n_modes` eigenvalues of the symmetric finite-difference Robin
/// Laplacian on `n_nodes` grid points of `[0, L]` (ghost nodes eliminated,
/// half-weighted boundary mass).
pub fn robin_spectrum_fd(
    theta: f64,
    length: f64,
    n_nodes: usize,
    n_modes: usize,
) -> Result<Vec<f64>> {
    if !(theta >= 0.0) || !(length > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference Robin spectrum needs theta >= 0 and L > 0 (got {theta}, {length})"
        )));
    }
    if n_nodes < 16 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference Robin spectrum needs at least 16 nodes (got {n_nodes})"
        )));
    }
    if n_modes == 0 || n_modes > n_nodes {
        return Err(Error::InvalidArgument(format!(
            "cannot return {n_modes} modes from {n_nodes} nodes"
        )));
    }
    let h = length / (n_nodes - 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let mut diag = vec![2.0 * inv_h2; n_nodes];
    let mut off = vec![-inv_h2; n_nodes - 1];
    // Boundary rows of K are (1 + hθ)/h² and -1/h²; symmetrising with the
    // half mass at the endpoints doubles the diagonal and scales the
    // coupling by √2.
    let boundary_diag = 2.0 * (1.0 + h * theta) * inv_h2;
    diag[0] = boundary_diag;
    diag[n_nodes - 1] = boundary_diag;
    off[0] *= std::f64::consts::SQRT_2;
    off[n_nodes - 2] *= std::f64::consts::SQRT_2;
    let t = SymTridiagonal::new(diag, off)?;
    t.smallest_eigenvalues(n_modes, 0.0)
}

/// Tabulates explicit and (in 1D) optimal constants for one `θ`.
pub fn trace_constant_report(
    theta: f64,
    g: &DomainGeometry,
    method: TraceMethod,
    fd_nodes: usize,
) -> Result<TraceConstantReport> {
    let explicit_value = explicit_constant(theta, g);
    let length = g.interval_length();
    let (optimal_value, method) = match (method, length) {
        (TraceMethod::ExplicitOnly, _) | (_, None) => (None, TraceMethod::ExplicitOnly),
        (TraceMethod::Transcendental, Some(l)) => {
            (Some(optimal_constant_1d(theta, l, 1e-13)?), method)
        }
        (TraceMethod::FiniteDifference, Some(l)) => {
            let v = if theta == 0.0 {
                0.0
            } else {
                robin_spectrum_fd(theta, l, fd_nodes, 1)?[0]
            };
            (Some(v), method)
        }
    };
    Ok(TraceConstantReport {
        theta,
        explicit_value,
        optimal_value,
        dirichlet_bound: length.map(dirichlet_bound),
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DomainGeometry {
        DomainGeometry::new(1, 0.5)
    }

    #[test]
    fn explicit_constant_values() {
        assert_eq!(explicit_constant(0.0, &unit()), 0.0);
        assert!((explicit_constant(0.5, &unit()) - 0.75).abs() < 1e-15);
        assert_eq!(explicit_constant(2.0, &unit()), 1.0);
        assert!((explicit_constant(0.25, &unit()) - 0.4375).abs() < 1e-15);
    }

    #[test]
    fn explicit_constant_is_continuous_and_non_decreasing() {
        for g in [
            unit(),
            DomainGeometry::new(3, 1.7),
            DomainGeometry::new(2, 0.3),
        ] {
            let sat = g.saturation_theta();
            let left = explicit_constant(sat * (1.0 - 1e-12), &g);
            let right = explicit_constant(sat, &g);
            assert!((left - right).abs() < 1e-9 * right);
            let mut prev = 0.0;
            for i in 0..=400 {
                let c = explicit_constant(i as f64 * 3.0 * sat / 400.0, &g);
                assert!(c >= prev - 1e-15);
                prev = c;
            }
            assert_eq!(
                explicit_constant(10.0 * sat, &g),
                0.25 * g.d_over_r().powi(2)
            );
        }
    }

    #[test]
    fn dirichlet_scaling() {
        assert!((dirichlet_bound(1.0) - 9.869604401089358).abs() < 1e-14);
        assert!((dirichlet_bound(2.0) - 2.4674011002723395).abs() < 1e-14);
        assert!((dirichlet_bound(0.5) - 39.47841760435743).abs() < 1e-12);
    }

    #[test]
    fn optimal_constant_limits() {
        assert_eq!(optimal_constant_1d(0.0, 1.0, 1e-12).unwrap(), 0.0);
        let small = optimal_constant_1d(1e-8, 1.0, 1e-14).unwrap();
        // Small-θ asymptotics: C*_θ ≈ 2θ/L.
        assert!((small - 2e-8).abs() < 1e-12, "{small}");
        let big = optimal_constant_1d(1e6, 1.0, 1e-12).unwrap();
        assert!((big - PI * PI).abs() < 1e-2);
        assert!(big <= PI * PI);
    }

    #[test]
    fn optimal_root_satisfies_robin_conditions() {
        for &(theta, l) in &[(0.3, 1.0), (1.0, 1.0), (4.0, 2.5), (0.05, 0.4)] {
            let mu = robin_first_root(theta, l, 1e-15).unwrap();
            let c = theta / mu;
            let u = |x: f64| (mu * x).cos() + c * (mu * x).sin();
            let du = |x: f64| -mu * (mu * x).sin() + c * mu * (mu * x).cos();
            assert!((-du(0.0) + theta * u(0.0)).abs() < 1e-12);
            assert!((du(l) + theta * u(l)).abs() < 1e-10);
            // Positive eigenfunction: first mode.
            for i in 0..=50 {
                assert!(u(l * i as f64 / 50.0) > 0.0);
            }
        }
    }

    #[test]
    fn fd_dirichlet_limit_and_suboptimality() {
        let ev = robin_spectrum_fd(1e6, 1.0, 2000, 3).unwrap();
        assert!((ev[0] - PI * PI).abs() < 1e-2);
        assert!(ev[0] < ev[1] && ev[1] < ev[2]);
        let ev = robin_spectrum_fd(0.5, 1.0, 2000, 1).unwrap();
        assert!(ev[0] >= explicit_constant(0.5, &unit()));
    }

    #[test]
    fn fd_converges_at_order_two() {
        let exact = optimal_constant_1d(1.0, 1.0, 1e-14).unwrap();
        let e1 = (robin_spectrum_fd(1.0, 1.0, 101, 1).unwrap()[0] - exact).abs();
        let e2 = (robin_spectrum_fd(1.0, 1.0, 201, 1).unwrap()[0] - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn fd_rejects_coarse_grids() {
        assert!(robin_spectrum_fd(1.0, 1.0, 10, 1).is_err());
    }

    #[test]
    fn optimal_constant_non_decreasing_in_theta() {
        let mut prev = 0.0;
        for i in 1..=100 {
            let c = optimal_constant_1d(0.1 * i as f64, 1.0, 1e-13).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn report_flags_explicit_only_outside_1d() {
        let r = trace_constant_report(
            0.5,
            &DomainGeometry::new(2, 1.0),
            TraceMethod::Transcendental,
            100,
        )
        .unwrap();
        assert_eq!(r.method, TraceMethod::ExplicitOnly);
        assert!(r.optimal_value.is_none());
        let r = trace_constant_report(0.5, &unit(), TraceMethod::Transcendental, 100).unwrap();
        assert!(r.sandwich_holds(1e-12));
    }
}
