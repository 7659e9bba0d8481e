//! Shared domain types: model parameters, domain geometry, admissible noise
//! intervals and the discrete state `U = (u, u|∂D)` on a 1D grid.
//!
//! In one dimension the boundary of `(0, L)` is the pair of endpoints with
//! counting measure, so the H-inner product is
//!
//! ```text
//! <U, V>_H = ∫ u v dx + u(0) v(0) + u(L) v(L)
//! ```
//!
//! and all interior integrals use the composite trapezoid rule on a uniform
//! grid that includes both endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the multiplicative noise `α u dW` acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePlacement {
    /// Noise on the dynamical boundary condition only.
    Boundary,
    /// Noise in the bulk equation only; the boundary condition is noise free.
    Interior,
    /// Deterministic problem.
    None,
}

/// Physical parameters of the Chafee-Infante problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Bulk reaction `beta u - u^3`.
    pub beta: f64,
    /// Boundary law `u_t + du/dn + lambda u = 0`.
    pub lambda: f64,
    /// Noise intensity.
    pub alpha: f64,
    pub placement: NoisePlacement,
}

impl ModelParams {
    pub fn new(beta: f64, lambda: f64, alpha: f64, placement: NoisePlacement) -> Self {
        Self {
            beta,
            lambda,
            alpha,
            placement,
        }
    }

    pub fn deterministic(beta: f64, lambda: f64) -> Self {
        Self::new(beta, lambda, 0.0, NoisePlacement::None)
    }

    /// Noise intensity actually applied; zero for [`NoisePlacement::None`].
    pub fn effective_alpha(&self) -> f64 {
        match self.placement {
            NoisePlacement::None => 0.0,
            _ => self.alpha,
        }
    }

    /// `b = β + λ`, the Robin coefficient of the shifted 1D problem.
    pub fn b(&self) -> f64 {
        self.beta + self.lambda
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }
}

/// Domain description: dimension `d`, half diameter `R` and, in 1D, the
/// interval length `L = 2R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainGeometry {
    pub dimension: u32,
    pub half_diameter: f64,
}

impl DomainGeometry {
    pub fn new(dimension: u32, half_diameter: f64) -> Self {
        Self {
            dimension,
            half_diameter,
        }
    }

    /// The interval `(0, L)`.
    pub fn interval(length: f64) -> Self {
        Self::new(1, 0.5 * length)
    }

    /// The unit interval used throughout the 1D analysis.
    pub fn unit_interval() -> Self {
        Self::interval(1.0)
    }

    /// `L = 2R` for `d = 1`, `None` otherwise.
    pub fn interval_length(&self) -> Option<f64> {
        (self.dimension == 1).then_some(2.0 * self.half_diameter)
    }

    /// `d / R`.
    pub fn d_over_r(&self) -> f64 {
        self.dimension as f64 / self.half_diameter
    }

    /// `d / 2R`, where the explicit trace constant saturates.
    pub fn saturation_theta(&self) -> f64 {
        0.5 * self.d_over_r()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 1 {
            return Err(Error::BadGeometry {
                field: "dimension",
                value: self.dimension as f64,
            });
        }
        if !(self.half_diameter > 0.0) || !self.half_diameter.is_finite() {
            return Err(Error::BadGeometry {
                field: "half_diameter",
                value: self.half_diameter,
            });
        }
        Ok(())
    }
}

/// Checks the parameter invariants and returns the pair unchanged.
pub fn validate_params(p: ModelParams, g: DomainGeometry) -> Result<(ModelParams, DomainGeometry)> {
    if !(p.beta > 0.0) || !p.beta.is_finite() {
        return Err(Error::NonPositiveBeta(p.beta));
    }
    if !(p.lambda > 0.0) || !p.lambda.is_finite() {
        return Err(Error::NonPositiveLambda(p.lambda));
    }
    if !p.alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must be finite (got {})",
            p.alpha
        )));
    }
    g.validate()?;
    Ok((p, g))
}

/// Which case of the range formulas produced an [`IntensityInterval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremCase {
    /// Boundary noise, `A > 2B`: `[max{0, B}, Z₂)`.
    BoundaryAGt2B,
    /// Boundary noise, `2B ≥ A > B`: `(Z₁, Z₂)`.
    Boundary2BGeA,
    /// Boundary noise, persistence of stability at `θ = λ`.
    BoundaryPersistence,
    /// Interior noise, `B > -2A`: `[max{0, -A}, T₂)`.
    InteriorBGtMinus2A,
    /// Interior noise, `-2A ≥ B > -A`: `(T₁, T₂)`.
    InteriorMinus2AGeB,
    /// Interior noise, persistence of stability at `θ̂`.
    InteriorPersistence,
    /// Interior noise, the `θ → 0` limit for `β < λ`.
    InteriorSmallTheta,
    /// Interior noise, stabilisation for `β > max{λ, C_λ}`.
    InteriorLargeBeta,
}

impl TheoremCase {
    pub fn label(&self) -> &'static str {
        match self {
            TheoremCase::BoundaryAGt2B => "boundary:a>2b",
            TheoremCase::Boundary2BGeA => "boundary:2b>=a>b",
            TheoremCase::BoundaryPersistence => "boundary:persistence",
            TheoremCase::InteriorBGtMinus2A => "interior:b>-2a",
            TheoremCase::InteriorMinus2AGeB => "interior:-2a>=b>-a",
            TheoremCase::InteriorPersistence => "interior:persistence",
            TheoremCase::InteriorSmallTheta => "interior:small-theta",
            TheoremCase::InteriorLargeBeta => "interior:large-beta",
        }
    }
}

/// An admissible range for `α²/2`. The upper end is always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub theorem_case: TheoremCase,
    pub theta_used: f64,
}

impl IntensityInterval {
    /// Whether `half_alpha_sq = α²/2` lies in the interval.
    pub fn contains(&self, half_alpha_sq: f64) -> bool {
        let above = if self.lower_closed {
            half_alpha_sq >= self.lower
        } else {
            half_alpha_sq > self.lower
        };
        above && half_alpha_sq < self.upper
    }

    /// The same range expressed for `α²`.
    pub fn alpha_sq_bounds(&self) -> (f64, f64) {
        (2.0 * self.lower, 2.0 * self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Grid function `U = (u, u(0), u(L))` on `n ≥ 2` uniformly spaced nodes of
/// `[0, L]`, endpoints included. The boundary components are the first and
/// last nodal values, so `U` always lies in the trace-compatible subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HState {
    values: Vec<f64>,
    length: f64,
}

impl HState {
    pub fn new(values: Vec<f64>, length: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "state needs at least 2 nodes (got {})",
                values.len()
            )));
        }
        if !(length > 0.0) {
            return Err(Error::BadGeometry {
                field: "interval_length",
                value: length,
            });
        }
        Ok(Self { values, length })
    }

    pub fn zeros(n_nodes: usize, length: f64) -> Result<Self> {
        Self::new(vec![0.0; n_nodes], length)
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(n_nodes: usize, length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::InvalidArgument(format!(
                "state needs at least 2 nodes (got {n_nodes})"
            )));
        }
        let h = length / (n_nodes - 1) as f64;
        let values = (0..n_nodes).map(|i| f(i as f64 * h)).collect();
        Self::new(values, length)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.values.len() - 1) as f64
    }

    pub fn boundary_left(&self) -> f64 {
        self.values[0]
    }

    pub fn boundary_right(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            length: self.length,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `‖U‖²_H` with this state's own grid spacing.
    pub fn h_norm_sq(&self) -> f64 {
        h_norm_sq(self, self.spacing())
    }
}

/// Trapezoid rule for `∫ u v dx` on a uniform grid.
pub(crate) fn trapezoid_product(u: &[f64], v: &[f64], h: f64) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let n = u.len();
    let inner: f64 = u[1..n - 1]
        .iter()
        .zip(&v[1..n - 1])
        .map(|(a, b)| a * b)
        .sum();
    h * (inner + 0.5 * (u[0] * v[0] + u[n - 1] * v[n - 1]))
}

/// `‖U‖²_H = ∫₀ᴸ u² dx + u(0)² + u(L)²` with trapezoid quadrature.
pub fn h_norm_sq(s: &HState, grid_spacing: f64) -> f64 {
    let v = s.values();
    trapezoid_product(v, v, grid_spacing) + s.boundary_left().powi(2) + s.boundary_right().powi(2)
}

/// `<U, V>_H` on a shared grid.
pub fn h_inner(a: &HState, b: &HState) -> Result<f64> {
    if a.len() != b.len() || (a.length() - b.length()).abs() > 1e-14 * a.length() {
        return Err(Error::InvalidArgument(
            "H-inner product of states on different grids".into(),
        ));
    }
    let (u, v) = (a.values(), b.values());
    Ok(trapezoid_product(u, v, a.spacing()) + u[0] * v[0] + u[u.len() - 1] * v[v.len() - 1])
}

/// Discrete bilinear form `a_h(U, U) = ‖u'‖²_{D,h} + λ (u(0)² + u(L)²)` with
/// forward differences for the gradient.
pub fn bilinear_form(s: &HState, lambda: f64) -> f64 {
    let h = s.spacing();
    let v = s.values();
    let grad: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h;
    grad + lambda * (s.boundary_left().powi(2) + s.boundary_right().powi(2))
}

/// `‖u‖²_{D,h}` (trapezoid, interior part of the H-norm only).
pub fn interior_norm_sq(s: &HState) -> f64 {
    let v = s.values();
    trapezoid_product(v, v, s.spacing())
}

/// `‖u‖⁴_{L⁴,h}` (trapezoid).
pub fn l4_norm_pow4(s: &HState) -> f64 {
    let sq: Vec<f64> = s.values().iter().map(|v| v * v).collect();
    trapezoid_product(&sq, &sq, s.spacing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn validate_accepts_section5_parameters() {
        let p = ModelParams::new(0.02, 0.001, 1.0, NoisePlacement::Boundary);
        let g = DomainGeometry::new(1, 0.5);
        assert_eq!(validate_params(p, g).unwrap(), (p, g));
    }

    #[test]
    fn validate_rejects_bad_inputs() {
        let g = DomainGeometry::new(1, 0.5);
        assert!(matches!(
            validate_params(ModelParams::new(0.0, 1.0, 0.0, NoisePlacement::None), g),
            Err(Error::NonPositiveBeta(_))
        ));
        assert!(matches!(
            validate_params(ModelParams::new(1.0, -1.0, 0.0, NoisePlacement::None), g),
            Err(Error::NonPositiveLambda(_))
        ));
        let p = ModelParams::new(1.0, 1.0, 0.0, NoisePlacement::None);
        assert!(matches!(
            validate_params(p, DomainGeometry::new(0, 0.5)),
            Err(Error::BadGeometry {
                field: "dimension",
                ..
            })
        ));
        assert!(matches!(
            validate_params(p, DomainGeometry::new(1, 0.0)),
            Err(Error::BadGeometry {
                field: "half_diameter",
                ..
            })
        ));
    }

    #[test]
    fn no_noise_placement_ignores_alpha() {
        let p = ModelParams::new(1.0, 1.0, 3.0, NoisePlacement::None);
        assert_eq!(p.effective_alpha(), 0.0);
    }

    #[test]
    fn interval_geometry() {
        let g = DomainGeometry::interval(1.0);
        assert_eq!(g.half_diameter, 0.5);
        assert_eq!(g.interval_length(), Some(1.0));
        assert_eq!(DomainGeometry::new(2, 1.0).interval_length(), None);
    }

    #[test]
    fn norm_of_zero_and_constant() {
        let z = HState::zeros(11, 1.0).unwrap();
        assert_eq!(z.h_norm_sq(), 0.0);
        let one = HState::from_fn(101, 1.0, |_| 1.0).unwrap();
        assert!((one.h_norm_sq() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn norm_of_sine_matches_integral() {
        for n in [17, 33, 65] {
            let s = HState::from_fn(n, 1.0, |x| (PI * x).sin()).unwrap();
            let h = s.spacing();
            assert!((s.h_norm_sq() - 0.5).abs() <= h * h);
        }
    }

    #[test]
    fn trapezoid_converges_at_order_two() {
        let e = std::f64::consts::E;
        let exact = 0.5 * (e * e - 1.0) + 1.0 + e * e;
        let err = |n: usize| {
            let s = HState::from_fn(n, 1.0, f64::exp).unwrap();
            (s.h_norm_sq() - exact).abs()
        };
        let order = (err(33) / err(65)).log2();
        assert!((order - 2.0).abs() < 0.05, "observed order {order}");
    }

    #[test]
    fn bilinear_form_of_linear_function() {
        // u = x on [0,1]: ∫u'² = 1, boundary 0² + 1².
        let s = HState::from_fn(21, 1.0, |x| x).unwrap();
        assert!((bilinear_form(&s, 2.0) - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn norm_is_homogeneous_of_degree_two(
            vals in proptest::collection::vec(-10.0f64..10.0, 3..40),
            c in -5.0f64..5.0,
        ) {
            let s = HState::new(vals, 1.0).unwrap();
            let lhs = s.scaled(c).h_norm_sq();
            let rhs = c * c * s.h_norm_sq();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn norm_dominates_boundary_masses(
            vals in proptest::collection::vec(-10.0f64..10.0, 3..40),
        ) {
            let s = HState::new(vals, 2.0).unwrap();
            let b = s.boundary_left().powi(2) + s.boundary_right().powi(2);
            prop_assert!(s.h_norm_sq() >= b);
        }
    }
}
