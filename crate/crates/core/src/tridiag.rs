//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection and a
//! factor-once tridiagonal linear solver.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix given by its diagonal and first off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::ConvergenceFailure(
                "matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the LDLᵀ
    /// pivots of `T - x I`).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` smallest eigenvalues in ascending order, each to absolute
    /// accuracy `abs_tol` (or a few ulps of the spectrum scale, whichever is
    /// larger).
    pub fn smallest_eigenvalues(&self, k: usize, abs_tol: f64) -> Result<Vec<f64>> {
        if k == 0 || k > self.dim() {
            return Err(Error::InvalidArgument(format!(
                "requested {k} eigenvalues of a {}x{} matrix",
                self.dim(),
                self.dim()
            )));
        }
        let (g_lo, g_hi) = self.gershgorin();
        let scale = g_lo.abs().max(g_hi.abs()).max(f64::MIN_POSITIVE);
        let floor = 4.0 * f64::EPSILON * scale;
        let mut out = Vec::with_capacity(k);
        let mut lo_start = g_lo;
        for j in 0..k {
            let (mut lo, mut hi) = (lo_start, g_hi);
            let mut iters = 0;
            while hi - lo > abs_tol.max(floor) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
                iters += 1;
                if iters > 2000 {
                    return Err(Error::ConvergenceFailure(format!(
                        "bisection for eigenvalue {j} did not terminate"
                    )));
                }
            }
            let ev = 0.5 * (lo + hi);
            out.push(ev);
            lo_start = lo;
        }
        Ok(out)
    }
}

/// LU factorisation of a general tridiagonal matrix for repeated solves
/// (Thomas algorithm without pivoting; intended for diagonally dominant
/// systems).
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    // Modified super-diagonal c'_i and reciprocal pivots.
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl TridiagonalLu {
    /// `lower[i]` multiplies `x[i]` in row `i + 1`; `upper[i]` multiplies
    /// `x[i + 1]` in row `i`.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::InvalidArgument("tridiagonal shape mismatch".into()));
        }
        let mut upper_mod = vec![0.0; n.saturating_sub(1)];
        let mut inv_pivot = vec![0.0; n];
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = diag[i] - lower[i - 1] * upper_mod[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::ConvergenceFailure(format!(
                    "zero pivot in row {i} of tridiagonal solve"
                )));
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                upper_mod[i] = upper[i] * inv_pivot[i];
            }
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper_mod,
            inv_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.inv_pivot.len()
    }

    /// Solves in place: `rhs` is overwritten with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i - 1] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian_spectrum() {
        // Dirichlet second difference: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 50;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let ev = t.smallest_eigenvalues(4, 1e-14).unwrap();
        for (k, e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-12, "{e} vs {exact}");
        }
    }

    #[test]
    fn sturm_count_is_monotone() {
        let t = SymTridiagonal::new(vec![1.0, 3.0, 5.0, 7.0], vec![0.5, 0.5, 0.5]).unwrap();
        let mut prev = 0;
        for i in 0..100 {
            let c = t.count_below(-1.0 + 0.1 * i as f64);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, 4);
    }

    #[test]
    fn thomas_solves_diagonally_dominant_system() {
        let n = 30;
        let lower = vec![-1.0; n - 1];
        let upper = vec![-0.5; n - 1];
        let diag = vec![4.0; n];
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                b[i] += upper[i] * x[i + 1];
            }
        }
        let lu = TridiagonalLu::factor(&lower, &diag, &upper).unwrap();
        lu.solve_in_place(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-13);
        }
    }
}
