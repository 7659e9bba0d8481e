//! Itô finite-difference simulation on `[0, 1]` and Lyapunov Monte Carlo.
//!
//! Nodes `0` and `n − 1` carry the dynamical boundary condition
//! `du = (−∂_ν u − λu) dt [+ αu dW]`; interior nodes carry
//! `du = (Δu + βu − u³) dt [+ αu dW]`. A single scalar Brownian increment
//! drives every noisy node in a step.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{h_inner, HState, ModelParams, NoisePlacement};
use crate::tridiag::TridiagonalLu;

/// Largest `dt / h²` accepted by the explicit scheme.
pub const EXPLICIT_STABILITY_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    /// Implicit in the diffusion and boundary coupling, explicit in the
    /// reaction and the noise.
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStencil {
    /// `(3u₀ − 4u₁ + u₂)/(2h)`.
    SecondOrder,
    /// `(u₀ − u₁)/h`.
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_nodes: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Defaults to `0.1 · t_final`.
    pub t_burn_in: Option<f64>,
    pub seed: u64,
    pub linearized: bool,
    pub renormalize_every: usize,
    pub scheme: Scheme,
    pub stencil: BoundaryStencil,
    /// Record `log ‖U‖²_H` every this many steps.
    pub record_every: usize,
    pub keep_final_state: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_nodes: 51,
            dt: 1e-2,
            t_final: 100.0,
            t_burn_in: None,
            seed: 0,
            linearized: true,
            renormalize_every: 100,
            scheme: Scheme::SemiImplicit,
            stencil: BoundaryStencil::SecondOrder,
            record_every: 100,
            keep_final_state: false,
        }
    }
}

impl SimConfig {
    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_nodes - 1) as f64
    }

    pub fn burn_in(&self) -> f64 {
        self.t_burn_in.unwrap_or(0.1 * self.t_final)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    fn burn_in_step(&self) -> usize {
        (self.burn_in() / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_nodes < 3 {
            return bad(format!("n_nodes must be at least 3 (got {})", self.n_nodes));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive (got {})", self.dt));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() || self.n_steps() == 0 {
            return bad(format!(
                "t_final must cover at least one step (got {})",
                self.t_final
            ));
        }
        let tb = self.burn_in();
        if !(tb >= 0.0) || tb >= self.t_final || self.burn_in_step() >= self.n_steps() {
            return bad(format!("t_burn_in must lie in [0, t_final) (got {tb})"));
        }
        if self.renormalize_every == 0 || self.record_every == 0 {
            return bad("renormalize_every and record_every must be positive".into());
        }
        let h = self.spacing();
        if self.scheme == Scheme::Explicit && self.dt > EXPLICIT_STABILITY_FRACTION * h * h {
            return bad(format!(
                "explicit scheme needs dt <= {EXPLICIT_STABILITY_FRACTION}·h² = {:.3e} (got {})",
                EXPLICIT_STABILITY_FRACTION * h * h,
                self.dt
            ));
        }
        Ok(())
    }
}

/// Gaussian increment stream of one path. The stream is fixed by
/// `(seed, path_index)`; the `k`-th draw is the increment of step `k`.
pub fn brownian_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

pub fn brownian_increment(rng: &mut ChaCha8Rng, dt: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z * dt.sqrt()
}

/// One-step integrator with a cached factorisation.
#[derive(Debug, Clone)]
pub struct Stepper {
    n: usize,
    h: f64,
    dt: f64,
    beta: f64,
    lambda: f64,
    alpha: f64,
    placement: NoisePlacement,
    linearized: bool,
    stencil: BoundaryStencil,
    implicit: Option<Implicit>,
    scratch: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Implicit {
    lu: TridiagonalLu,
    // Row 0 (resp. n − 1) had row 1 (resp. n − 2) added with this weight to
    // clear the third stencil entry.
    left_weight: f64,
    right_weight: f64,
}

impl Stepper {
    pub fn new(p: &ModelParams, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_nodes;
        let h = cfg.spacing();
        let mut s = Self {
            n,
            h,
            dt: cfg.dt,
            beta: p.beta,
            lambda: p.lambda,
            alpha: p.effective_alpha(),
            placement: p.placement,
            linearized: cfg.linearized,
            stencil: cfg.stencil,
            implicit: None,
            scratch: vec![0.0; n],
        };
        if cfg.scheme == Scheme::SemiImplicit {
            s.implicit = Some(s.factor()?);
        }
        Ok(s)
    }

    /// Boundary row of the linear operator as weights on `(u₀, u₁, u₂)`.
    fn boundary_row(&self) -> [f64; 3] {
        let h = self.h;
        match self.stencil {
            BoundaryStencil::SecondOrder => [-1.5 / h - self.lambda, 2.0 / h, -0.5 / h],
            BoundaryStencil::FirstOrder => [-1.0 / h - self.lambda, 1.0 / h, 0.0],
        }
    }

    fn factor(&self) -> Result<Implicit> {
        let (n, dt) = (self.n, self.dt);
        let r = dt / (self.h * self.h);
        let mut lower = vec![-r; n - 1];
        let mut diag = vec![1.0 + 2.0 * r; n];
        let mut upper = vec![-r; n - 1];
        let [c0, c1, c2] = self.boundary_row();
        // Interior row entries are (−r, 1 + 2r, −r); weight w cancels −dt·c2.
        let w = -(-dt * c2) / (-r);
        diag[0] = 1.0 - dt * c0 + w * (-r);
        upper[0] = -dt * c1 + w * (1.0 + 2.0 * r);
        diag[n - 1] = diag[0];
        lower[n - 2] = upper[0];
        Ok(Implicit {
            lu: TridiagonalLu::factor(&lower, &diag, &upper)?,
            left_weight: w,
            right_weight: w,
        })
    }

    fn apply_linear(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let h2 = self.h * self.h;
        let [c0, c1, c2] = self.boundary_row();
        out[0] = c0 * u[0] + c1 * u[1] + c2 * u[2];
        out[n - 1] = c0 * u[n - 1] + c1 * u[n - 2] + c2 * u[n - 3];
        for i in 1..n - 1 {
            out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / h2;
        }
    }

    fn reaction(&self, v: f64) -> f64 {
        if self.linearized {
            self.beta * v
        } else {
            self.beta * v - v * v * v
        }
    }

    fn noise_on(&self, i: usize) -> bool {
        let boundary = i == 0 || i == self.n - 1;
        match self.placement {
            NoisePlacement::Boundary => boundary,
            NoisePlacement::Interior => !boundary,
            NoisePlacement::None => false,
        }
    }

    /// Advances `u` by one step driven by the increment `dw`.
    pub fn step_in_place(&mut self, u: &mut [f64], dw: f64) {
        let n = self.n;
        debug_assert_eq!(u.len(), n);
        let dt = self.dt;
        let alpha_dw = self.alpha * dw;
        let mut rhs = std::mem::take(&mut self.scratch);
        match &self.implicit {
            None => {
                self.apply_linear(u, &mut rhs);
                for i in 0..n {
                    let interior = i != 0 && i != n - 1;
                    let mut du = dt * rhs[i];
                    if interior {
                        du += dt * self.reaction(u[i]);
                    }
                    if self.noise_on(i) {
                        du += alpha_dw * u[i];
                    }
                    rhs[i] = u[i] + du;
                }
                u.copy_from_slice(&rhs);
            }
            Some(imp) => {
                for i in 0..n {
                    let interior = i != 0 && i != n - 1;
                    let mut v = u[i];
                    if interior {
                        v += dt * self.reaction(u[i]);
                    }
                    if self.noise_on(i) {
                        v += alpha_dw * u[i];
                    }
                    rhs[i] = v;
                }
                let (r1, rn2) = (rhs[1], rhs[n - 2]);
                rhs[0] += imp.left_weight * r1;
                rhs[n - 1] += imp.right_weight * rn2;
                imp.lu.solve_in_place(&mut rhs);
                u.copy_from_slice(&rhs);
            }
        }
        self.scratch = rhs;
    }
}

/// Single Euler–Maruyama step (builds a fresh [`Stepper`]).
pub fn step(state: &HState, p: &ModelParams, cfg: &SimConfig, dw: f64) -> Result<HState> {
    check_grid(state, cfg)?;
    let mut stepper = Stepper::new(p, cfg)?;
    let mut next = state.clone();
    stepper.step_in_place(next.values_mut(), dw);
    if !next.is_finite() {
        return Err(Error::NonFiniteState { step: 1, t: cfg.dt });
    }
    Ok(next)
}

fn check_grid(state: &HState, cfg: &SimConfig) -> Result<()> {
    if state.len() != cfg.n_nodes || (state.length() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "initial state has {} nodes on length {}, config expects {} nodes on [0, 1]",
            state.len(),
            state.length(),
            cfg.n_nodes
        )));
    }
    Ok(())
}

fn h_norm_sq_of(u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let inner: f64 = u[1..n - 1].iter().map(|v| v * v).sum();
    h * (inner + 0.5 * (u[0] * u[0] + u[n - 1] * u[n - 1])) + u[0] * u[0] + u[n - 1] * u[n - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub seed: u64,
    pub path_index: u64,
    pub times: Vec<f64>,
    /// `log ‖U‖²_H` with renormalisation offsets folded back in.
    pub log_h_norm_sq: Vec<f64>,
    pub lyapunov_estimate: f64,
    pub final_state: Option<HState>,
}

impl PathRecord {
    /// CSV with header `t,log_h_norm_sq`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "log_h_norm_sq"])?;
        for (t, l) in self.times.iter().zip(&self.log_h_norm_sq) {
            w.write_record([t.to_string(), l.to_string()])?;
        }
        Ok(w.flush()?)
    }
}

/// Sample times, log-norm record, Lyapunov estimate, final values.
type PathTrace = (Vec<f64>, Vec<f64>, f64, Vec<f64>);

/// Integrates one path whose increments come from `increments`.
fn integrate(
    u0: &HState,
    p: &ModelParams,
    cfg: &SimConfig,
    mut increments: impl FnMut() -> f64,
) -> Result<PathTrace> {
    check_grid(u0, cfg)?;
    let mut stepper = Stepper::new(p, cfg)?;
    let h = cfg.spacing();
    let n_steps = cfg.n_steps();
    let burn = cfg.burn_in_step();
    let mut u = u0.values().to_vec();
    let n0 = h_norm_sq_of(&u, h);
    if n0 == 0.0 {
        return Err(Error::ZeroInitialState);
    }
    let mut offset = 0.0;
    let mut times = vec![0.0];
    let mut logs = vec![n0.ln()];
    let mut log_burn = if burn == 0 { n0.ln() } else { f64::NAN };
    for k in 1..=n_steps {
        stepper.step_in_place(&mut u, increments());
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                step: k,
                t: k as f64 * cfg.dt,
            });
        }
        let renorm = cfg.linearized && k % cfg.renormalize_every == 0;
        let wanted = renorm || k % cfg.record_every == 0 || k == burn || k == n_steps;
        if !wanted {
            continue;
        }
        let nsq = h_norm_sq_of(&u, h);
        let log_k = nsq.ln() + offset;
        if k == burn {
            log_burn = log_k;
        }
        if k % cfg.record_every == 0 || k == burn || k == n_steps {
            times.push(k as f64 * cfg.dt);
            logs.push(log_k);
        }
        if renorm && nsq > 0.0 {
            let s = nsq.sqrt().recip();
            u.iter_mut().for_each(|v| *v *= s);
            offset += nsq.ln();
        }
    }
    let last = *logs.last().expect("at least one record");
    let est = (last - log_burn) / ((n_steps - burn) as f64 * cfg.dt);
    Ok((times, logs, est, u))
}

/// Integrates path `path_index` to `t_final` and estimates the Lyapunov
/// exponent of `log ‖U‖²_H` over `[t_burn_in, t_final]`.
pub fn run_path(
    u0: &HState,
    p: &ModelParams,
    cfg: &SimConfig,
    path_index: u64,
) -> Result<PathRecord> {
    let mut rng = brownian_rng(cfg.seed, path_index);
    let dt = cfg.dt;
    let noisy = p.effective_alpha() != 0.0;
    let (times, log_h_norm_sq, lyapunov_estimate, u) = integrate(u0, p, cfg, || {
        if noisy {
            brownian_increment(&mut rng, dt)
        } else {
            0.0
        }
    })?;
    let final_state = if cfg.keep_final_state {
        Some(HState::new(u, 1.0)?)
    } else {
        None
    };
    Ok(PathRecord {
        seed: cfg.seed,
        path_index,
        times,
        log_h_norm_sq,
        lyapunov_estimate,
        final_state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathEstimate {
    pub path_index: u64,
    pub seed: u64,
    pub lyapunov_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSummary {
    pub n_paths: usize,
    pub mean: f64,
    pub median: f64,
    /// `None` for a single path.
    pub std_error: Option<f64>,
    pub fraction_negative: f64,
    pub per_path: Vec<PathEstimate>,
}

impl LyapunovSummary {
    fn from_estimates(per_path: Vec<PathEstimate>) -> Self {
        let n = per_path.len();
        let vals: Vec<f64> = per_path.iter().map(|e| e.lyapunov_estimate).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let std_error = (n > 1).then(|| {
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        let fraction_negative = vals.iter().filter(|&&v| v < 0.0).count() as f64 / n as f64;
        Self {
            n_paths: n,
            mean,
            median,
            std_error,
            fraction_negative,
            per_path,
        }
    }

    /// CSV with header `path_index,seed,lyapunov_estimate`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path_index", "seed", "lyapunov_estimate"])?;
        for e in &self.per_path {
            w.write_record([
                e.path_index.to_string(),
                e.seed.to_string(),
                e.lyapunov_estimate.to_string(),
            ])?;
        }
        Ok(w.flush()?)
    }
}

/// Runs paths `0..n_paths` in parallel; the result does not depend on the
/// thread schedule.
pub fn monte_carlo_lyapunov(
    u0: &HState,
    p: &ModelParams,
    cfg: &SimConfig,
    n_paths: usize,
) -> Result<LyapunovSummary> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
    }
    let lean = SimConfig {
        keep_final_state: false,
        record_every: cfg.n_steps().max(1),
        ..cfg.clone()
    };
    let per_path = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            run_path(u0, p, &lean, i).map(|r| PathEstimate {
                path_index: i,
                seed: cfg.seed,
                lyapunov_estimate: r.lyapunov_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LyapunovSummary::from_estimates(per_path))
}

/// `<U, Ψ₁>_H`.
pub fn kaplan_functional(state: &HState, psi1: &HState) -> Result<f64> {
    h_inner(state, psi1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub dt: f64,
    /// RMS over paths of `‖U_dt − U_{dt/2}‖_H` at `t_final`.
    pub error: f64,
}

/// Self-convergence in time. Level `l` uses `dt · 2^{n_levels − 1 − l}`
/// with increments summed from the finest level, so all levels follow the
/// same Brownian path. Returns errors between consecutive levels, coarse
/// first.
pub fn strong_convergence_probe(
    u0: &HState,
    p: &ModelParams,
    cfg: &SimConfig,
    n_levels: usize,
    n_paths: usize,
) -> Result<Vec<ConvergenceLevel>> {
    if n_levels < 3 || n_paths == 0 {
        return Err(Error::InvalidArgument(
            "strong convergence probe needs n_levels >= 3 and n_paths >= 1".into(),
        ));
    }
    let fine_steps = cfg.n_steps();
    let ratio = 1usize << (n_levels - 1);
    if !fine_steps.is_multiple_of(ratio) {
        return Err(Error::InvalidConfig(format!(
            "t_final/dt = {fine_steps} is not divisible by 2^{}",
            n_levels - 1
        )));
    }
    let noisy = p.effective_alpha() != 0.0;
    let finals: Vec<Vec<HState>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = brownian_rng(cfg.seed, path);
            let fine: Vec<f64> = (0..fine_steps)
                .map(|_| {
                    if noisy {
                        brownian_increment(&mut rng, cfg.dt)
                    } else {
                        0.0
                    }
                })
                .collect();
            (0..n_levels)
                .map(|l| {
                    let m = 1usize << (n_levels - 1 - l);
                    let level = SimConfig {
                        dt: cfg.dt * m as f64,
                        t_burn_in: Some(0.0),
                        record_every: usize::MAX,
                        renormalize_every: usize::MAX,
                        ..cfg.clone()
                    };
                    let mut chunks = fine.chunks(m);
                    let (_, _, _, u) = integrate(u0, p, &level, || {
                        chunks.next().map(|c| c.iter().sum()).unwrap_or(0.0)
                    })?;
                    HState::new(u, 1.0)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..n_levels - 1)
        .map(|l| {
            let ms: f64 = finals
                .iter()
                .map(|f| {
                    let d: Vec<f64> = f[l]
                        .values()
                        .iter()
                        .zip(f[l + 1].values())
                        .map(|(a, b)| a - b)
                        .collect();
                    h_norm_sq_of(&d, cfg.spacing())
                })
                .sum::<f64>()
                / n_paths as f64;
            ConvergenceLevel {
                dt: cfg.dt * (1usize << (n_levels - 1 - l)) as f64,
                error: ms.sqrt(),
            }
        })
        .collect())
}

/// Least-squares slope of `log error` against `log dt`.
pub fn empirical_order(levels: &[ConvergenceLevel]) -> f64 {
    let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.dt.ln(), l.error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Smooth random initial data `1 + Σ_k a_k cos(kπx)`, `|a_k| ≤ 1/k²`, fixed
/// by `seed`.
pub fn smooth_random_state(n_nodes: usize, seed: u64, n_terms: usize) -> Result<HState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (1..=n_terms)
        .map(|k| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z.clamp(-1.0, 1.0) / (k * k) as f64
        })
        .collect();
    HState::from_fn(n_nodes, 1.0, |x| {
        1.0 + coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * x).cos())
            .sum::<f64>()
    })
}
