//! C ABI over `chafee-core`.
//!
//! Every fallible function returns a [`ChafeeStatus`]; on failure the
//! message is available from [`chafee_last_error`] on the same thread.
//! Objects are opaque handles created by `*_new`/`*_run` functions and
//! released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chafee_core::model::{
    validate_params, DomainGeometry, IntensityInterval, ModelParams, NoisePlacement,
};
use chafee_core::sim::{monte_carlo_lyapunov, BoundaryStencil, LyapunovSummary, Scheme, SimConfig};
use chafee_core::spectral::{instability_predicate, mu_roots, spectral_modes};
use chafee_core::stability::{
    optimize_range_over_theta, theta_feasible_interval_boundary, ConstantSource, ThetaSweep,
};
use chafee_core::trace::{explicit_constant, optimal_constant_1d};
use chafee_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChafeeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    HypothesisFailed = 3,
    NumericalFailure = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChafeePlacement {
    Boundary = 0,
    Interior = 1,
    None = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChafeeConstantSource {
    Explicit = 0,
    Optimal = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChafeeScheme {
    SemiImplicit = 0,
    Explicit = 1,
}

/// Admissible range for `alpha^2 / 2`; the upper end is open.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChafeeInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub theta: f64,
}

/// Simulation settings. A negative `t_burn_in` selects `0.1 * t_final`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChafeeSimParams {
    pub n_nodes: usize,
    pub dt: f64,
    pub t_final: f64,
    pub t_burn_in: f64,
    pub seed: u64,
    pub linearized: bool,
    pub renormalize_every: usize,
    pub scheme: ChafeeScheme,
    pub second_order_stencil: bool,
}

/// Model parameters and domain geometry.
pub struct ChafeeModel {
    params: ModelParams,
    geometry: DomainGeometry,
}

/// Result of a theta sweep.
pub struct ChafeeSweep {
    inner: ThetaSweep,
}

/// Result of a Monte Carlo Lyapunov run.
pub struct ChafeeMcResult {
    inner: LyapunovSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ChafeeStatus {
    match e.exit_code() {
        2 => ChafeeStatus::HypothesisFailed,
        3 => ChafeeStatus::NumericalFailure,
        _ => ChafeeStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ChafeeStatus>) -> ChafeeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChafeeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            ChafeeStatus::Panic
        }
    }
}

fn core<T>(r: chafee_core::Result<T>) -> Result<T, ChafeeStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), ChafeeStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(ChafeeStatus::NullPointer)
    } else {
        Ok(())
    }
}

fn invalid(msg: &str) -> ChafeeStatus {
    set_error(msg.into());
    ChafeeStatus::InvalidArgument
}

fn placement(p: ChafeePlacement) -> NoisePlacement {
    match p {
        ChafeePlacement::Boundary => NoisePlacement::Boundary,
        ChafeePlacement::Interior => NoisePlacement::Interior,
        ChafeePlacement::None => NoisePlacement::None,
    }
}

fn interval(r: &IntensityInterval) -> ChafeeInterval {
    ChafeeInterval {
        lower: r.lower,
        upper: r.upper,
        lower_closed: r.lower_closed,
        theta: r.theta_used,
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chafee_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Validates and stores model parameters. `dimension = 1` with
/// `half_diameter = L/2` describes the interval `(0, L)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn chafee_model_new(
    beta: f64,
    lambda: f64,
    alpha: f64,
    noise: ChafeePlacement,
    dimension: u32,
    half_diameter: f64,
    out: *mut *mut ChafeeModel,
) -> ChafeeStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = ModelParams::new(beta, lambda, alpha, placement(noise));
        let (params, geometry) = core(validate_params(
            p,
            DomainGeometry::new(dimension, half_diameter),
        ))?;
        *out = Box::into_raw(Box::new(ChafeeModel { params, geometry }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`chafee_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chafee_model_free(model: *mut ChafeeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Explicit trace constant `C_theta`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn chafee_explicit_constant(
    theta: f64,
    dimension: u32,
    half_diameter: f64,
    out: *mut f64,
) -> ChafeeStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = DomainGeometry::new(dimension, half_diameter);
        core(g.validate())?;
        if theta.is_nan() || theta < 0.0 {
            return Err(invalid("theta must be >= 0"));
        }
        *out = explicit_constant(theta, &g);
        Ok(())
    })
}

/// Optimal 1D trace constant on `(0, length)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn chafee_optimal_constant_1d(
    theta: f64,
    length: f64,
    tol: f64,
    out: *mut f64,
) -> ChafeeStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = core(optimal_constant_1d(theta, length, tol))?;
        Ok(())
    })
}

/// Feasible `theta` interval for boundary noise with the explicit constant.
/// Returns `HypothesisFailed` if it is empty.
///
/// # Safety
/// `model` must be a live handle; `lo` and `hi` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn chafee_theta_feasible_boundary(
    model: *const ChafeeModel,
    lo: *mut f64,
    hi: *mut f64,
) -> ChafeeStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(lo, "lo")?;
        non_null(hi, "hi")?;
        let m = &*model;
        match theta_feasible_interval_boundary(&m.params, &m.geometry) {
            Some(t) => {
                *lo = t.lo;
                *hi = t.hi;
                Ok(())
            }
            None => {
                set_error("feasible theta interval is empty".into());
                Err(ChafeeStatus::HypothesisFailed)
            }
        }
    })
}

/// Sweeps `n_theta` values of `theta` for the given placement.
///
/// # Safety
/// `model` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn chafee_sweep_run(
    model: *const ChafeeModel,
    noise: ChafeePlacement,
    source: ChafeeConstantSource,
    n_theta: usize,
    out: *mut *mut ChafeeSweep,
) -> ChafeeStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        let m = &*model;
        let source = match source {
            ChafeeConstantSource::Explicit => ConstantSource::ExplicitC,
            ChafeeConstantSource::Optimal => ConstantSource::Optimal1D,
        };
        let inner = core(optimize_range_over_theta(
            &m.params,
            &m.geometry,
            placement(noise),
            source,
            n_theta,
        ))?;
        *out = Box::into_raw(Box::new(ChafeeSweep { inner }));
        Ok(())
    })
}

/// Envelope `(inf lower, sup upper)` of `alpha^2 / 2` and whether the union
/// of ranges is connected.
///
/// # Safety
/// `sweep` must be a live handle; outputs valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn chafee_sweep_envelope(
    sweep: *const ChafeeSweep,
    lower: *mut f64,
    upper: *mut f64,
    connected: *mut bool,
) -> ChafeeStatus {
    guard(|| {
        non_null(sweep, "sweep")?;
        non_null(lower, "lower")?;
        non_null(upper, "upper")?;
        non_null(connected, "connected")?;
        let s = &(*sweep).inner;
        *lower = s.envelope.0;
        *upper = s.envelope.1;
        *connected = s.connected;
        Ok(())
    })
}

/// Number of per-theta intervals in the sweep (0 for a null handle).
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chafee_sweep_len(sweep: *const ChafeeSweep) -> usize {
    if sweep.is_null() {
        0
    } else {
        (*sweep).inner.per_theta.len()
    }
}

/// # Safety
/// `sweep` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn chafee_sweep_get(
    sweep: *const ChafeeSweep,
    index: usize,
    out: *mut ChafeeInterval,
) -> ChafeeStatus {
    guard(|| {
        non_null(sweep, "sweep")?;
        non_null(out, "out")?;
        let s = &*sweep;
        let r = s
            .inner
            .per_theta
            .get(index)
            .ok_or_else(|| invalid("index out of range"))?;
        *out = interval(r);
        Ok(())
    })
}

/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chafee_sweep_free(sweep: *mut ChafeeSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// First `n` positive roots `mu` of the characteristic equation with
/// Robin coefficient `b = beta + lambda`.
///
/// # Safety
/// `out` must be valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn chafee_mu_roots(b: f64, n: usize, out: *mut f64) -> ChafeeStatus {
    guard(|| {
        non_null(out, "out")?;
        let roots = core(mu_roots(b, n, 1e-14))?;
        for (i, r) in roots.iter().enumerate() {
            *out.add(i) = r.mu;
        }
        Ok(())
    })
}

/// `beta > mu_1^2`: writes the verdict and the margin `beta - mu_1^2`.
///
/// # Safety
/// `model` must be a live handle; outputs valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn chafee_instability(
    model: *const ChafeeModel,
    unstable: *mut bool,
    margin: *mut f64,
) -> ChafeeStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(unstable, "unstable")?;
        non_null(margin, "margin")?;
        let r = core(instability_predicate(&(*model).params))?;
        *unstable = r.unstable;
        *margin = r.margin;
        Ok(())
    })
}

/// Default simulation settings.
#[no_mangle]
pub extern "C" fn chafee_sim_params_default() -> ChafeeSimParams {
    let d = SimConfig::default();
    ChafeeSimParams {
        n_nodes: d.n_nodes,
        dt: d.dt,
        t_final: d.t_final,
        t_burn_in: -1.0,
        seed: d.seed,
        linearized: d.linearized,
        renormalize_every: d.renormalize_every,
        scheme: ChafeeScheme::SemiImplicit,
        second_order_stencil: true,
    }
}

fn sim_config(p: &ChafeeSimParams) -> SimConfig {
    SimConfig {
        n_nodes: p.n_nodes,
        dt: p.dt,
        t_final: p.t_final,
        t_burn_in: (p.t_burn_in >= 0.0).then_some(p.t_burn_in),
        seed: p.seed,
        linearized: p.linearized,
        renormalize_every: p.renormalize_every,
        scheme: match p.scheme {
            ChafeeScheme::SemiImplicit => Scheme::SemiImplicit,
            ChafeeScheme::Explicit => Scheme::Explicit,
        },
        stencil: if p.second_order_stencil {
            BoundaryStencil::SecondOrder
        } else {
            BoundaryStencil::FirstOrder
        },
        record_every: usize::MAX,
        keep_final_state: false,
    }
}

/// Monte Carlo Lyapunov estimates on `(0, 1)` from the first eigenmode
/// of the linearised problem.
///
/// # Safety
/// `model` and `sim` must be valid; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn chafee_mc_run(
    model: *const ChafeeModel,
    sim: *const ChafeeSimParams,
    n_paths: usize,
    out: *mut *mut ChafeeMcResult,
) -> ChafeeStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        let m = &*model;
        let cfg = sim_config(&*sim);
        core(cfg.validate())?;
        let u0 =
            core(spectral_modes(&m.params, 1, 1e-14).and_then(|v| v[0].to_state(cfg.n_nodes)))?;
        let inner = core(monte_carlo_lyapunov(&u0, &m.params, &cfg, n_paths))?;
        *out = Box::into_raw(Box::new(ChafeeMcResult { inner }));
        Ok(())
    })
}

/// Median, mean and fraction of negative estimates.
///
/// # Safety
/// `res` must be a live handle; outputs valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn chafee_mc_summary(
    res: *const ChafeeMcResult,
    median: *mut f64,
    mean: *mut f64,
    fraction_negative: *mut f64,
) -> ChafeeStatus {
    guard(|| {
        non_null(res, "res")?;
        non_null(median, "median")?;
        non_null(mean, "mean")?;
        non_null(fraction_negative, "fraction_negative")?;
        let s = &(*res).inner;
        *median = s.median;
        *mean = s.mean;
        *fraction_negative = s.fraction_negative;
        Ok(())
    })
}

/// Per-path estimates in path order; writes at most `capacity` values and
/// returns the number of paths.
///
/// # Safety
/// `res` must be null or a live handle; `out` valid for `capacity` writes
/// (may be null when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn chafee_mc_estimates(
    res: *const ChafeeMcResult,
    out: *mut f64,
    capacity: usize,
) -> usize {
    if res.is_null() {
        return 0;
    }
    let per_path = &(*res).inner.per_path;
    if !out.is_null() {
        for (i, e) in per_path.iter().take(capacity).enumerate() {
            *out.add(i) = e.lyapunov_estimate;
        }
    }
    per_path.len()
}

/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chafee_mc_free(res: *mut ChafeeMcResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}
