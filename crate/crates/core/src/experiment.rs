//! Configuration, command dispatch and deterministic output files for the
//! `chafee` binary.
//!
//! Every command writes its tables (CSV or JSON), a JSON summary and a
//! `manifest.json` recording the full effective configuration, so a rerun
//! with the manifest's config reproduces the outputs byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{
    validate_params, DomainGeometry, HState, IntensityInterval, ModelParams, NoisePlacement,
};
use crate::sim::{monte_carlo_lyapunov, run_path, smooth_random_state, LyapunovSummary, SimConfig};
use crate::spectral::{
    instability_predicate, mu1_squared_asymptotic, mu1_squared_expansion, spectral_modes,
};
use crate::stability::{
    boundary_persistence_range, interior_large_beta_range, interior_persistence_range,
    interior_small_theta_range, optimize_range_over_theta, theta_feasible_interval_boundary,
    ConstantSource, ThetaSweep,
};
use crate::trace::{trace_constant_report, TraceMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Initial data for simulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialCondition {
    /// First eigenfunction of the linearised problem.
    FirstMode,
    Constant {
        value: f64,
    },
    SmoothRandom {
        seed: u64,
        terms: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub geometry: DomainGeometry,
    pub constant_source: ConstantSource,
    /// `θ` values tabulated by `constants`.
    pub theta_grid: Vec<f64>,
    /// Samples in the `θ` sweep of `ranges` and `repro-sec5`.
    pub n_theta: usize,
    pub n_modes: usize,
    pub sim: SimConfig,
    pub initial: InitialCondition,
    pub n_paths: usize,
    /// `α²` values visited by `sweep`.
    pub alpha_sq_grid: Vec<f64>,
    /// `α²` values simulated by `repro-sec5`.
    pub repro_alpha_sq: Vec<f64>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::new(0.02, 0.001, 0.0, NoisePlacement::Boundary),
            geometry: DomainGeometry::unit_interval(),
            constant_source: ConstantSource::ExplicitC,
            theta_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0],
            n_theta: 2000,
            n_modes: 10,
            sim: SimConfig::default(),
            initial: InitialCondition::FirstMode,
            n_paths: 64,
            alpha_sq_grid: (0..16).map(|i| 10.0 * i as f64 / 15.0).collect(),
            repro_alpha_sq: vec![0.0, 0.02, 2.0, 8.0],
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The preset used by `repro-sec5` for the simulation block: 51 nodes,
    /// semi-implicit `dt = 10⁻²`, `t_final = 2000`.
    pub fn repro_sim() -> SimConfig {
        SimConfig {
            n_nodes: 51,
            dt: 1e-2,
            t_final: 2000.0,
            ..SimConfig::default()
        }
    }
}

/// Process-level outcome of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    HypothesisFailure,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::HypothesisFailure => 2,
            Status::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    /// Files written, relative to the output directory, in write order.
    pub files: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Constants,
    Ranges,
    Spectrum,
    Simulate,
    Mc,
    Sweep,
    ReproSec5,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Ranges => "ranges",
            Command::Spectrum => "spectrum",
            Command::Simulate => "simulate",
            Command::Mc => "mc",
            Command::Sweep => "sweep",
            Command::ReproSec5 => "repro-sec5",
        }
    }
}

/// Collects output files for one command.
struct Writer<'a> {
    dir: &'a Path,
    format: OutputFormat,
    files: Vec<String>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.output_dir)?;
        Ok(Self {
            dir: &cfg.output_dir,
            format: cfg.format,
            files: Vec::new(),
        })
    }

    fn text(&mut self, name: String, content: &[u8]) -> Result<()> {
        fs::write(self.dir.join(&name), content)?;
        self.files.push(name);
        Ok(())
    }

    fn json(&mut self, stem: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(format!("{stem}.json"), text.as_bytes())
    }

    /// Writes a table in the configured format. Cells are JSON scalars.
    fn table(&mut self, stem: &str, header: &[&str], rows: &[Vec<Value>]) -> Result<()> {
        match self.format {
            OutputFormat::Json => {
                let objects: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            header
                                .iter()
                                .zip(r)
                                .map(|(h, v)| (h.to_string(), v.clone()))
                                .collect(),
                        )
                    })
                    .collect();
                self.json(stem, &Value::Array(objects))
            }
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(header)?;
                for r in rows {
                    w.write_record(r.iter().map(cell))?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
                self.text(format!("{stem}.{}", self.format.extension()), &bytes)
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn num(x: f64) -> Value {
    // Non-finite values become strings so CSV and JSON agree.
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn interval_json(r: &IntensityInterval) -> Value {
    json!({
        "case": r.theorem_case.label(),
        "half_alpha_sq": [num(r.lower), num(r.upper)],
        "alpha_sq": [num(2.0 * r.lower), num(2.0 * r.upper)],
        "lower_closed": r.lower_closed,
        "theta": num(r.theta_used),
    })
}

fn result_json<T>(r: Result<T>, f: impl FnOnce(T) -> Value) -> Value {
    match r {
        Ok(v) => f(v),
        Err(e) => json!({ "status": "hypotheses_failed", "reason": e.to_string() }),
    }
}

/// Runs `command` and writes `manifest.json` last.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut w = Writer::new(cfg)?;
    let (status, message) = match command {
        Command::Constants => cmd_constants(cfg, &mut w)?,
        Command::Ranges => cmd_ranges(cfg, &mut w)?,
        Command::Spectrum => cmd_spectrum(cfg, &mut w)?,
        Command::Simulate => cmd_simulate(cfg, &mut w)?,
        Command::Mc => cmd_mc(cfg, &mut w)?,
        Command::Sweep => cmd_sweep(cfg, &mut w)?,
        Command::ReproSec5 => cmd_repro(cfg, &mut w)?,
    };
    let manifest = json!({
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.sim.seed,
        "status": status,
        "config": cfg,
        "outputs": w.files,
    });
    let mut files = w.files.clone();
    w.json("manifest", &manifest)?;
    files.push("manifest.json".into());
    Ok(Outcome {
        status,
        files,
        message,
    })
}

type Reply = (Status, String);

fn cmd_constants(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Reply> {
    cfg.geometry.validate()?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &theta in &cfg.theta_grid {
        if !(theta >= 0.0) {
            return Err(Error::Usage(format!(
                "theta grid values must be >= 0 (got {theta})"
            )));
        }
        let r = trace_constant_report(theta, &cfg.geometry, TraceMethod::Transcendental, 0)?;
        let ok = r.sandwich_holds(1e-12);
        if !ok {
            violations.push(theta);
        }
        rows.push(vec![
            num(theta),
            num(r.explicit_value),
            opt_num(r.optimal_value),
            opt_num(r.dirichlet_bound),
            json!(ok),
        ]);
    }
    w.table(
        "constants",
        &[
            "theta",
            "c_theta",
            "c_star_theta",
            "lambda_1",
            "sandwich_ok",
        ],
        &rows,
    )?;
    if violations.is_empty() {
        Ok((Status::Success, format!("{} rows", rows.len())))
    } else {
        Ok((
            Status::NumericalFailure,
            format!("C_theta <= C*_theta <= lambda_1 violated at theta = {violations:?}"),
        ))
    }
}

fn sweep_json(s: &ThetaSweep) -> Value {
    json!({
        "placement": s.placement,
        "constant_source": s.constant_source,
        "feasible_theta": [num(s.feasible.lo), num(s.feasible.hi)],
        "n_theta": s.per_theta.len(),
        "envelope_half_alpha_sq": [num(s.envelope.0), num(s.envelope.1)],
        "envelope_alpha_sq": [num(2.0 * s.envelope.0), num(2.0 * s.envelope.1)],
        "union_half_alpha_sq": s.union.iter().map(|&(a, b)| json!([num(a), num(b)])).collect::<Vec<_>>(),
        "connected": s.connected,
    })
}

fn per_theta_rows(s: &ThetaSweep) -> Vec<Vec<Value>> {
    s.per_theta
        .iter()
        .map(|r| {
            vec![
                num(r.theta_used),
                num(r.lower),
                num(r.upper),
                json!(r.lower_closed),
                json!(r.theorem_case.label()),
            ]
        })
        .collect()
}

const PER_THETA_HEADER: [&str; 5] = ["theta", "lower", "upper", "lower_closed", "case"];

fn cmd_ranges(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Reply> {
    let (p, g) = validate_params(cfg.model, cfg.geometry)?;
    let closed_form = match p.placement {
        NoisePlacement::Boundary => json!({
            "persistence": result_json(boundary_persistence_range(&p, &g), |r| interval_json(&r)),
        }),
        NoisePlacement::Interior => json!({
            "persistence": result_json(interior_persistence_range(&p, &g), |r| interval_json(&r)),
            "small_theta": result_json(interior_small_theta_range(&p), |r| interval_json(&r)),
            "large_beta": result_json(interior_large_beta_range(&p, &g), |r| json!({
                "theta_window": [num(r.theta_range.lo), num(r.theta_range.hi)],
                "interval": interval_json(&r.interval),
            })),
        }),
        NoisePlacement::None => {
            return Err(Error::Usage(
                "ranges needs placement boundary or interior".into(),
            ))
        }
    };
    match optimize_range_over_theta(&p, &g, p.placement, cfg.constant_source, cfg.n_theta) {
        Ok(s) => {
            w.table("ranges_per_theta", &PER_THETA_HEADER, &per_theta_rows(&s))?;
            w.json(
                "ranges_summary",
                &json!({ "status": "ok", "sweep": sweep_json(&s), "closed_form": closed_form }),
            )?;
            Ok((
                Status::Success,
                format!(
                    "alpha^2 envelope ({:.6}, {:.6}), connected = {}",
                    2.0 * s.envelope.0,
                    2.0 * s.envelope.1,
                    s.connected
                ),
            ))
        }
        Err(e @ (Error::EmptyFeasibleSet(_) | Error::HypothesisFailed(_))) => {
            w.json(
                "ranges_summary",
                &json!({
                    "status": "hypotheses_failed",
                    "reason": e.to_string(),
                    "closed_form": closed_form,
                }),
            )?;
            Ok((Status::HypothesisFailure, e.to_string()))
        }
        Err(e) => Err(e),
    }
}

fn spectrum_summary(p: &ModelParams) -> Result<Value> {
    let r = instability_predicate(p)?;
    let b = p.b();
    Ok(json!({
        "beta": num(p.beta),
        "lambda": num(p.lambda),
        "b": num(b),
        "mu1": num(r.mu1_sq.sqrt()),
        "mu1_sq": num(r.mu1_sq),
        "margin": num(r.margin),
        "verdict": if r.unstable { "unstable" } else { "stable_at_linear_level" },
        "asymptotic_mu1_sq": num(mu1_squared_asymptotic(b)),
        "asymptotic_error": num((r.mu1_sq - mu1_squared_asymptotic(b)).abs()),
        "expansion_mu1_sq": num(mu1_squared_expansion(b)),
        "expansion_error": num((r.mu1_sq - mu1_squared_expansion(b)).abs()),
    }))
}

fn cmd_spectrum(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Reply> {
    let (p, _) = validate_params(cfg.model, cfg.geometry)?;
    if cfg.n_modes == 0 {
        return Err(Error::Usage("n_modes must be at least 1".into()));
    }
    let modes = spectral_modes(&p, cfg.n_modes, 1e-14)?;
    let rows: Vec<Vec<Value>> = modes
        .iter()
        .map(|m| {
            vec![
                json!(m.index),
                num(m.mu),
                num(m.mu * m.mu),
                num(m.growth_rate),
                num(m.coeff_cos),
                num(m.coeff_sin),
                serde_json::to_value(m.branch).unwrap_or(Value::Null),
            ]
        })
        .collect();
    w.table(
        "spectrum",
        &[
            "index",
            "mu",
            "mu_sq",
            "growth_rate",
            "coeff_cos",
            "coeff_sin",
            "branch",
        ],
        &rows,
    )?;
    let summary = spectrum_summary(&p)?;
    let msg = format!(
        "mu1^2 = {}, verdict {}",
        summary["mu1_sq"], summary["verdict"]
    );
    w.json("spectrum_summary", &summary)?;
    Ok((Status::Success, msg))
}

fn initial_state(cfg: &ExperimentConfig, p: &ModelParams) -> Result<HState> {
    let n = cfg.sim.n_nodes;
    match cfg.initial {
        InitialCondition::FirstMode => spectral_modes(p, 1, 1e-14)?[0].to_state(n),
        InitialCondition::Constant { value } => HState::from_fn(n, 1.0, |_| value),
        InitialCondition::SmoothRandom { seed, terms } => smooth_random_state(n, seed, terms),
    }
}

fn simulation_params(cfg: &ExperimentConfig) -> Result<ModelParams> {
    if cfg.geometry.interval_length() != Some(1.0) {
        return Err(Error::Usage(
            "simulations run on the unit interval only".into(),
        ));
    }
    Ok(validate_params(cfg.model, cfg.geometry)?.0)
}

fn cmd_simulate(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Reply> {
    let p = simulation_params(cfg)?;
    let u0 = initial_state(cfg, &p)?;
    let r = run_path(&u0, &p, &cfg.sim, 0)?;
    let rows: Vec<Vec<Value>> = r
        .times
        .iter()
        .zip(&r.log_h_norm_sq)
        .map(|(&t, &l)| vec![num(t), num(l)])
        .collect();
    w.table("trajectory", &["t", "log_h_norm_sq"], &rows)?;
    w.json(
        "simulate_summary",
        &json!({
            "seed": r.seed,
            "path_index": r.path_index,
            "lyapunov_estimate": num(r.lyapunov_estimate),
        }),
    )?;
    Ok((
        Status::Success,
        format!("lyapunov estimate {}", r.lyapunov_estimate),
    ))
}

fn summary_json(s: &LyapunovSummary) -> Value {
    json!({
        "n_paths": s.n_paths,
        "mean": num(s.mean),
        "median": num(s.median),
        "std_error": opt_num(s.std_error),
        "fraction_negative": num(s.fraction_negative),
    })
}

fn cmd_mc(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Reply> {
    let p = simulation_params(cfg)?;
    let u0 = initial_state(cfg, &p)?;
    let s = monte_carlo_lyapunov(&u0, &p, &cfg.sim, cfg.n_paths)?;
    let rows: Vec<Vec<Value>> = s
        .per_path
        .iter()
        .map(|e| vec![json!(e.path_index), json!(e.seed), num(e.lyapunov_estimate)])
        .collect();
    w.table(
        "lyapunov",
        &["path_index", "seed", "lyapunov_estimate"],
        &rows,
    )?;
    w.json("mc_summary", &summary_json(&s))?;
    Ok((
        Status::Success,
        format!(
            "median {}, fraction negative {}",
            s.median, s.fraction_negative
        ),
    ))
}

/// Whether `α²` lies in the union of the swept ranges.
fn predicted_stable(sweep: &Option<ThetaSweep>, alpha_sq: f64) -> Value {
    match sweep {
        Some(s) => json!(s.per_theta.iter().any(|r| r.contains(0.5 * alpha_sq))),
        None => Value::Null,
    }
}

fn cmd_sweep(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Reply> {
    if cfg.alpha_sq_grid.is_empty() {
        return Err(Error::Usage("alpha_sq_grid is empty".into()));
    }
    if cfg.alpha_sq_grid.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::Usage("alpha_sq_grid values must be >= 0".into()));
    }
    let base = simulation_params(cfg)?;
    let placements = [NoisePlacement::Boundary, NoisePlacement::Interior];
    let sweeps: Vec<Option<ThetaSweep>> = placements
        .iter()
        .map(|&pl| {
            optimize_range_over_theta(&base, &cfg.geometry, pl, cfg.constant_source, cfg.n_theta)
                .ok()
        })
        .collect();
    let mut rows = Vec::new();
    for &a2 in &cfg.alpha_sq_grid {
        let mut row = vec![num(a2)];
        for (pl, sweep) in placements.iter().zip(&sweeps) {
            let p = ModelParams::new(base.beta, base.lambda, a2.sqrt(), *pl);
            let u0 = initial_state(cfg, &p)?;
            let s = monte_carlo_lyapunov(&u0, &p, &cfg.sim, cfg.n_paths)?;
            row.extend([
                num(s.median),
                num(s.fraction_negative),
                predicted_stable(sweep, a2),
            ]);
        }
        rows.push(row);
    }
    w.table(
        "sweep",
        &[
            "alpha_sq",
            "boundary_median",
            "boundary_fraction_negative",
            "boundary_predicted_stable",
            "interior_median",
            "interior_fraction_negative",
            "interior_predicted_stable",
        ],
        &rows,
    )?;
    Ok((Status::Success, format!("{} grid points", rows.len())))
}

/// Canned reproduction of the worked example `β = 0.02`, `λ = 0.001` on
/// `(0, 1)` with boundary noise. Model and geometry are fixed; the
/// simulation block defaults to [`ExperimentConfig::repro_sim`].
fn cmd_repro(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Reply> {
    let p = ModelParams::new(0.02, 0.001, 0.0, NoisePlacement::Boundary);
    let g = DomainGeometry::unit_interval();
    let theta = theta_feasible_interval_boundary(&p, &g);
    let sweep = optimize_range_over_theta(
        &p,
        &g,
        NoisePlacement::Boundary,
        ConstantSource::ExplicitC,
        cfg.n_theta,
    )?;
    w.table(
        "repro_per_theta",
        &PER_THETA_HEADER,
        &per_theta_rows(&sweep),
    )?;

    let u0 = spectral_modes(&p, 1, 1e-14)?[0].to_state(cfg.sim.n_nodes)?;
    let mut mc_rows = Vec::new();
    let mut signs = Vec::new();
    for &a2 in &cfg.repro_alpha_sq {
        let pa = p.with_alpha(a2.sqrt());
        let s = monte_carlo_lyapunov(&u0, &pa, &cfg.sim, cfg.n_paths)?;
        let inside = sweep.per_theta.iter().any(|r| r.contains(0.5 * a2));
        let theory = if a2 == 0.0 {
            "positive"
        } else if inside {
            "negative"
        } else {
            "none"
        };
        signs.push(if s.median < 0.0 { '-' } else { '+' });
        mc_rows.push(vec![
            num(a2),
            json!(inside),
            json!(theory),
            num(s.median),
            num(s.mean),
            opt_num(s.std_error),
            num(s.fraction_negative),
        ]);
    }
    w.table(
        "repro_mc",
        &[
            "alpha_sq",
            "in_predicted_range",
            "theory_sign",
            "median",
            "mean",
            "std_error",
            "fraction_negative",
        ],
        &mc_rows,
    )?;
    w.json(
        "repro_summary",
        &json!({
            "feasible_theta": theta.map(|t| json!([num(t.lo), num(t.hi)])),
            "sweep": sweep_json(&sweep),
            "spectrum": spectrum_summary(&p)?,
            "simulation": { "n_paths": cfg.n_paths, "sim": cfg.sim },
        }),
    )?;
    Ok((
        Status::Success,
        format!(
            "alpha^2 envelope ({:.4}, {:.4}); median signs {}",
            2.0 * sweep.envelope.0,
            2.0 * sweep.envelope.1,
            signs.iter().collect::<String>()
        ),
    ))
}
