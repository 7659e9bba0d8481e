use std::path::PathBuf;
use std::process::ExitCode;

use chafee_core::experiment::{run, Command, ExperimentConfig, OutputFormat};
use chafee_core::NoisePlacement;
use clap::{Parser, Subcommand, ValueEnum};

/// Noise-stabilisation ranges and SPDE Monte Carlo for the Chafee-Infante
/// equation with dynamical boundary conditions.
#[derive(Parser, Debug)]
#[command(name = "chafee", version)]
struct Cli {
    /// JSON configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base RNG seed; path k uses stream k.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Linear growth rate in the bulk.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Damping rate in the dynamical boundary condition.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Noise intensity.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Where the noise acts.
    #[arg(long, global = true, value_enum)]
    placement: Option<Placement>,
    /// Monte Carlo paths.
    #[arg(long, global = true)]
    n_paths: Option<usize>,
    /// Simulated time horizon.
    #[arg(long, global = true)]
    t_final: Option<f64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Tabulate C_theta, C*_theta and lambda_1 over the theta grid.
    Constants,
    /// Admissible noise intensities: theta sweep, envelope, closed forms.
    Ranges,
    /// Roots of the characteristic equation and the instability verdict.
    Spectrum,
    /// One simulated path of log ||U||_H^2.
    Simulate,
    /// Monte Carlo Lyapunov estimates.
    Mc,
    /// Median Lyapunov estimate over an alpha^2 grid, both placements.
    Sweep,
    /// Canned reproduction of the beta = 0.02, lambda = 0.001 example.
    ReproSec5,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Placement {
    Boundary,
    Interior,
    None,
}

fn build_config(cli: &Cli) -> chafee_core::Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(path), _) => ExperimentConfig::from_json_file(path)?,
        (None, Cmd::ReproSec5) => ExperimentConfig {
            sim: ExperimentConfig::repro_sim(),
            ..ExperimentConfig::default()
        },
        (None, _) => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.sim.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(f) = cli.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(v) = cli.beta {
        cfg.model.beta = v;
    }
    if let Some(v) = cli.lambda {
        cfg.model.lambda = v;
    }
    if let Some(v) = cli.alpha {
        cfg.model.alpha = v;
    }
    if let Some(p) = cli.placement {
        cfg.model.placement = match p {
            Placement::Boundary => NoisePlacement::Boundary,
            Placement::Interior => NoisePlacement::Interior,
            Placement::None => NoisePlacement::None,
        };
    }
    if let Some(n) = cli.n_paths {
        cfg.n_paths = n;
    }
    if let Some(t) = cli.t_final {
        cfg.sim.t_final = t;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Constants => Command::Constants,
        Cmd::Ranges => Command::Ranges,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Simulate => Command::Simulate,
        Cmd::Mc => Command::Mc,
        Cmd::Sweep => Command::Sweep,
        Cmd::ReproSec5 => Command::ReproSec5,
    };
    let result = build_config(&cli).and_then(|cfg| run(command, &cfg));
    match result {
        Ok(out) => {
            println!("{}: {}", command.name(), out.message);
            for f in &out.files {
                println!("  wrote {f}");
            }
            ExitCode::from(out.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
