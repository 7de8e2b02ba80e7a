use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

use vortexlab::experiment::{load_manifest, run, summarize, ConfigError, ExperimentKind, RunConfig};

/// Vortices on flat tori and the Kazdan-Warner equations behind them.
#[derive(Parser)]
#[command(name = "vortexlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single Kazdan-Warner problem.
    Kw(RunArgs),
    /// Classical vortices at one epsilon.
    Classical(RunArgs),
    /// Mixed-sign vortices at one epsilon.
    Mixed(RunArgs),
    /// Generalized weighted vortices at one epsilon.
    Generalized(RunArgs),
    /// Continuation in epsilon with diagnostics at every stage.
    Sweep(RunArgs),
    /// Summarize the manifest of a finished run.
    Report {
        /// Run directory holding manifest.json.
        #[arg(long = "out", value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Single epsilon (replaces the schedule of a sweep).
    #[arg(long, value_name = "F")]
    epsilon: Option<f64>,
    /// N x N grid (sweeps then use it at every epsilon).
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
}

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn init_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("VORTEXLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("VORTEXLAB_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<RunConfig, (u8, String)> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| (EXIT_IO, format!("{}: {e}", args.config.display())))?;
    let mut config = RunConfig::from_toml(&text).map_err(|e| match e {
        ConfigError::Parse { .. } => (EXIT_INVALID, format!("{}: {e}", args.config.display())),
        other => (EXIT_INVALID, other.to_string()),
    })?;
    if config.kind != kind {
        return Err((
            EXIT_INVALID,
            format!(
                "{} declares kind = \"{}\" but the subcommand is `{}`",
                args.config.display(),
                config.kind.name(),
                kind.name()
            ),
        ));
    }
    if let Some(eps) = args.epsilon {
        config.override_epsilon(eps);
    }
    if let Some(n) = args.grid {
        config.override_grid(n);
    }
    if let Some(dir) = &args.out {
        config.output.dir = dir.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        LevelFilter::Error
    } else {
        LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID);
    }

    let (kind, args) = match &cli.command {
        Command::Kw(a) => (ExperimentKind::Kw, a),
        Command::Classical(a) => (ExperimentKind::Classical, a),
        Command::Mixed(a) => (ExperimentKind::Mixed, a),
        Command::Generalized(a) => (ExperimentKind::Generalized, a),
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
        Command::Report { out } => {
            return match load_manifest(out) {
                Ok(m) => {
                    print!("{}", summarize(&m));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_IO)
                }
            };
        }
    };
    let config = match load(kind, args) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(code);
        }
    };
    match run(&config) {
        Ok(manifest) => {
            if let Some(e) = &manifest.error {
                eprintln!("error: {}", e.message);
            }
            if !cli.quiet {
                print!("{}", summarize(&manifest));
            }
            ExitCode::from(manifest.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
