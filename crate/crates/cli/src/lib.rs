//! The `ergolab` experiment runner.
//!
//! Every run resolves an [`ExperimentConfig`] (flags over config file over
//! defaults), executes one experiment and prints a JSON summary that embeds
//! the resolved configuration, the seed and the tool version. With an output
//! directory (`--out` or `ERGOLAB_OUT`) the summary and any CSV data are also
//! written there.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 inconclusive verdict,
//! 4 runtime failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod spec;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use commands::{Outcome, Status};
pub use config::ExperimentConfig;
pub use error::CliError;

pub const TOOL: &str = "ergolab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// JSON schema every summary validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Parser)]
#[command(name = "ergolab", version, about = "Experiments on Z2 cocycles over measure-preserving systems")]
pub struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the JSON summary and CSV files.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, value_parser = spec::count)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct SystemSet {
    /// e.g. `rotation:golden`, `cat`, `perm:1,0,3,2`.
    #[arg(long)]
    pub system: Option<String>,
    /// e.g. `interval:0,0.5`, `grid:16:rect:0.5,0.5`, `cob:<set>`.
    #[arg(long)]
    pub set: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct Orbit {
    #[arg(long, alias = "orbit-length", value_parser = spec::count)]
    pub orbit: Option<u64>,
    #[arg(long, value_parser = spec::size)]
    pub cells: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cohomology ranks of a permutation, and optionally a coboundary witness.
    FiniteCohomology {
        /// Images `sigma(0),...,sigma(n-1)`; shorthand for `--system perm:...`.
        #[arg(long)]
        perm: Option<String>,
        #[command(flatten)]
        target: SystemSet,
    },
    /// Solve `dB = A` exactly, classify by the skew-product test, or apply `d`.
    Coboundary {
        #[command(flatten)]
        target: SystemSet,
        /// `solve`, `classify` or `apply`.
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        orbit: Orbit,
    },
    /// Ergodicity test for the skew product over `A`.
    Stepin {
        #[command(flatten)]
        target: SystemSet,
        #[command(flatten)]
        orbit: Orbit,
    },
    /// Return-time statistics and the ergodicity test for the square of `T_A`.
    Induced {
        #[command(flatten)]
        target: SystemSet,
        #[arg(long, value_parser = spec::count)]
        samples: Option<u64>,
        #[arg(long, value_parser = spec::count)]
        cap: Option<u64>,
        #[command(flatten)]
        orbit: Orbit,
    },
    /// Correlations, the weak-mixing statistic and a spectral density.
    Spectrum {
        #[command(flatten)]
        target: SystemSet,
        /// `base`, `induced` or `skew`.
        #[arg(long)]
        process: Option<String>,
        /// `char:k,...` or `fiber`.
        #[arg(long)]
        observable: Option<String>,
        #[arg(long, alias = "orbit-length", value_parser = spec::count)]
        orbit: Option<u64>,
        #[arg(long, value_parser = spec::size)]
        lags: Option<usize>,
        #[arg(long, value_parser = spec::size)]
        bins: Option<usize>,
        #[arg(long, value_parser = spec::count)]
        cap: Option<u64>,
    },
    /// Cochain complex of the `M x N` torus grid and curl solving.
    Lattice2d {
        /// `MxN` or `N`.
        #[arg(long)]
        grid: Option<String>,
        /// Cells (row-major) where the curl is 1.
        #[arg(long)]
        curl: Option<String>,
    },
    /// Resolution ladder for the cat-map rectangle `[0,a) x [0,b)`.
    CatmapChallenge {
        #[arg(long, value_delimiter = ',', value_parser = spec::size)]
        resolutions: Option<Vec<usize>>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, alias = "orbit-length", value_parser = spec::count)]
        orbit: Option<u64>,
    },
}

impl Cli {
    /// The configuration given on the command line alone.
    pub fn flags(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig {
            seed: self.seed,
            out: self.out.clone(),
            ..Default::default()
        };
        let target = |c: &mut ExperimentConfig, t: &SystemSet| {
            c.system = t.system.clone();
            c.set = t.set.clone();
        };
        let name = match &self.command {
            Command::FiniteCohomology { perm, target: t } => {
                target(&mut c, t);
                if let Some(p) = perm {
                    c.system = Some(format!("perm:{p}"));
                }
                "finite-cohomology"
            }
            Command::Coboundary { target: t, mode, orbit } => {
                target(&mut c, t);
                c.mode = mode.clone();
                c.orbit_length = orbit.orbit;
                c.cells = orbit.cells;
                "coboundary"
            }
            Command::Stepin { target: t, orbit } => {
                target(&mut c, t);
                c.orbit_length = orbit.orbit;
                c.cells = orbit.cells;
                "stepin"
            }
            Command::Induced { target: t, samples, cap, orbit } => {
                target(&mut c, t);
                c.samples = *samples;
                c.cap = *cap;
                c.orbit_length = orbit.orbit;
                c.cells = orbit.cells;
                "induced"
            }
            Command::Spectrum { target: t, process, observable, orbit, lags, bins, cap } => {
                target(&mut c, t);
                c.process = process.clone();
                c.observable = observable.clone();
                c.orbit_length = *orbit;
                c.lags = *lags;
                c.bins = *bins;
                c.cap = *cap;
                "spectrum"
            }
            Command::Lattice2d { grid, curl } => {
                c.grid = grid.clone();
                c.curl = curl.clone();
                "lattice2d"
            }
            Command::CatmapChallenge { resolutions, a, b, orbit } => {
                c.resolutions = resolutions.clone();
                c.a = *a;
                c.b = *b;
                c.orbit_length = *orbit;
                "catmap-challenge"
            }
        };
        c.command = Some(name.into());
        c
    }
}

/// Merges flags, file and defaults into the configuration that is run.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let flags = cli.flags();
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let (Some(a), Some(b)) = (&file.command, &flags.command) {
        if a != b {
            return Err(CliError::Config(format!("config file is for `{a}`, not `{b}`")));
        }
    }
    let command = flags.command.clone().expect("subcommand");
    let merged = flags.over(file);
    let dim = merged
        .system
        .as_deref()
        .and_then(|s| spec::system(s, merged.seed()).ok())
        .and_then(|s| s.dim());
    let mut defaults = ExperimentConfig::defaults(&command, dim);
    if let (Some(lags), Some(bins)) = (merged.lags, defaults.bins) {
        defaults.bins = Some(bins.min(lags.max(1)));
    }
    Ok(merged.over(defaults))
}

/// Builds the JSON summary for a finished run.
pub fn summary(cfg: &ExperimentConfig, outcome: &Outcome) -> String {
    let files: Vec<&str> = outcome.files.iter().map(|(name, _)| name.as_str()).collect();
    let doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": cfg.command,
        "seed": cfg.seed(),
        "config": cfg,
        "status": outcome.status.as_str(),
        "result": outcome.result,
        "files": files,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json");
    text.push('\n');
    text
}

fn write_outputs(dir: &Path, command: &str, summary: &str, outcome: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{command}.json")), summary)?;
    for (name, body) in &outcome.files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Everything a run produced, for the binary and for tests.
pub struct RunResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(cli: &Cli) -> RunResult {
    let failed = |e: CliError| RunResult {
        code: e.exit_code(),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    };
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(e) => return failed(e),
    };
    let outcome = match commands::run(&cfg) {
        Ok(o) => o,
        Err(e) => return failed(e),
    };
    let text = summary(&cfg, &outcome);
    if let Some(dir) = &cfg.out {
        let command = cfg.command.as_deref().unwrap_or("run");
        if let Err(e) = write_outputs(Path::new(dir), command, &text, &outcome) {
            return failed(e);
        }
    }
    let stderr = match outcome.status {
        Status::Ok => String::new(),
        s => format!("verdict: {}\n", s.as_str()),
    };
    RunResult {
        code: outcome.status.exit_code(),
        stdout: text,
        stderr,
    }
}

/// Parses `args` (program name first) and runs; clap usage errors exit 2.
pub fn run_args<I, T>(args: I) -> RunResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_cli(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                RunResult { code, stdout: text, stderr: String::new() }
            } else {
                RunResult { code, stdout: String::new(), stderr: text }
            }
        }
    }
}
