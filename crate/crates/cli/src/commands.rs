//! One function per subcommand, each turning a resolved configuration into a
//! JSON result and any CSV side files.

use ergolab::bits::BitVector;
use ergolab::challenge::{run_challenge, ChallengeParams};
use ergolab::cobound::{classify_coboundary, coboundary_apply, cohomology_rank_finite, solve_coboundary_finite, stepin_test, CoboundaryVerdict, StepinParams};
use ergolab::cohomo2d::{cohomology_dims, json as cochain_json, solve_curl, Action2D, Cochain2};
use ergolab::dynsys::System;
use ergolab::induced::{return_time_stats, ta2_ergodicity_experiment, InducedParams};
use ergolab::msets::Set;
use ergolab::spectral::{autocorrelation, classify_wiener, spectral_density, wiener_statistic, Process, SpectralVerdict};
use ergolab::stats::Verdict;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::spec;

type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
    Inconsistent,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Inconclusive => "inconclusive",
            Status::Inconsistent => "inconsistent",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 3,
            Status::Inconsistent => 4,
        }
    }

    fn from_verdict(v: Verdict) -> Status {
        if v == Verdict::Inconclusive {
            Status::Inconclusive
        } else {
            Status::Ok
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
    /// File name and contents.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            status: Status::Ok,
            result,
            files: Vec::new(),
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn system_of(cfg: &ExperimentConfig) -> Result<System> {
    spec::system(cfg.require(&cfg.system, "system")?, cfg.seed())
}

fn set_of(cfg: &ExperimentConfig, system: &System) -> Result<Set> {
    spec::set(cfg.require(&cfg.set, "set")?, system, cfg.seed())
}

fn stepin_params(cfg: &ExperimentConfig) -> StepinParams {
    StepinParams {
        orbit_length: cfg.orbit_length.unwrap_or(1_000_000),
        cells: cfg.cells.unwrap_or(64),
        seed: cfg.seed(),
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.command.as_deref().unwrap_or("") {
        "finite-cohomology" => finite_cohomology(cfg),
        "coboundary" => coboundary(cfg),
        "stepin" => stepin(cfg),
        "induced" => induced(cfg),
        "spectrum" => spectrum(cfg),
        "lattice2d" => lattice2d(cfg),
        "catmap-challenge" => catmap_challenge(cfg),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}

fn finite_cohomology(cfg: &ExperimentConfig) -> Result<Outcome> {
    let system = system_of(cfg)?;
    let perm = system
        .as_finite()
        .ok_or_else(|| CliError::Config("finite-cohomology needs a permutation".into()))?;
    let ranks = cohomology_rank_finite(perm);
    let mut result = json!({
        "n": ranks.n,
        "k": ranks.k,
        "coboundary_dim": ranks.coboundary_dim,
        "h1_dim": ranks.n - ranks.coboundary_dim,
        "cycles": perm.cycles(),
    });
    if let Some(text) = &cfg.set {
        let a = match spec::set(text, &system, cfg.seed())? {
            Set::Finite(a) => a,
            _ => unreachable!("sets on a finite system are finite"),
        };
        result["certificate"] = to_value(&solve_coboundary_finite(perm, &a)?);
    }
    Ok(Outcome::ok(result))
}

fn coboundary(cfg: &ExperimentConfig) -> Result<Outcome> {
    let system = system_of(cfg)?;
    let a = set_of(cfg, &system)?;
    let default_mode = if system.as_finite().is_some() { "solve" } else { "classify" };
    match cfg.mode.as_deref().unwrap_or(default_mode) {
        "apply" => Ok(Outcome::ok(json!({
            "mode": "apply",
            "input": to_value(&a),
            "coboundary": to_value(&coboundary_apply(&system, &a)?),
        }))),
        "solve" => {
            let perm = system
                .as_finite()
                .ok_or_else(|| CliError::Config("exact solving needs a permutation; use --mode classify".into()))?;
            let Set::Finite(fa) = &a else { unreachable!("finite system") };
            Ok(Outcome::ok(json!({
                "mode": "solve",
                "certificate": to_value(&solve_coboundary_finite(perm, fa)?),
            })))
        }
        "classify" => {
            let c = classify_coboundary(&system, &a, &stepin_params(cfg))?;
            Ok(Outcome {
                status: if c.verdict == CoboundaryVerdict::Inconclusive { Status::Inconclusive } else { Status::Ok },
                result: json!({"mode": "classify", "verdict": to_value(&c.verdict), "measure": a.measure(), "report": to_value(&c.report)}),
                files: Vec::new(),
            })
        }
        other => Err(CliError::Config(format!("unknown mode `{other}`; use solve, classify or apply"))),
    }
}

fn stepin(cfg: &ExperimentConfig) -> Result<Outcome> {
    let system = system_of(cfg)?;
    let a = set_of(cfg, &system)?;
    let report = stepin_test(&system, &a, &stepin_params(cfg))?;
    let mut result = to_value(&report);
    result["measure"] = json!(a.measure());
    Ok(Outcome {
        status: Status::from_verdict(report.verdict),
        result,
        files: Vec::new(),
    })
}

fn induced(cfg: &ExperimentConfig) -> Result<Outcome> {
    let system = system_of(cfg)?;
    let a = set_of(cfg, &system)?;
    let seed = cfg.seed();
    let stats = return_time_stats(&system, &a, cfg.samples.unwrap_or(100_000), cfg.cap, seed)?;
    let params = InducedParams {
        orbit_length: cfg.orbit_length.unwrap_or(1_000_000),
        cells: cfg.cells.unwrap_or(64),
        seed,
        cap: cfg.cap,
    };
    let square = ta2_ergodicity_experiment(&system, &a, &params)?;
    let kac = 1.0 / a.measure();
    Ok(Outcome {
        status: Status::from_verdict(square.verdict),
        result: json!({
            "measure": a.measure(),
            "kac_mean": kac,
            "relative_error": (stats.mean - kac).abs() / kac,
            "return_times": to_value(&stats),
            "induced_square": to_value(&square),
        }),
        files: vec![("return_times.csv".into(), stats.to_csv())],
    })
}

fn spectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let system = system_of(cfg)?;
    let process = match cfg.process.as_deref().unwrap_or("base") {
        "base" => Process::Base,
        "induced" => Process::Induced {
            set: set_of(cfg, &system)?,
            cap: cfg.cap,
        },
        "skew" => Process::Skew {
            set: set_of(cfg, &system)?,
        },
        other => return Err(CliError::Config(format!("unknown process `{other}`; use base, induced or skew"))),
    };
    let f = spec::observable(cfg.require(&cfg.observable, "observable")?)?;
    let c = autocorrelation(
        &system,
        &process,
        &f,
        cfg.orbit_length.unwrap_or(1_000_000),
        cfg.lags.unwrap_or(4096),
        cfg.seed(),
    )?;
    let wiener = wiener_statistic(&c)?;
    let verdict = classify_wiener(wiener);
    let density = spectral_density(&c, cfg.bins.unwrap_or(256))?;
    let (peak_bin, peak_mass) = density.peak();
    Ok(Outcome {
        status: if verdict == SpectralVerdict::Inconclusive { Status::Inconclusive } else { Status::Ok },
        result: json!({
            "process": process.name(),
            "observable": to_value(&f),
            "wiener": wiener,
            "verdict": to_value(&verdict),
            "c0": c.c[0].re,
            "mean": [c.mean.re, c.mean.im],
            "lags": c.lags,
            "orbit_length": c.orbit_length,
            "bins": density.bins,
            "total_mass": density.total_mass,
            "peak_bin": peak_bin,
            "peak_mass": peak_mass,
        }),
        files: vec![
            ("correlation.csv".into(), c.to_csv()),
            ("density.csv".into(), density.to_csv()),
        ],
    })
}

fn lattice2d(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (m, n) = spec::grid_shape(cfg.require(&cfg.grid, "grid")?)?;
    let action = Action2D::torus_grid(m, n)?;
    let dims = cohomology_dims(&action);
    let mut result = json!({"m": m, "n": n, "dims": to_value(&dims)});
    if let Some(text) = &cfg.curl {
        let cells = spec::index_list("curl", text)?;
        let f = Cochain2(BitVector::from_indices(m * n, &cells)?);
        let solution = solve_curl(&action, &f)?;
        result["curl"] = json!({
            "f": cochain_json::write_bits(action.shape(), &f.0),
            "parity": f.0.count_ones() % 2,
            "solvable": solution.is_some(),
            "solution": solution.map(|pq| cochain_json::write_pair(action.shape(), &pq)),
        });
    }
    Ok(Outcome::ok(result))
}

fn catmap_challenge(cfg: &ExperimentConfig) -> Result<Outcome> {
    let params = ChallengeParams {
        resolutions: cfg.resolutions.clone().unwrap_or_else(|| ergolab::challenge::DEFAULT_LADDER.to_vec()),
        a: cfg.a.unwrap_or(0.5),
        b: cfg.b.unwrap_or(0.5),
        orbit_length: cfg.orbit_length.unwrap_or(1_000_000),
        seed: cfg.seed(),
    };
    let report = run_challenge(&params)?;
    Ok(Outcome {
        status: if report.all_consistent { Status::Ok } else { Status::Inconsistent },
        result: to_value(&report),
        files: Vec::new(),
    })
}

