//! Experiment configuration: a flat TOML table whose keys mirror the
//! command-line flags. Values come from the command line first, then the
//! config file, then the built-in defaults.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "ERGOLAB_OUT";

pub const COMMANDS: [&str; 7] = [
    "finite-cohomology",
    "coboundary",
    "stepin",
    "induced",
    "spectrum",
    "lattice2d",
    "catmap-challenge",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_length: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lags: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curl: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "wide_seed")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        ExperimentConfig { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl ExperimentConfig {
    /// Fields of `self`, falling back to `lower` where unset.
    pub fn over(self, lower: ExperimentConfig) -> ExperimentConfig {
        overlay!(
            self, lower, command, system, set, mode, process, observable, orbit_length, lags, cells, samples, cap,
            bins, grid, curl, resolutions, a, b, seed, out
        )
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat table of scalars")
    }

    /// Built-in defaults for `command`; `dim` is the dimension of the
    /// system when known (for the default character).
    pub fn defaults(command: &str, dim: Option<usize>) -> ExperimentConfig {
        let mut d = ExperimentConfig {
            command: Some(command.to_string()),
            seed: Some(0),
            out: std::env::var(OUT_ENV).ok().filter(|s| !s.is_empty()),
            ..Default::default()
        };
        match command {
            "coboundary" | "stepin" => {
                d.orbit_length = Some(1_000_000);
                d.cells = Some(64);
            }
            "induced" => {
                d.orbit_length = Some(1_000_000);
                d.cells = Some(64);
                d.samples = Some(100_000);
            }
            "spectrum" => {
                d.orbit_length = Some(1_000_000);
                d.lags = Some(4096);
                d.bins = Some(256);
                d.process = Some("base".into());
                d.observable = Some(if dim == Some(2) { "char:1,0" } else { "char:1" }.into());
            }
            "lattice2d" => d.grid = Some("4x4".into()),
            "catmap-challenge" => {
                d.resolutions = Some(ergolab::challenge::DEFAULT_LADDER.to_vec());
                d.a = Some(0.5);
                d.b = Some(0.5);
                d.orbit_length = Some(1_000_000);
            }
            _ => {}
        }
        d
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn require<'a>(&self, field: &'a Option<String>, name: &str) -> Result<&'a str, CliError> {
        field.as_deref().ok_or_else(|| {
            CliError::Config(format!(
                "`{}` needs --{name}",
                self.command.as_deref().unwrap_or("this command")
            ))
        })
    }
}

/// Seeds above `i64::MAX` do not fit a TOML integer and are written as
/// strings; both forms are read back.
mod wide_seed {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if *x > i64::MAX as u64 => s.serialize_str(&x.to_string()),
            Some(x) => s.serialize_u64(*x),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Int(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => t.parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}
