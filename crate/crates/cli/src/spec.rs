//! Text forms of systems, sets, observables and numbers.
//!
//! ```text
//! system     rotation:golden | rotation:0.25 | rotation:0.1,0.7 | cat
//!            perm:1,0,3,2 | cycle:12 | identity:5 | random-perm:100
//! set        full | empty | interval:0,0.5 | intervals:0,0.1;0.5,0.7
//!            finite:0,2,5 | grid:16:rect:0.5,0.5 | grid:16:interval:0,0.25
//!            grid:16:random:0.3 | random-intervals:3 | cob:<set>
//! observable char:1 | char:1,0 | fiber
//! ```
//!
//! Random systems and sets draw from the experiment seed.

use ergolab::cobound::coboundary_apply;
use ergolab::dynsys::{FinitePermutation, System, TorusRotation};
use ergolab::msets::{FiniteSet, GridSet, IntervalUnion, Set};
use ergolab::spectral::Observable;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn bad(kind: &str, text: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid {kind} `{text}`: {why}"))
}

/// A non-negative integer, also written as `1e6` or `2.5e5`.
pub fn count(text: &str) -> std::result::Result<u64, String> {
    let t = text.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("`{text}` is not a non-negative integer")),
    }
}

pub fn size(text: &str) -> std::result::Result<usize, String> {
    count(text).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

fn floats(kind: &str, text: &str, body: &str) -> Result<Vec<f64>> {
    body.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| bad(kind, text, e)))
        .collect()
}

fn indices(kind: &str, text: &str, body: &str) -> Result<Vec<usize>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',').map(|s| size(s).map_err(|e| bad(kind, text, e))).collect()
}

pub fn system(text: &str, seed: u64) -> Result<System> {
    let (head, body) = text.split_once(':').unwrap_or((text, ""));
    let sys = match head {
        "cat" if body.is_empty() => System::Cat,
        "rotation" if body == "golden" => System::golden_rotation(),
        "rotation" => TorusRotation::new(floats("system", text, body)?)
            .map_err(|e| bad("system", text, e))?
            .into(),
        "perm" => FinitePermutation::new(indices("system", text, body)?)
            .map_err(|e| bad("system", text, e))?
            .into(),
        "cycle" | "identity" | "random-perm" => {
            let n = size(body).map_err(|e| bad("system", text, e))?;
            match head {
                "cycle" => FinitePermutation::cycle(n),
                "identity" => FinitePermutation::identity(n),
                _ => FinitePermutation::random(n, &mut ChaCha8Rng::seed_from_u64(seed)),
            }
            .into()
        }
        _ => return Err(bad("system", text, "unknown kind")),
    };
    Ok(sys)
}

pub fn set(text: &str, system: &System, seed: u64) -> Result<Set> {
    let err = |why: &dyn std::fmt::Display| bad("set", text, why);
    let (head, body) = text.split_once(':').unwrap_or((text, ""));
    let parsed: Set = match head {
        "cob" => {
            let b = set(body, system, seed)?;
            return coboundary_apply(system, &b).map_err(|e| err(&e));
        }
        "full" | "empty" => {
            let full: Set = match system {
                System::Finite { perm } => FiniteSet::full(perm.len()).into(),
                System::Cat => GridSet::full(1, 2).map_err(|e| err(&e))?.into(),
                System::Rotation { rotation } if rotation.dim() == 2 => GridSet::full(1, 2).map_err(|e| err(&e))?.into(),
                System::Rotation { .. } => IntervalUnion::full().into(),
            };
            if head == "full" {
                full
            } else {
                full.empty_like()
            }
        }
        "interval" => {
            let v = floats("set", text, body)?;
            let [a, b] = v[..] else {
                return Err(err(&"expected two endpoints"));
            };
            IntervalUnion::interval(a, b).map_err(|e| err(&e))?.into()
        }
        "intervals" => {
            let mut pairs = Vec::new();
            for part in body.split(';').filter(|p| !p.trim().is_empty()) {
                let v = floats("set", text, part)?;
                let [a, b] = v[..] else {
                    return Err(err(&"expected pairs `a,b` separated by `;`"));
                };
                pairs.push((a, b));
            }
            IntervalUnion::new(pairs).map_err(|e| err(&e))?.into()
        }
        "random-intervals" => {
            let k = size(body).map_err(|e| err(&e))?;
            IntervalUnion::random(k, &mut ChaCha8Rng::seed_from_u64(seed)).into()
        }
        "finite" => {
            let n = system
                .as_finite()
                .map(FinitePermutation::len)
                .ok_or_else(|| err(&"finite sets need a finite system"))?;
            FiniteSet::from_elements(n, &indices("set", text, body)?).map_err(|e| err(&e))?.into()
        }
        "grid" => {
            let mut parts = body.splitn(3, ':');
            let n = size(parts.next().unwrap_or("")).map_err(|e| err(&e))?;
            let kind = parts.next().unwrap_or("");
            let args = parts.next().unwrap_or("");
            let grid = match kind {
                "rect" => {
                    let v = floats("set", text, args)?;
                    let [a, b] = v[..] else {
                        return Err(err(&"expected `rect:a,b`"));
                    };
                    GridSet::rectangle(n, a, b)
                }
                "interval" => {
                    let v = floats("set", text, args)?;
                    let [a, b] = v[..] else {
                        return Err(err(&"expected `interval:a,b`"));
                    };
                    GridSet::interval(n, a, b)
                }
                "random" => {
                    let p: f64 = args.parse().map_err(|e| err(&e))?;
                    let dim = system.dim().unwrap_or(2);
                    GridSet::random(n, dim, p, &mut ChaCha8Rng::seed_from_u64(seed))
                }
                _ => return Err(err(&"grid sets are `rect`, `interval` or `random`")),
            };
            grid.map_err(|e| err(&e))?.into()
        }
        _ => return Err(err(&"unknown kind")),
    };
    parsed.check_system(system).map_err(|e| err(&e))?;
    Ok(parsed)
}

pub fn observable(text: &str) -> Result<Observable> {
    let (head, body) = text.split_once(':').unwrap_or((text, ""));
    match head {
        "fiber" if body.is_empty() => Ok(Observable::fiber_sign()),
        "char" => {
            let k = body
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|e| bad("observable", text, e)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Observable::character(k))
        }
        _ => Err(bad("observable", text, "expected `char:k,...` or `fiber`")),
    }
}

/// `MxN`, or a single `N` for a square grid.
pub fn grid_shape(text: &str) -> Result<(usize, usize)> {
    let parse = |s: &str| size(s).map_err(|e| bad("grid", text, e));
    match text.split_once(['x', 'X']) {
        Some((m, n)) => Ok((parse(m)?, parse(n)?)),
        None => {
            let n = parse(text)?;
            Ok((n, n))
        }
    }
}

pub fn index_list(kind: &str, text: &str) -> Result<Vec<usize>> {
    indices(kind, text, text)
}
