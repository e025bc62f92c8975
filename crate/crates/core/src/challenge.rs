//! Is the square `Y = [0, a) x [0, b)` a coboundary for the cat map?
//!
//! No answer is known. At grid resolution `N` the cat map permutes the
//! `N x N` cells exactly, and there the question has an exact answer: `Y` is
//! a coboundary of the cell permutation iff every cycle meets it an even
//! number of times. Each rung of the ladder reports that answer, checks it
//! against the skew-product test run cycle by cycle on the finite model, and
//! runs the continuous skew-product test binned on the same `N x N` grid.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cobound::{solve_coboundary_finite, stepin_test, stepin_test_from, ErgodicityReport, StepinParams};
use crate::dynsys::{CatMap, Point, System};
use crate::error::Result;
use crate::msets::{FiniteSet, GridSet, Set};
use crate::stats::Verdict;

pub const DEFAULT_LADDER: [usize; 5] = [8, 16, 32, 64, 128];
/// Per-cycle finite tests run this many times around the cycle.
pub const CYCLE_PASSES: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChallengeParams {
    pub resolutions: Vec<usize>,
    pub a: f64,
    pub b: f64,
    /// Orbit length of the continuous test at every rung.
    pub orbit_length: u64,
    pub seed: u64,
}

impl Default for ChallengeParams {
    fn default() -> Self {
        ChallengeParams {
            resolutions: DEFAULT_LADDER.to_vec(),
            a: 0.5,
            b: 0.5,
            orbit_length: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTally {
    pub agree: usize,
    pub disagree: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub n: usize,
    pub measure: f64,
    pub cycle_count: usize,
    /// Cycle length to number of cycles of that length.
    pub cycle_lengths: BTreeMap<usize, usize>,
    /// Cycles meeting `Y` an odd number of times.
    pub odd_cycles: usize,
    /// Fraction of cells lying on odd cycles.
    pub odd_mass: f64,
    pub finite_coboundary: bool,
    /// Size of the normalized witness `Z` with `dZ = Y` on the grid.
    pub witness_cells: Option<usize>,
    /// Per-cycle skew-product tests scored against the cycle parity.
    pub cycle_tests: CycleTally,
    pub consistent: bool,
    /// Largest statistic over odd cycles and smallest over even ones, with
    /// the threshold each was compared to.
    pub max_odd_statistic: Option<(f64, f64)>,
    pub min_even_statistic: Option<(f64, f64)>,
    pub continuous: ErgodicityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChallengeReport {
    pub params: ChallengeParams,
    pub rungs: Vec<Rung>,
    pub finite_trend: Vec<bool>,
    pub odd_mass_trend: Vec<f64>,
    pub continuous_trend: Vec<Verdict>,
    pub all_consistent: bool,
}

pub fn run_rung(n: usize, params: &ChallengeParams) -> Result<Rung> {
    let grid = GridSet::rectangle(n, params.a, params.b)?;
    let perm = CatMap::cell_permutation(n);
    let y = FiniteSet::from_bits(grid.bits().clone());
    let cert = solve_coboundary_finite(&perm, &y)?;
    let cycles = perm.cycles();
    let odd: Vec<bool> = {
        let mut odd = vec![false; cycles.len()];
        for o in &cert.obstruction {
            odd[o.cycle] = true;
        }
        odd
    };
    let finite: System = perm.clone().into();
    let finite_set: Set = y.into();
    let mut tally = CycleTally::default();
    let mut max_odd: Option<(f64, f64)> = None;
    let mut min_even: Option<(f64, f64)> = None;
    let mut cycle_lengths = BTreeMap::new();
    let mut odd_cells = 0;
    for (cycle, &is_odd) in cycles.iter().zip(&odd) {
        *cycle_lengths.entry(cycle.len()).or_insert(0) += 1;
        if is_odd {
            odd_cells += cycle.len();
        }
        let local = StepinParams {
            orbit_length: CYCLE_PASSES * cycle.len() as u64,
            cells: 1,
            seed: params.seed,
        };
        let report = stepin_test_from(&finite, &finite_set, Point::Index(cycle[0]), &local)?;
        let pair = (report.statistic, report.threshold);
        match (report.verdict, is_odd) {
            (Verdict::Inconclusive, _) => tally.inconclusive += 1,
            (Verdict::ErgodicConsistent, true) | (Verdict::NonErgodic, false) => tally.agree += 1,
            _ => tally.disagree += 1,
        }
        if is_odd {
            if max_odd.is_none_or(|(s, _)| pair.0 > s) {
                max_odd = Some(pair);
            }
        } else if min_even.is_none_or(|(s, _)| pair.0 < s) {
            min_even = Some(pair);
        }
    }
    let per_axis = n.min(((params.orbit_length / 20) as f64).sqrt() as usize).max(1);
    let continuous = stepin_test(
        &System::Cat,
        &grid.into(),
        &StepinParams {
            orbit_length: params.orbit_length,
            cells: per_axis * per_axis,
            seed: params.seed,
        },
    )?;
    Ok(Rung {
        n,
        measure: params.a * params.b,
        cycle_count: cycles.len(),
        cycle_lengths,
        odd_cycles: cert.obstruction.len(),
        odd_mass: odd_cells as f64 / (n * n) as f64,
        finite_coboundary: cert.solvable,
        witness_cells: cert.witness.as_ref().map(|w| match w {
            Set::Finite(f) => f.len(),
            _ => unreachable!("finite witness"),
        }),
        consistent: tally.disagree == 0 && tally.inconclusive == 0,
        cycle_tests: tally,
        max_odd_statistic: max_odd,
        min_even_statistic: min_even,
        continuous,
    })
}

pub fn run_challenge(params: &ChallengeParams) -> Result<ChallengeReport> {
    let rungs = params
        .resolutions
        .iter()
        .map(|&n| run_rung(n, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChallengeReport {
        params: params.clone(),
        finite_trend: rungs.iter().map(|r| r.finite_coboundary).collect(),
        odd_mass_trend: rungs.iter().map(|r| r.odd_mass).collect(),
        continuous_trend: rungs.iter().map(|r| r.continuous.verdict).collect(),
        all_consistent: rungs.iter().all(|r| r.consistent),
        rungs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rungs_are_internally_consistent() {
        let params = ChallengeParams {
            resolutions: vec![2, 4, 8, 16],
            orbit_length: 200_000,
            ..ChallengeParams::default()
        };
        let report = run_challenge(&params).unwrap();
        for r in &report.rungs {
            assert!(r.consistent, "N = {}: {:?}", r.n, r.cycle_tests);
            assert_eq!(r.cycle_lengths.iter().map(|(l, c)| l * c).sum::<usize>(), r.n * r.n);
            assert_eq!(r.finite_coboundary, r.odd_cycles == 0);
            assert_eq!(r.witness_cells.is_some(), r.finite_coboundary);
            assert!(r.continuous.statistic.is_finite());
        }
        assert!(report.all_consistent);
    }

    #[test]
    fn fixed_point_cell_decides_n2() {
        // at N = 2 the cell (0, 0) is a fixed point and it is all of Y
        let r = run_rung(2, &ChallengeParams { orbit_length: 100_000, ..ChallengeParams::default() }).unwrap();
        assert!(!r.finite_coboundary);
        assert!(r.odd_cycles >= 1);
    }

    #[test]
    fn rungs_are_reproducible() {
        let params = ChallengeParams {
            resolutions: vec![8],
            orbit_length: 50_000,
            seed: 3,
            ..ChallengeParams::default()
        };
        assert_eq!(run_challenge(&params).unwrap(), run_challenge(&params).unwrap());
    }
}
