//! Induced (first-return) transformations `T_A` and return-time statistics.
//!
//! For ergodic `T` the mean return time to `A` is `1 / m(A)` (Kac), the factor
//! by which inducing scales entropy. `T_A^2` is ergodic exactly when `A` is not
//! a coboundary, which [`ta2_ergodicity_experiment`] tests statistically.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cobound::{check_orbit, cycle_positions, ErgodicityReport};
use crate::dynsys::{Point, System};
use crate::error::{Error, Result};
use crate::msets::Set;
use crate::partition::CellPartition;
use crate::stats::decide;

/// Proposals tried when sampling a random point of a set.
pub const MAX_REJECTION_DRAWS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnRecord {
    pub point: Point,
    pub return_time: u64,
    pub next: Point,
}

/// `max(10^6, 100 / m(A))`.
pub fn default_cap(a: &Set) -> u64 {
    let m = a.measure();
    let headroom = if m > 0.0 { (100.0 / m).ceil() } else { f64::INFINITY };
    headroom.max(1e6).min(u64::MAX as f64) as u64
}

/// First return of `x` (a point of `A`) to `A`.
pub fn induced_apply(system: &System, a: &Set, x: &Point, cap: u64) -> Result<ReturnRecord> {
    a.check_system(system)?;
    system.check_point(x)?;
    if !a.contains(x)? {
        return Err(Error::InvalidParameter("induced map starts outside the set".into()));
    }
    if cap == 0 {
        return Err(Error::InvalidParameter("cap must be at least 1".into()));
    }
    let mut y = x.clone();
    let t = first_return(system, a, &mut y, cap)?;
    Ok(ReturnRecord {
        point: x.clone(),
        return_time: t,
        next: y,
    })
}

/// Advances `y` to its first return to `a`; returns the number of steps.
#[inline]
fn first_return(system: &System, a: &Set, y: &mut Point, cap: u64) -> Result<u64> {
    for t in 1..=cap {
        system.step(y);
        if a.contains_unchecked(y) {
            return Ok(t);
        }
    }
    Err(Error::CapExceeded { cap })
}

/// The `T_A` orbit `x, T_A x, ..., T_A^{steps-1} x`.
pub fn induced_orbit(system: &System, a: &Set, x: &Point, steps: usize, cap: u64) -> Result<Vec<Point>> {
    if steps == 0 {
        return Ok(Vec::new());
    }
    let mut current = induced_apply(system, a, x, cap)?;
    let mut out = Vec::with_capacity(steps);
    out.push(x.clone());
    while out.len() < steps {
        out.push(current.next.clone());
        if out.len() < steps {
            let mut y = current.next.clone();
            first_return(system, a, &mut y, cap)?;
            current.next = y;
        }
    }
    Ok(out)
}

/// A uniform random point of `A` by rejection from the invariant measure.
pub fn sample_in<R: Rng + ?Sized>(system: &System, a: &Set, rng: &mut R) -> Result<Point> {
    for _ in 0..MAX_REJECTION_DRAWS {
        let x = system.sample_point(rng);
        if a.contains_unchecked(&x) {
            return Ok(x);
        }
    }
    Err(Error::SamplingFailed(MAX_REJECTION_DRAWS))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    /// Returns observed within the cap.
    pub count: u64,
    pub mean: f64,
    pub histogram: BTreeMap<u64, u64>,
    pub cap_hits: u64,
    pub cap: u64,
    pub seed: u64,
}

impl ReturnStats {
    /// `return_time,count` rows in increasing return time.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("return_time,count\n");
        for (t, c) in &self.histogram {
            writeln!(s, "{t},{c}").expect("write to string");
        }
        s
    }
}

/// Return times of `samples` random points of `A`.
pub fn return_time_stats(system: &System, a: &Set, samples: u64, cap: Option<u64>, seed: u64) -> Result<ReturnStats> {
    a.check_system(system)?;
    if a.is_null() {
        return Err(Error::InvalidParameter("return times need a set of positive measure".into()));
    }
    let cap = cap.unwrap_or_else(|| default_cap(a));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = BTreeMap::new();
    let (mut count, mut total, mut cap_hits) = (0u64, 0u128, 0u64);
    for _ in 0..samples {
        let mut x = sample_in(system, a, &mut rng)?;
        match first_return(system, a, &mut x, cap) {
            Ok(t) => {
                *histogram.entry(t).or_insert(0) += 1;
                count += 1;
                total += t as u128;
            }
            Err(Error::CapExceeded { .. }) => cap_hits += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(ReturnStats {
        count,
        mean: if count > 0 { total as f64 / count as f64 } else { f64::NAN },
        histogram,
        cap_hits,
        cap,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedParams {
    /// Number of recorded `T_A^2` orbit points.
    pub orbit_length: u64,
    pub cells: usize,
    pub seed: u64,
    pub cap: Option<u64>,
}

impl Default for InducedParams {
    fn default() -> Self {
        InducedParams {
            orbit_length: 100_000,
            cells: 64,
            seed: 0,
            cap: None,
        }
    }
}

/// Equidistribution of a `T_A^2` orbit in `A` with respect to `m(. | A)`.
///
/// Torus systems use the uniform cell partition, each cell weighted by
/// `m(cell n A) / m(A)`; cells missing `A` drop out. Finite systems restrict
/// to the points of `A` on the start's cycle, one cell per point.
pub fn ta2_ergodicity_experiment(system: &System, a: &Set, params: &InducedParams) -> Result<ErgodicityReport> {
    a.check_system(system)?;
    if a.is_null() {
        return Err(Error::InvalidParameter("inducing needs a set of positive measure".into()));
    }
    let cap = params.cap.unwrap_or_else(|| default_cap(a));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let start = sample_in(system, a, &mut rng)?;
    let m = params.orbit_length;

    let (counts, expected) = match system {
        System::Finite { perm } => {
            let (pos, _) = cycle_positions(perm, start.as_index().expect("finite point"));
            let members: Vec<usize> = (0..perm.len())
                .filter(|&x| pos[x] != usize::MAX && a.contains_unchecked(&Point::Index(x)))
                .collect();
            check_orbit(m, members.len())?;
            let mut slot = vec![usize::MAX; perm.len()];
            for (k, &x) in members.iter().enumerate() {
                slot[x] = k;
            }
            let counts = ta2_histogram(system, a, &start, m, cap, members.len(), |x| {
                slot[x.as_index().unwrap()]
            })?;
            (counts, vec![m as f64 / members.len() as f64; members.len()])
        }
        _ => {
            let part = CellPartition::for_system(system, params.cells)?;
            check_orbit(m, part.len())?;
            let total = a.measure();
            let expected = (0..part.len())
                .map(|c| {
                    let (lo, hi) = part.bounds(c);
                    m as f64 * a.overlap(&lo, &hi) / total
                })
                .collect();
            let counts = ta2_histogram(system, a, &start, m, cap, part.len(), |x| part.index(x))?;
            (counts, expected)
        }
    };
    let out = decide(&counts, &expected, false);
    Ok(ErgodicityReport {
        test: "induced-square".into(),
        verdict: out.verdict,
        statistic: out.statistic,
        threshold: out.threshold,
        dof: out.dof,
        decisive_empty_bins: out.decisive_empty_bins,
        cells: counts.len(),
        orbit_length: m,
        seed: params.seed,
        start,
    })
}

fn ta2_histogram(
    system: &System,
    a: &Set,
    start: &Point,
    steps: u64,
    cap: u64,
    bins: usize,
    cell: impl Fn(&Point) -> usize,
) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; bins];
    let mut x = start.clone();
    for _ in 0..steps {
        counts[cell(&x)] += 1;
        first_return(system, a, &mut x, cap)?;
        first_return(system, a, &mut x, cap)?;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{FinitePermutation, TorusRotation};
    use crate::msets::{FiniteSet, GridSet, IntervalUnion};
    use crate::stats::Verdict;

    fn four_cycle() -> System {
        FinitePermutation::cycle(4).into()
    }

    fn fs(e: &[usize]) -> Set {
        FiniteSet::from_elements(4, e).unwrap().into()
    }

    fn t(x: f64) -> Point {
        Point::torus(vec![x]).unwrap()
    }

    #[test]
    fn finite_return_examples() {
        let r = induced_apply(&four_cycle(), &fs(&[0]), &Point::Index(0), 10).unwrap();
        assert_eq!((r.return_time, r.next), (4, Point::Index(0)));
        let r = induced_apply(&four_cycle(), &fs(&[0, 2]), &Point::Index(0), 10).unwrap();
        assert_eq!((r.return_time, r.next), (2, Point::Index(2)));
    }

    #[test]
    fn rational_rotation_return() {
        let s: System = TorusRotation::new(vec![0.25]).unwrap().into();
        let a: Set = IntervalUnion::interval(0.0, 0.25).unwrap().into();
        let r = induced_apply(&s, &a, &t(0.1), 100).unwrap();
        assert_eq!(r.return_time, 4);
        assert!(r.next.as_torus().unwrap().distance(t(0.1).as_torus().unwrap()) < 1e-12);
    }

    #[test]
    fn cap_and_start_errors() {
        let s: System = TorusRotation::new(vec![0.25]).unwrap().into();
        let a: Set = IntervalUnion::interval(0.0, 0.25).unwrap().into();
        assert_eq!(induced_apply(&s, &a, &t(0.1), 3), Err(Error::CapExceeded { cap: 3 }));
        assert!(induced_apply(&s, &a, &t(0.5), 10).is_err());
    }

    #[test]
    fn induced_orbit_examples() {
        let orbit = induced_orbit(&four_cycle(), &fs(&[0, 2]), &Point::Index(0), 4, 10).unwrap();
        assert_eq!(orbit, [0, 2, 0, 2].map(Point::Index));
        let s: System = TorusRotation::new(vec![0.25]).unwrap().into();
        let a: Set = IntervalUnion::interval(0.0, 0.5).unwrap().into();
        let orbit = induced_orbit(&s, &a, &t(0.0), 4, 10).unwrap();
        let xs: Vec<f64> = orbit.iter().map(|p| p.as_torus().unwrap().coords()[0]).collect();
        assert_eq!(xs, [0.0, 0.25, 0.0, 0.25]);
        assert!(induced_orbit(&s, &a, &t(0.0), 0, 10).unwrap().is_empty());
    }

    #[test]
    fn return_record_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = System::Cat;
        let a: Set = GridSet::rectangle(8, 0.25, 0.5).unwrap().into();
        for _ in 0..200 {
            let x = sample_in(&s, &a, &mut rng).unwrap();
            let r = induced_apply(&s, &a, &x, 1_000_000).unwrap();
            assert_eq!(s.iterate(&x, r.return_time as i64).unwrap(), r.next);
            assert!(a.contains(&r.next).unwrap());
            for j in 1..r.return_time as i64 {
                assert!(!a.contains(&s.iterate(&x, j).unwrap()).unwrap());
            }
            // two returns are one step of the squared induced map
            let twice = induced_apply(&s, &a, &r.next, 1_000_000).unwrap();
            let orbit = induced_orbit(&s, &a, &x, 3, 1_000_000).unwrap();
            assert_eq!(orbit[2], twice.next);
        }
    }

    #[test]
    fn finite_mean_return_is_exact() {
        let stats = return_time_stats(&four_cycle(), &fs(&[0]), 1000, None, 1).unwrap();
        assert_eq!(stats.mean, 4.0);
        assert_eq!(stats.to_csv(), "return_time,count\n4,1000\n");
    }

    #[test]
    fn kac_on_golden_rotation() {
        let a: Set = IntervalUnion::interval(0.0, 0.5).unwrap().into();
        let stats = return_time_stats(&System::golden_rotation(), &a, 100_000, None, 5).unwrap();
        assert!((stats.mean - 2.0).abs() / 2.0 < 0.01, "mean {}", stats.mean);
        assert_eq!(stats.cap_hits, 0);
    }

    #[test]
    fn kac_on_cat_map() {
        let a: Set = GridSet::rectangle(4, 0.25, 0.25).unwrap().into();
        let stats = return_time_stats(&System::Cat, &a, 100_000, None, 6).unwrap();
        assert!((stats.mean - 16.0).abs() / 16.0 < 0.02, "mean {}", stats.mean);
    }

    #[test]
    fn cap_hits_are_excluded_from_the_mean() {
        let a: Set = IntervalUnion::interval(0.0, 0.1).unwrap().into();
        let stats = return_time_stats(&System::golden_rotation(), &a, 1000, Some(9), 2).unwrap();
        assert!(stats.cap_hits > 0);
        assert!(stats.histogram.keys().all(|&t| t <= 9));
        assert_eq!(stats.count + stats.cap_hits, 1000);
    }

    #[test]
    fn null_sets_fail_sampling() {
        let a: Set = GridSet::empty(4, 2).unwrap().into();
        assert!(return_time_stats(&System::Cat, &a, 10, None, 0).is_err());
        let tiny: Set = IntervalUnion::interval(0.5, 0.5 + 1e-11).unwrap().into();
        assert_eq!(sample_in(&System::golden_rotation(), &tiny, &mut ChaCha8Rng::seed_from_u64(0)), Err(Error::SamplingFailed(MAX_REJECTION_DRAWS)));
    }

    #[test]
    fn ta2_finite_examples() {
        let p = InducedParams { orbit_length: 200, cells: 4, seed: 0, cap: None };
        let even = ta2_ergodicity_experiment(&four_cycle(), &fs(&[0, 1]), &p).unwrap();
        assert_eq!(even.verdict, Verdict::NonErgodic);
        let odd = ta2_ergodicity_experiment(&four_cycle(), &fs(&[0, 1, 2]), &p).unwrap();
        assert_eq!(odd.verdict, Verdict::ErgodicConsistent);
    }

    #[test]
    fn ta2_on_golden_rotation() {
        let s = System::golden_rotation();
        let p = InducedParams { orbit_length: 100_000, cells: 64, seed: 4, cap: None };
        let a: Set = IntervalUnion::interval(0.0, 0.5).unwrap().into();
        assert_eq!(ta2_ergodicity_experiment(&s, &a, &p).unwrap().verdict, Verdict::ErgodicConsistent);
        let b: Set = IntervalUnion::interval(0.0, 0.25).unwrap().into();
        let db = crate::cobound::coboundary_apply(&s, &b).unwrap();
        assert_eq!(ta2_ergodicity_experiment(&s, &db, &p).unwrap().verdict, Verdict::NonErgodic);
    }

    #[test]
    fn induced_map_preserves_conditional_measure() {
        // occupation of a T_A orbit matches m(cell n A) / m(A)
        let s = System::Cat;
        let a: Set = GridSet::rectangle(8, 0.5, 0.75).unwrap().into();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = sample_in(&s, &a, &mut rng).unwrap();
        let orbit = induced_orbit(&s, &a, &x, 50_000, 1_000_000).unwrap();
        let part = CellPartition::for_system(&s, 16).unwrap();
        let mut counts = vec![0u64; part.len()];
        for p in &orbit {
            counts[part.index(p)] += 1;
        }
        let expected: Vec<f64> = (0..part.len())
            .map(|c| {
                let (lo, hi) = part.bounds(c);
                orbit.len() as f64 * a.overlap(&lo, &hi) / a.measure()
            })
            .collect();
        assert_eq!(decide(&counts, &expected, false).verdict, Verdict::ErgodicConsistent);
    }
}
