//! The coboundary operator `dB = 1_B o T + 1_B` over GF(2), exact solving and
//! cohomology ranks for permutations, and the skew-product ergodicity test
//! that separates coboundaries from non-coboundaries statistically.
//!
//! A set `A` is a coboundary when `A = dB` for some `B`, i.e. `A` is exactly
//! the set of points `x` for which one of `x`, `Tx` lies in `B`. Then the
//! skew product `(x, s) -> (Tx, s + 1_A(x))` keeps `s + 1_B(x)` constant and
//! is not ergodic; otherwise it is.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynsys::{FinitePermutation, Point, System};
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::msets::{FiniteSet, Set};
use crate::partition::CellPartition;
use crate::stats::{decide, Verdict};

/// `dB`: the points where exactly one of `x`, `Tx` lies in `B`.
pub fn coboundary_apply(system: &System, b: &Set) -> Result<Set> {
    b.pullback(system)
        .map_err(|e| match e {
            Error::Incompatible { system, set, .. } => Error::Incompatible {
                op: "coboundary",
                system,
                set,
            },
            other => other,
        })?
        .symdiff(b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleObstruction {
    /// Index of the cycle in [`FinitePermutation::cycles`] order.
    pub cycle: usize,
    /// Number of points of the set on that cycle (always odd).
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoboundaryCertificate {
    pub solvable: bool,
    pub witness: Option<Set>,
    pub obstruction: Vec<CycleObstruction>,
}

/// Solves `dB = A` for a permutation.
///
/// Solvable iff every cycle meets `A` an even number of times. The witness is
/// normalized to exclude the minimal element of each cycle, and is built by
/// running `B(Tx) = B(x) + A(x)` along each cycle.
pub fn solve_coboundary_finite(perm: &FinitePermutation, a: &FiniteSet) -> Result<CoboundaryCertificate> {
    if a.universe() != perm.len() {
        return Err(Error::UniverseMismatch(format!(
            "set on {} points, permutation on {}",
            a.universe(),
            perm.len()
        )));
    }
    let mut witness = FiniteSet::empty(perm.len());
    let mut obstruction = Vec::new();
    let mut bits = witness.bits().clone();
    for (c, cycle) in perm.cycles().iter().enumerate() {
        let mut current = false;
        let mut count = 0;
        for &x in cycle {
            bits.set(x, current);
            if a.contains(x) {
                current = !current;
                count += 1;
            }
        }
        if count % 2 == 1 {
            obstruction.push(CycleObstruction { cycle: c, count });
        }
    }
    let solvable = obstruction.is_empty();
    if solvable {
        witness = FiniteSet::from_bits(bits);
    }
    Ok(CoboundaryCertificate {
        solvable,
        witness: solvable.then(|| witness.into()),
        obstruction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteCohomology {
    pub n: usize,
    /// Number of cycles (ergodic components); `|H^1| = 2^k`.
    pub k: usize,
    /// GF(2) rank of `d`.
    pub coboundary_dim: usize,
}

/// Ranks of the finite cohomology. `coboundary_dim` comes from Gaussian
/// elimination on the matrix of `d`, `k` from the cycle decomposition.
pub fn cohomology_rank_finite(perm: &FinitePermutation) -> FiniteCohomology {
    let n = perm.len();
    let mut d = Gf2Matrix::new(n);
    for x in 0..n {
        d.push_sparse_row(&[x, perm.images()[x]]);
    }
    FiniteCohomology {
        n,
        k: perm.cycle_count(),
        coboundary_dim: d.rank(),
    }
}

/// A point of `X x Z2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewState {
    pub base: Point,
    pub parity: bool,
}

impl SkewState {
    /// `(x, s) -> (Tx, s + 1_A(x))`. Both system and set must already be
    /// compatible with the point.
    #[inline]
    pub fn step(&mut self, system: &System, a: &Set) {
        if a.contains_unchecked(&self.base) {
            self.parity = !self.parity;
        }
        system.step(&mut self.base);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepinParams {
    pub orbit_length: u64,
    pub cells: usize,
    pub seed: u64,
}

impl Default for StepinParams {
    fn default() -> Self {
        StepinParams {
            orbit_length: 1_000_000,
            cells: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub test: String,
    pub verdict: Verdict,
    pub statistic: f64,
    pub threshold: f64,
    pub dof: usize,
    pub decisive_empty_bins: usize,
    /// Cells of the base partition actually used.
    pub cells: usize,
    pub orbit_length: u64,
    pub seed: u64,
    pub start: Point,
}

/// Skew-product equidistribution test from a start drawn with `seed`.
///
/// Torus systems are binned on a uniform partition into `cells` cells (a
/// square grid in two dimensions). A finite system is restricted to the
/// cycle of the start, its ergodic component, and each point is its own cell.
pub fn stepin_test(system: &System, a: &Set, params: &StepinParams) -> Result<ErgodicityReport> {
    a.check_system(system)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let start = system.sample_point(&mut rng);
    stepin_test_from(system, a, start, params)
}

/// [`stepin_test`] from an explicit start point.
pub fn stepin_test_from(system: &System, a: &Set, start: Point, params: &StepinParams) -> Result<ErgodicityReport> {
    a.check_system(system)?;
    system.check_point(&start)?;
    let m = params.orbit_length;
    let (cells, counts) = match system {
        System::Finite { perm } => {
            let i = start.as_index().expect("finite point");
            let (pos, len) = cycle_positions(perm, i);
            check_orbit(m, len)?;
            let mut counts = vec![0u64; 2 * len];
            skew_histogram(system, a, &start, m, &mut counts, |x| pos[x.as_index().unwrap()]);
            (len, counts)
        }
        _ => {
            let part = CellPartition::for_system(system, params.cells)?;
            check_orbit(m, part.len())?;
            let mut counts = vec![0u64; 2 * part.len()];
            skew_histogram(system, a, &start, m, &mut counts, |x| part.index(x));
            (part.len(), counts)
        }
    };
    let expected = vec![m as f64 / (2 * cells) as f64; 2 * cells];
    let out = decide(&counts, &expected, true);
    Ok(ErgodicityReport {
        test: "skew-product".into(),
        verdict: out.verdict,
        statistic: out.statistic,
        threshold: out.threshold,
        dof: out.dof,
        decisive_empty_bins: out.decisive_empty_bins,
        cells,
        orbit_length: m,
        seed: params.seed,
        start,
    })
}

pub(crate) fn check_orbit(orbit_length: u64, cells: usize) -> Result<()> {
    let need = 20 * cells as u64;
    if orbit_length < need {
        return Err(Error::InsufficientOrbit {
            got: orbit_length,
            need,
        });
    }
    Ok(())
}

/// Position of each point of the cycle through `i` (usize::MAX off the
/// cycle) and the cycle length.
pub(crate) fn cycle_positions(perm: &FinitePermutation, i: usize) -> (Vec<usize>, usize) {
    let mut pos = vec![usize::MAX; perm.len()];
    let mut x = i;
    let mut len = 0;
    loop {
        pos[x] = len;
        len += 1;
        x = perm.images()[x];
        if x == i {
            break;
        }
    }
    (pos, len)
}

fn skew_histogram(
    system: &System,
    a: &Set,
    start: &Point,
    steps: u64,
    counts: &mut [u64],
    cell: impl Fn(&Point) -> usize,
) {
    let mut state = SkewState {
        base: start.clone(),
        parity: false,
    };
    for _ in 0..steps {
        counts[2 * cell(&state.base) + state.parity as usize] += 1;
        state.step(system, a);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoboundaryVerdict {
    CoboundaryConsistent,
    NonCoboundaryConsistent,
    Inconclusive,
}

impl From<Verdict> for CoboundaryVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::NonErgodic => CoboundaryVerdict::CoboundaryConsistent,
            Verdict::ErgodicConsistent => CoboundaryVerdict::NonCoboundaryConsistent,
            Verdict::Inconclusive => CoboundaryVerdict::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: CoboundaryVerdict,
    pub report: ErgodicityReport,
}

/// Statistical evidence about whether `A` is a coboundary: a non-ergodic skew
/// product is consistent with a coboundary, an ergodic one with a
/// non-coboundary. Never a proof.
pub fn classify_coboundary(system: &System, a: &Set, params: &StepinParams) -> Result<Classification> {
    let report = stepin_test(system, a, params)?;
    Ok(Classification {
        verdict: report.verdict.into(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::TorusRotation;
    use crate::msets::{GridSet, IntervalUnion};
    use rand::Rng;

    fn four_cycle() -> FinitePermutation {
        FinitePermutation::cycle(4)
    }

    fn fs(n: usize, e: &[usize]) -> FiniteSet {
        FiniteSet::from_elements(n, e).unwrap()
    }

    /// All B with dB = A, by enumeration.
    fn brute_force_witnesses(perm: &FinitePermutation, a: &FiniteSet) -> Vec<FiniteSet> {
        let n = perm.len();
        let system: System = perm.clone().into();
        (0..1u64 << n)
            .map(|m| FiniteSet::from_mask(n, m))
            .filter(|b| coboundary_apply(&system, &b.clone().into()).unwrap() == a.clone().into())
            .collect()
    }

    #[test]
    fn rotation_coboundary_example() {
        let t: System = TorusRotation::new(vec![0.3]).unwrap().into();
        let b: Set = IntervalUnion::interval(0.0, 0.5).unwrap().into();
        let Set::Intervals(d) = coboundary_apply(&t, &b).unwrap() else { panic!() };
        // B o T = [0.7, 1) u [0, 0.2); symmetric difference with [0, 0.5)
        let expect = [(0.2, 0.5), (0.7, 1.0)];
        assert_eq!(d.intervals().len(), 2);
        for (&(a, b), (ea, eb)) in d.intervals().iter().zip(expect) {
            assert!((a - ea).abs() < 1e-15 && (b - eb).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_and_full_have_trivial_coboundary() {
        let systems: Vec<(System, Set)> = vec![
            (System::golden_rotation(), IntervalUnion::full().into()),
            (four_cycle().into(), FiniteSet::full(4).into()),
            (System::Cat, GridSet::full(8, 2).unwrap().into()),
        ];
        for (s, full) in systems {
            assert!(coboundary_apply(&s, &full).unwrap().is_null());
            assert!(coboundary_apply(&s, &full.empty_like()).unwrap().is_null());
        }
    }

    #[test]
    fn finite_solver_examples() {
        let p = four_cycle();
        let cert = solve_coboundary_finite(&p, &fs(4, &[0, 1])).unwrap();
        assert!(cert.solvable);
        assert_eq!(cert.witness, Some(fs(4, &[1]).into()));
        assert_eq!(brute_force_witnesses(&p, &fs(4, &[0, 1])), vec![fs(4, &[1]), fs(4, &[0, 2, 3])]);

        let cert = solve_coboundary_finite(&p, &fs(4, &[0])).unwrap();
        assert!(!cert.solvable);
        assert_eq!(cert.obstruction, vec![CycleObstruction { cycle: 0, count: 1 }]);
        assert!(brute_force_witnesses(&p, &fs(4, &[0])).is_empty());

        let three = FinitePermutation::cycle(3);
        assert!(!solve_coboundary_finite(&three, &FiniteSet::full(3)).unwrap().solvable);
    }

    #[test]
    fn cohomology_rank_examples() {
        let id = cohomology_rank_finite(&FinitePermutation::identity(5));
        assert_eq!((id.k, id.coboundary_dim), (5, 0));
        let cyc = cohomology_rank_finite(&FinitePermutation::cycle(9));
        assert_eq!((cyc.k, cyc.coboundary_dim), (1, 8));
        let p = FinitePermutation::new(vec![1, 0, 3, 2]).unwrap();
        let two = cohomology_rank_finite(&p);
        assert_eq!((two.k, two.coboundary_dim), (2, 2));
        // brute-force image size of d over all 16 subsets: 2^2
        let system: System = p.into();
        let mut images: Vec<String> = (0..16u64)
            .map(|m| {
                let d = coboundary_apply(&system, &FiniteSet::from_mask(4, m).into()).unwrap();
                serde_json::to_string(&d).unwrap()
            })
            .collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), 4);
    }

    #[test]
    fn recovered_witness_has_the_same_coboundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..40);
            let perm = FinitePermutation::random(n, &mut rng);
            let b = FiniteSet::from_bits(crate::bits::BitVector::random(n, 0.5, &mut rng));
            let system: System = perm.clone().into();
            let db = coboundary_apply(&system, &b.clone().into()).unwrap();
            let Set::Finite(dbf) = &db else { panic!() };
            let cert = solve_coboundary_finite(&perm, dbf).unwrap();
            assert!(cert.solvable);
            let w = cert.witness.unwrap();
            assert_eq!(coboundary_apply(&system, &w).unwrap(), db);
            // B' differs from B by a union of whole cycles
            let Set::Finite(diff) = w.symdiff(&b.into()).unwrap() else { panic!() };
            for cycle in perm.cycles() {
                let hits = cycle.iter().filter(|&&x| diff.contains(x)).count();
                assert!(hits == 0 || hits == cycle.len());
            }
        }
    }

    #[test]
    fn coboundary_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cases: Vec<(System, Set, Set)> = vec![
            (
                FinitePermutation::random(30, &mut rng).into(),
                FiniteSet::from_bits(crate::bits::BitVector::random(30, 0.5, &mut rng)).into(),
                FiniteSet::from_bits(crate::bits::BitVector::random(30, 0.5, &mut rng)).into(),
            ),
            (
                System::Cat,
                GridSet::random(16, 2, 0.5, &mut rng).unwrap().into(),
                GridSet::random(16, 2, 0.5, &mut rng).unwrap().into(),
            ),
            (
                System::golden_rotation(),
                IntervalUnion::random(3, &mut rng).into(),
                IntervalUnion::random(4, &mut rng).into(),
            ),
        ];
        for (s, a, b) in cases {
            let lhs = coboundary_apply(&s, &a.symdiff(&b).unwrap()).unwrap();
            let rhs = coboundary_apply(&s, &a).unwrap().symdiff(&coboundary_apply(&s, &b).unwrap()).unwrap();
            assert!(lhs.distance(&rhs).unwrap() < 1e-12, "{}", s.kind_name());
        }
    }

    #[test]
    fn skew_parity_telescopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let systems: Vec<(System, Set)> = vec![
            (System::golden_rotation(), IntervalUnion::random(3, &mut rng).into()),
            (System::Cat, GridSet::random(32, 2, 0.3, &mut rng).unwrap().into()),
            (FinitePermutation::random(50, &mut rng).into(), FiniteSet::from_mask(50, rng.random()).into()),
        ];
        for (s, a) in systems {
            for _ in 0..20 {
                let x = s.sample_point(&mut rng);
                let n = rng.random_range(0..500);
                let mut state = SkewState { base: x.clone(), parity: false };
                let mut direct = false;
                let mut y = x;
                for _ in 0..n {
                    direct ^= a.contains(&y).unwrap();
                    y = s.apply(&y).unwrap();
                    state.step(&s, &a);
                }
                assert_eq!(state.parity, direct);
                assert_eq!(state.base, y);
            }
        }
    }

    #[test]
    fn finite_stepin_examples() {
        let s: System = four_cycle().into();
        let params = StepinParams { orbit_length: 1000, cells: 4, seed: 1 };
        let odd = stepin_test(&s, &fs(4, &[0]).into(), &params).unwrap();
        assert_eq!(odd.verdict, Verdict::ErgodicConsistent);
        assert_eq!(odd.cells, 4);
        let even = stepin_test(&s, &fs(4, &[0, 1]).into(), &params).unwrap();
        assert_eq!(even.verdict, Verdict::NonErgodic);
        assert_eq!(even.decisive_empty_bins, 4);
    }

    #[test]
    fn stepin_rejects_short_orbits_and_bad_cells() {
        let s = System::golden_rotation();
        let a: Set = IntervalUnion::interval(0.0, 0.5).unwrap().into();
        let short = StepinParams { orbit_length: 100, cells: 64, seed: 0 };
        assert!(matches!(stepin_test(&s, &a, &short), Err(Error::InsufficientOrbit { .. })));
        let grid: Set = GridSet::rectangle(8, 0.5, 0.5).unwrap().into();
        let bad = StepinParams { orbit_length: 10_000, cells: 10, seed: 0 };
        assert!(stepin_test(&System::Cat, &grid, &bad).is_err());
        assert!(stepin_test(&System::Cat, &a, &StepinParams::default()).is_err());
    }

    #[test]
    fn golden_rotation_half_interval_is_not_a_coboundary() {
        let s = System::golden_rotation();
        let a: Set = IntervalUnion::interval(0.0, 0.5).unwrap().into();
        let c = classify_coboundary(&s, &a, &StepinParams { seed: 7, ..Default::default() }).unwrap();
        assert_eq!(c.report.verdict, Verdict::ErgodicConsistent);
        assert_eq!(c.verdict, CoboundaryVerdict::NonCoboundaryConsistent);
    }

    #[test]
    fn constructed_coboundary_is_detected() {
        let s = System::golden_rotation();
        let b: Set = IntervalUnion::interval(0.0, 0.25).unwrap().into();
        let a = coboundary_apply(&s, &b).unwrap();
        let c = classify_coboundary(&s, &a, &StepinParams { orbit_length: 200_000, seed: 1, ..Default::default() }).unwrap();
        assert_eq!(c.verdict, CoboundaryVerdict::CoboundaryConsistent);
    }

    #[test]
    fn cat_map_challenge_set_reports_a_statistic() {
        let y: Set = GridSet::rectangle(16, 0.5, 0.5).unwrap().into();
        let c = classify_coboundary(&System::Cat, &y, &StepinParams { orbit_length: 200_000, seed: 3, ..Default::default() }).unwrap();
        assert!(c.report.statistic.is_finite());
        assert_eq!(c.report.cells, 64);
    }

    #[test]
    fn reports_are_reproducible() {
        let s = System::golden_rotation();
        let a: Set = IntervalUnion::interval(0.1, 0.35).unwrap().into();
        let p = StepinParams { orbit_length: 50_000, cells: 32, seed: 99 };
        let r1 = serde_json::to_string(&stepin_test(&s, &a, &p).unwrap()).unwrap();
        let r2 = serde_json::to_string(&stepin_test(&s, &a, &p).unwrap()).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.contains("\"seed\":99"));
    }
}
