//! Measure-preserving model systems: finite permutations, torus rotations and
//! the Arnold cat map, with orbit iteration.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(sqrt(5) - 1) / 2`, the canonical badly approximable rotation number.
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

/// Uniform torus samples are drawn on this dyadic lattice. The cat map and its
/// inverse are exact in double precision there, so sampled orbits are exactly
/// reversible.
pub const SAMPLE_LATTICE_BITS: u32 = 50;

/// Reduces a real into `[0, 1)`.
#[inline]
pub fn reduce(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct FinitePermutation {
    sigma: Vec<usize>,
    inverse: Vec<usize>,
}

impl FinitePermutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::NotAPermutation("empty".into()));
        }
        let mut inverse = vec![usize::MAX; n];
        for (i, &s) in sigma.iter().enumerate() {
            if s >= n {
                return Err(Error::NotAPermutation(format!("image {s} of {i} is out of range")));
            }
            if inverse[s] != usize::MAX {
                return Err(Error::NotAPermutation(format!("{s} is hit twice")));
            }
            inverse[s] = i;
        }
        Ok(FinitePermutation { sigma, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let sigma: Vec<usize> = (0..n).collect();
        FinitePermutation {
            inverse: sigma.clone(),
            sigma,
        }
    }

    /// The single cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        Self::new((0..n).map(|i| (i + 1) % n).collect()).expect("cyclic shift")
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(rng);
        Self::new(sigma).expect("shuffle is a bijection")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.sigma
    }

    pub fn preimages(&self) -> &[usize] {
        &self.inverse
    }

    pub fn apply(&self, i: usize) -> Result<usize> {
        self.sigma.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            n: self.len(),
        })
    }

    pub fn apply_inverse(&self, i: usize) -> Result<usize> {
        self.inverse.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            n: self.len(),
        })
    }

    /// Cycles in orbit order, each starting at its minimal element, sorted by
    /// that minimal element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.sigma[i];
            }
            out.push(cycle);
        }
        out
    }

    /// `labels[i]` is the index (in `cycles()` order) of the cycle through `i`.
    pub fn cycle_labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.len()];
        for (c, cycle) in self.cycles().iter().enumerate() {
            for &i in cycle {
                labels[i] = c;
            }
        }
        labels
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// +1 for even, -1 for odd permutations.
    pub fn sign(&self) -> i8 {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn compose(&self, then: &FinitePermutation) -> Result<FinitePermutation> {
        if then.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: then.len(),
            });
        }
        FinitePermutation::new(self.sigma.iter().map(|&i| then.sigma[i]).collect())
    }
}

impl From<FinitePermutation> for Vec<usize> {
    fn from(p: FinitePermutation) -> Self {
        p.sigma
    }
}

impl TryFrom<Vec<usize>> for FinitePermutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        FinitePermutation::new(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("torus coordinates must be finite".into()));
        }
        Ok(TorusPoint(coords.into_iter().map(reduce).collect()))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let scale = (-(SAMPLE_LATTICE_BITS as f64)).exp2();
        TorusPoint(
            (0..dim)
                .map(|_| (rng.random::<u64>() >> (64 - SAMPLE_LATTICE_BITS)) as f64 * scale)
                .collect(),
        )
    }

    /// Largest coordinate distance on the circle.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                let d = (a - b).abs();
                d.min(1.0 - d)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusRotation {
    alpha: Vec<f64>,
}

impl TorusRotation {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidParameter("rotation needs at least one dimension".into()));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("rotation vector must be finite".into()));
        }
        Ok(TorusRotation {
            alpha: alpha.into_iter().map(reduce).collect(),
        })
    }

    pub fn golden() -> Self {
        TorusRotation {
            alpha: vec![GOLDEN_MEAN],
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}

/// `(x, y) -> (2x + y, x + y) mod 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatMap;

impl CatMap {
    #[inline]
    pub fn forward(x: f64, y: f64) -> (f64, f64) {
        (reduce(2.0 * x + y), reduce(x + y))
    }

    /// Inverse matrix `[[1, -1], [-1, 2]]`.
    #[inline]
    pub fn backward(x: f64, y: f64) -> (f64, f64) {
        (reduce(x - y), reduce(2.0 * y - x))
    }

    /// The induced permutation of lattice cells `(i, j) -> (2i + j, i + j) mod n`
    /// with cells indexed row-major as `i * n + j`.
    pub fn cell_permutation(n: usize) -> FinitePermutation {
        let mut sigma = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (u, v) = ((2 * i + j) % n, (i + j) % n);
                sigma[i * n + j] = u * n + v;
            }
        }
        FinitePermutation::new(sigma).expect("unimodular matrix permutes the lattice")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum System {
    Finite { perm: FinitePermutation },
    Rotation { rotation: TorusRotation },
    Cat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Index(usize),
    Torus(TorusPoint),
}

impl Point {
    pub fn torus(coords: Vec<f64>) -> Result<Point> {
        TorusPoint::new(coords).map(Point::Torus)
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(*i),
            Point::Torus(_) => None,
        }
    }

    pub fn as_torus(&self) -> Option<&TorusPoint> {
        match self {
            Point::Torus(t) => Some(t),
            Point::Index(_) => None,
        }
    }
}

impl From<FinitePermutation> for System {
    fn from(perm: FinitePermutation) -> Self {
        System::Finite { perm }
    }
}

impl From<TorusRotation> for System {
    fn from(rotation: TorusRotation) -> Self {
        System::Rotation { rotation }
    }
}

impl From<CatMap> for System {
    fn from(_: CatMap) -> Self {
        System::Cat
    }
}

impl System {
    pub fn golden_rotation() -> Self {
        TorusRotation::golden().into()
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            System::Finite { .. } => "finite permutation",
            System::Rotation { .. } => "torus rotation",
            System::Cat => "cat map",
        }
    }

    /// Torus dimension, `None` for finite systems.
    pub fn dim(&self) -> Option<usize> {
        match self {
            System::Finite { .. } => None,
            System::Rotation { rotation } => Some(rotation.dim()),
            System::Cat => Some(2),
        }
    }

    pub fn as_finite(&self) -> Option<&FinitePermutation> {
        match self {
            System::Finite { perm } => Some(perm),
            _ => None,
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        match (self, x) {
            (System::Finite { perm }, Point::Index(i)) => {
                if *i < perm.len() {
                    Ok(())
                } else {
                    Err(Error::IndexOutOfRange {
                        index: *i,
                        n: perm.len(),
                    })
                }
            }
            (System::Finite { .. }, Point::Torus(_)) => {
                Err(Error::InvalidParameter("finite systems act on indices".into()))
            }
            (_, Point::Torus(t)) => {
                let d = self.dim().expect("torus system");
                if t.dim() == d {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch {
                        expected: d,
                        got: t.dim(),
                    })
                }
            }
            (_, Point::Index(_)) => {
                Err(Error::InvalidParameter("torus systems act on torus points".into()))
            }
        }
    }

    /// One forward step in place. The point must already be valid for `self`.
    #[inline]
    pub fn step(&self, x: &mut Point) {
        match (self, x) {
            (System::Finite { perm }, Point::Index(i)) => *i = perm.sigma[*i],
            (System::Rotation { rotation }, Point::Torus(TorusPoint(c))) => {
                for (xi, a) in c.iter_mut().zip(&rotation.alpha) {
                    *xi = reduce(*xi + a);
                }
            }
            (System::Cat, Point::Torus(TorusPoint(c))) => {
                let (u, v) = CatMap::forward(c[0], c[1]);
                c[0] = u;
                c[1] = v;
            }
            _ => unreachable!("step on an unchecked point"),
        }
    }

    #[inline]
    pub fn step_back(&self, x: &mut Point) {
        match (self, x) {
            (System::Finite { perm }, Point::Index(i)) => *i = perm.inverse[*i],
            (System::Rotation { rotation }, Point::Torus(TorusPoint(c))) => {
                for (xi, a) in c.iter_mut().zip(&rotation.alpha) {
                    *xi = reduce(*xi - a);
                }
            }
            (System::Cat, Point::Torus(TorusPoint(c))) => {
                let (u, v) = CatMap::backward(c[0], c[1]);
                c[0] = u;
                c[1] = v;
            }
            _ => unreachable!("step on an unchecked point"),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        let mut y = x.clone();
        self.step(&mut y);
        Ok(y)
    }

    pub fn apply_inverse(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        let mut y = x.clone();
        self.step_back(&mut y);
        Ok(y)
    }

    /// `T^n(x)`; negative `n` iterates the inverse.
    pub fn iterate(&self, x: &Point, n: i64) -> Result<Point> {
        self.check_point(x)?;
        let mut y = x.clone();
        if let (System::Finite { perm }, Point::Index(i)) = (self, &mut y) {
            // orbit is periodic, so reduce modulo the cycle length first
            let len = cycle_length(perm, *i) as i64;
            let steps = n.rem_euclid(len);
            for _ in 0..steps {
                *i = perm.sigma[*i];
            }
            return Ok(y);
        }
        if n >= 0 {
            for _ in 0..n {
                self.step(&mut y);
            }
        } else {
            for _ in 0..n.unsigned_abs() {
                self.step_back(&mut y);
            }
        }
        Ok(y)
    }

    /// A point drawn from the invariant measure (uniform).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            System::Finite { perm } => Point::Index(rng.random_range(0..perm.len())),
            _ => Point::Torus(TorusPoint::sample(self.dim().expect("torus"), rng)),
        }
    }
}

fn cycle_length(perm: &FinitePermutation, start: usize) -> usize {
    let mut len = 1;
    let mut i = perm.sigma[start];
    while i != start {
        i = perm.sigma[i];
        len += 1;
    }
    len
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn four_cycle() -> System {
        FinitePermutation::cycle(4).into()
    }

    fn coords(p: &Point) -> Vec<f64> {
        p.as_torus().unwrap().coords().to_vec()
    }

    #[test]
    fn cat_map_examples() {
        let cat = System::Cat;
        assert_eq!(coords(&cat.apply(&Point::torus(vec![0.0, 0.0]).unwrap()).unwrap()), [0.0, 0.0]);
        assert_eq!(coords(&cat.apply(&Point::torus(vec![0.5, 0.5]).unwrap()).unwrap()), [0.5, 0.0]);
        let x = Point::torus(vec![0.3, 0.7]).unwrap();
        assert_eq!(cat.iterate(&x, 0).unwrap(), x);
    }

    #[test]
    fn permutation_apply_and_iterate() {
        let s = four_cycle();
        assert_eq!(s.apply(&Point::Index(3)).unwrap(), Point::Index(0));
        assert_eq!(s.iterate(&Point::Index(0), -1).unwrap(), Point::Index(3));
        assert_eq!(s.iterate(&Point::Index(1), 4_000_000_001).unwrap(), Point::Index(2));
        assert!(matches!(
            s.apply(&Point::Index(4)),
            Err(Error::IndexOutOfRange { index: 4, n: 4 })
        ));
    }

    #[test]
    fn rational_rotation_has_period_four() {
        let s: System = TorusRotation::new(vec![0.25]).unwrap().into();
        let x = Point::torus(vec![0.0]).unwrap();
        assert_eq!(s.iterate(&x, 4).unwrap(), x);
    }

    #[test]
    fn cycles_examples() {
        assert_eq!(FinitePermutation::identity(3).cycles(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(FinitePermutation::cycle(4).cycles(), vec![vec![0, 1, 2, 3]]);
        let p = FinitePermutation::new(vec![1, 0, 3, 2]).unwrap();
        assert_eq!(p.cycles(), vec![vec![0, 1], vec![2, 3]]);
        let q = FinitePermutation::new(vec![2, 0, 1, 4, 3]).unwrap();
        assert_eq!(q.cycles(), vec![vec![0, 2, 1], vec![3, 4]]);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(FinitePermutation::new(vec![0, 0]).is_err());
        assert!(FinitePermutation::new(vec![0, 2]).is_err());
        assert!(FinitePermutation::new(vec![]).is_err());
    }

    #[test]
    fn sign_of_cycles() {
        assert_eq!(FinitePermutation::cycle(4).sign(), -1);
        assert_eq!(FinitePermutation::cycle(3).sign(), 1);
        assert_eq!(FinitePermutation::identity(7).sign(), 1);
    }

    #[test]
    fn million_step_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for system in [System::golden_rotation(), System::Cat] {
            let x = system.sample_point(&mut rng);
            let y = system.iterate(&x, 1_000_000).unwrap();
            let back = system.iterate(&y, -1_000_000).unwrap();
            let err = back.as_torus().unwrap().distance(x.as_torus().unwrap());
            assert!(err <= 1e-9, "{}: drift {err}", system.kind_name());
        }
        let two: System = TorusRotation::new(vec![GOLDEN_MEAN, 2f64.sqrt() - 1.0]).unwrap().into();
        let x = two.sample_point(&mut rng);
        let back = two.iterate(&two.iterate(&x, -1_000_000).unwrap(), 1_000_000).unwrap();
        assert!(back.as_torus().unwrap().distance(x.as_torus().unwrap()) <= 1e-9);
    }

    #[test]
    fn cat_cell_permutation_matches_corner_map() {
        let n = 8;
        let p = CatMap::cell_permutation(n);
        for i in 0..n {
            for j in 0..n {
                let (u, v) = CatMap::forward(i as f64 / n as f64, j as f64 / n as f64);
                let k = p.images()[i * n + j];
                assert_eq!(((u * n as f64) as usize, (v * n as f64) as usize), (k / n, k % n));
            }
        }
    }

    #[test]
    fn cat_map_preserves_grid_measure() {
        // 10^6 uniform samples pushed forward; every cell of a 16x16 grid within
        // three standard errors of its expected count.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples = 1_000_000usize;
        let k = 16;
        let mut counts = vec![0usize; k * k];
        for _ in 0..samples {
            let mut x = System::Cat.sample_point(&mut rng);
            System::Cat.step(&mut x);
            let c = x.as_torus().unwrap().coords();
            counts[(c[0] * k as f64) as usize * k + (c[1] * k as f64) as usize] += 1;
        }
        let p = 1.0 / (k * k) as f64;
        let expected = samples as f64 * p;
        let se = (samples as f64 * p * (1.0 - p)).sqrt();
        for (cell, &c) in counts.iter().enumerate() {
            assert!((c as f64 - expected).abs() <= 3.0 * se, "cell {cell}: {c} vs {expected}");
        }
    }
}
