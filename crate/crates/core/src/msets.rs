//! Measurable sets and the Boolean metric group they form under symmetric
//! difference, with `d(A, B) = m(A + B)`.
//!
//! Three representations are supported:
//!
//! * [`FiniteSet`]: a subset of `{0, ..., n-1}` with normalized counting measure;
//! * [`IntervalUnion`]: a finite union of half-open intervals in `[0, 1)`;
//! * [`GridSet`]: a union of cells of the uniform `N^d` grid on the `d`-torus
//!   (`d` is 1 or 2), cell `(i, j)` being `[i/N, (i+1)/N) x [j/N, (j+1)/N)`.
//!
//! Sets that differ by a null set are identified, so intervals closer than
//! [`MERGE_TOLERANCE`] are merged and slivers shorter than it are dropped.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::dynsys::{reduce, CatMap, Point, System};
use crate::error::{Error, Result};

pub const MERGE_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_INTERVAL_CAPACITY: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSet {
    bits: BitVector,
}

impl FiniteSet {
    pub fn empty(n: usize) -> Self {
        FiniteSet {
            bits: BitVector::zeros(n),
        }
    }

    pub fn full(n: usize) -> Self {
        FiniteSet {
            bits: BitVector::ones(n),
        }
    }

    pub fn from_elements(n: usize, elements: &[usize]) -> Result<Self> {
        Ok(FiniteSet {
            bits: BitVector::from_indices(n, elements)?,
        })
    }

    pub fn from_bits(bits: BitVector) -> Self {
        FiniteSet { bits }
    }

    /// Subset whose members are the set bits of `mask` (for `n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        let mut bits = BitVector::zeros(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                bits.set(i, true);
            }
        }
        FiniteSet { bits }
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn elements(&self) -> Vec<usize> {
        self.bits.iter_ones().collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion {
            intervals: Vec::new(),
        }
    }

    pub fn full() -> Self {
        IntervalUnion {
            intervals: vec![(0.0, 1.0)],
        }
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// Union of the given intervals; they may overlap or come unsorted.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
                return Err(Error::InvalidSet(format!(
                    "interval [{a}, {b}) is not inside [0, 1)"
                )));
            }
        }
        Self::normalized(intervals, DEFAULT_INTERVAL_CAPACITY)
    }

    /// `k` disjoint intervals with uniformly drawn endpoints.
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let mut ends: Vec<f64> = (0..2 * k).map(|_| rng.random::<f64>()).collect();
        ends.sort_by(f64::total_cmp);
        let raw = ends.chunks(2).map(|p| (p[0], p[1])).collect();
        Self::normalized(raw, DEFAULT_INTERVAL_CAPACITY).expect("small random union")
    }

    fn normalized(mut raw: Vec<(f64, f64)>, capacity: usize) -> Result<Self> {
        raw.retain(|&(a, b)| b - a >= MERGE_TOLERANCE);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a - last.1 < MERGE_TOLERANCE => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        if out.len() > capacity {
            return Err(Error::CapacityExceeded(capacity));
        }
        Ok(IntervalUnion { intervals: out })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        // last interval starting at or before x
        let k = self.intervals.partition_point(|&(a, _)| a <= x);
        k > 0 && x < self.intervals[k - 1].1
    }

    pub fn symdiff(&self, other: &IntervalUnion) -> Result<IntervalUnion> {
        // The indicator of A + B is the parity of the number of intervals of
        // either union covering a point; coincident endpoints cancel.
        let mut ends: Vec<f64> = self
            .intervals
            .iter()
            .chain(&other.intervals)
            .flat_map(|&(a, b)| [a, b])
            .collect();
        ends.sort_by(f64::total_cmp);
        let mut raw = Vec::new();
        let mut inside = false;
        let mut start = 0.0;
        let mut k = 0;
        while k < ends.len() {
            let v = ends[k];
            let mut toggles = 0;
            while k < ends.len() && ends[k] == v {
                toggles += 1;
                k += 1;
            }
            if toggles % 2 == 1 {
                if inside {
                    raw.push((start, v));
                } else {
                    start = v;
                }
                inside = !inside;
            }
        }
        Self::normalized(raw, DEFAULT_INTERVAL_CAPACITY)
    }

    /// Image under `x -> x + alpha mod 1`.
    pub fn translate(&self, alpha: f64) -> Result<IntervalUnion> {
        let alpha = reduce(alpha);
        let mut raw = Vec::with_capacity(self.intervals.len() + 1);
        for &(a, b) in &self.intervals {
            let (a, b) = (a + alpha, b + alpha);
            if a >= 1.0 {
                raw.push((a - 1.0, b - 1.0));
            } else if b <= 1.0 {
                raw.push((a, b));
            } else {
                raw.push((a, 1.0));
                raw.push((0.0, b - 1.0));
            }
        }
        Self::normalized(raw, DEFAULT_INTERVAL_CAPACITY)
    }

    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSet {
    n: usize,
    dim: usize,
    bits: BitVector,
}

impl GridSet {
    pub fn new(n: usize, dim: usize, bits: BitVector) -> Result<Self> {
        if n == 0 || !(1..=2).contains(&dim) {
            return Err(Error::InvalidSet(format!(
                "grid resolution {n} and dimension {dim} unsupported"
            )));
        }
        if bits.len() != n.pow(dim as u32) {
            return Err(Error::InvalidSet(format!(
                "grid {n}^{dim} needs {} bits, got {}",
                n.pow(dim as u32),
                bits.len()
            )));
        }
        Ok(GridSet { n, dim, bits })
    }

    pub fn empty(n: usize, dim: usize) -> Result<Self> {
        Self::new(n, dim, BitVector::zeros(n.pow(dim as u32)))
    }

    pub fn full(n: usize, dim: usize) -> Result<Self> {
        Self::new(n, dim, BitVector::ones(n.pow(dim as u32)))
    }

    /// `[0, a) x [0, b)` on the `n x n` grid; `a n` and `b n` must be integers.
    pub fn rectangle(n: usize, a: f64, b: f64) -> Result<Self> {
        let ia = grid_steps(n, a)?;
        let ib = grid_steps(n, b)?;
        let mut bits = BitVector::zeros(n * n);
        for i in 0..ia {
            for j in 0..ib {
                bits.set(i * n + j, true);
            }
        }
        Self::new(n, 2, bits)
    }

    /// `[a, b)` on the one-dimensional grid with `n` cells.
    pub fn interval(n: usize, a: f64, b: f64) -> Result<Self> {
        let (ia, ib) = (grid_steps(n, a)?, grid_steps(n, b)?);
        let mut bits = BitVector::zeros(n);
        for i in ia..ib {
            bits.set(i, true);
        }
        Self::new(n, 1, bits)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, dim: usize, p: f64, rng: &mut R) -> Result<Self> {
        Self::new(n, dim, BitVector::random(n.pow(dim as u32), p, rng))
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn measure(&self) -> f64 {
        self.bits.count_ones() as f64 / self.bits.len() as f64
    }

    #[inline]
    fn axis_cell(&self, x: f64) -> usize {
        ((x * self.n as f64) as usize).min(self.n - 1)
    }

    /// Row-major cell index of the cell containing `coords`.
    #[inline]
    pub fn cell_of(&self, coords: &[f64]) -> usize {
        match self.dim {
            1 => self.axis_cell(coords[0]),
            _ => self.axis_cell(coords[0]) * self.n + self.axis_cell(coords[1]),
        }
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        self.bits.get(self.cell_of(coords))
    }

    /// Measure of the intersection with the box `prod [lo_k, hi_k)`.
    pub fn overlap(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let n = self.n as f64;
        let axis = |l: f64, h: f64| -> Vec<(usize, f64)> {
            let first = (l * n).floor() as usize;
            let last = ((h * n).ceil() as usize).min(self.n);
            (first..last)
                .map(|i| {
                    let (a, b) = (i as f64 / n, (i + 1) as f64 / n);
                    (i, (b.min(h) - a.max(l)).max(0.0))
                })
                .filter(|&(_, w)| w > 0.0)
                .collect()
        };
        let xs = axis(lo[0], hi[0]);
        if self.dim == 1 {
            return xs.iter().filter(|(i, _)| self.bits.get(*i)).map(|(_, w)| w).sum();
        }
        let ys = axis(lo[1], hi[1]);
        let mut total = 0.0;
        for &(i, wx) in &xs {
            for &(j, wy) in &ys {
                if self.bits.get(i * self.n + j) {
                    total += wx * wy;
                }
            }
        }
        total
    }

    fn with_bits(&self, bits: BitVector) -> GridSet {
        GridSet {
            n: self.n,
            dim: self.dim,
            bits,
        }
    }

    /// Cyclic shift by `shift[k]` cells along axis `k`.
    fn shifted(&self, shift: &[usize]) -> GridSet {
        let n = self.n;
        let mut bits = BitVector::zeros(self.bits.len());
        for c in self.bits.iter_ones() {
            let target = match self.dim {
                1 => (c + shift[0]) % n,
                _ => ((c / n + shift[0]) % n) * n + (c % n + shift[1]) % n,
            };
            bits.set(target, true);
        }
        self.with_bits(bits)
    }
}

fn grid_steps(n: usize, a: f64) -> Result<usize> {
    let steps = a * n as f64;
    let rounded = steps.round();
    if !(0.0..=1.0).contains(&a) || (steps - rounded).abs() > 1e-9 {
        return Err(Error::InvalidSet(format!(
            "{a} is not a multiple of 1/{n} in [0, 1]"
        )));
    }
    Ok(rounded as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Set {
    Finite(FiniteSet),
    Intervals(IntervalUnion),
    Grid(GridSet),
}

impl From<FiniteSet> for Set {
    fn from(s: FiniteSet) -> Self {
        Set::Finite(s)
    }
}

impl From<IntervalUnion> for Set {
    fn from(s: IntervalUnion) -> Self {
        Set::Intervals(s)
    }
}

impl From<GridSet> for Set {
    fn from(s: GridSet) -> Self {
        Set::Grid(s)
    }
}

impl Set {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Set::Finite(_) => "finite",
            Set::Intervals(_) => "interval-union",
            Set::Grid(_) => "grid",
        }
    }

    /// The full space in the same representation and universe.
    pub fn full_like(&self) -> Set {
        match self {
            Set::Finite(s) => FiniteSet::full(s.universe()).into(),
            Set::Intervals(_) => IntervalUnion::full().into(),
            Set::Grid(g) => g.with_bits(BitVector::ones(g.bits.len())).into(),
        }
    }

    pub fn empty_like(&self) -> Set {
        match self {
            Set::Finite(s) => FiniteSet::empty(s.universe()).into(),
            Set::Intervals(_) => IntervalUnion::empty().into(),
            Set::Grid(g) => g.with_bits(BitVector::zeros(g.bits.len())).into(),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Set::Finite(s) => s.len() as f64 / s.universe() as f64,
            Set::Intervals(s) => s.measure(),
            Set::Grid(g) => g.measure(),
        }
    }

    pub fn is_null(&self) -> bool {
        match self {
            Set::Finite(s) => s.is_empty(),
            Set::Intervals(s) => s.intervals.is_empty(),
            Set::Grid(g) => g.bits.is_zero(),
        }
    }

    pub fn symdiff(&self, other: &Set) -> Result<Set> {
        match (self, other) {
            (Set::Finite(a), Set::Finite(b)) => {
                if a.universe() != b.universe() {
                    return Err(Error::UniverseMismatch(format!(
                        "finite sets on {} and {} points",
                        a.universe(),
                        b.universe()
                    )));
                }
                Ok(FiniteSet::from_bits(a.bits.xor(&b.bits)).into())
            }
            (Set::Intervals(a), Set::Intervals(b)) => Ok(a.symdiff(b)?.into()),
            (Set::Grid(a), Set::Grid(b)) => {
                if (a.n, a.dim) != (b.n, b.dim) {
                    return Err(Error::UniverseMismatch(format!(
                        "grids {}^{} and {}^{}",
                        a.n, a.dim, b.n, b.dim
                    )));
                }
                Ok(a.with_bits(a.bits.xor(&b.bits)).into())
            }
            _ => Err(Error::UniverseMismatch(format!(
                "{} and {} representations",
                self.kind_name(),
                other.kind_name()
            ))),
        }
    }

    pub fn complement(&self) -> Result<Set> {
        self.symdiff(&self.full_like())
    }

    pub fn distance(&self, other: &Set) -> Result<f64> {
        Ok(self.symdiff(other)?.measure())
    }

    /// Checks that points of `system` can be tested against this set.
    pub fn check_system(&self, system: &System) -> Result<()> {
        let ok = match (self, system) {
            (Set::Finite(s), System::Finite { perm }) => {
                if s.universe() != perm.len() {
                    return Err(Error::UniverseMismatch(format!(
                        "set on {} points, system on {}",
                        s.universe(),
                        perm.len()
                    )));
                }
                true
            }
            (Set::Intervals(_), s) => s.dim() == Some(1),
            (Set::Grid(g), s) => s.dim() == Some(g.dim),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Incompatible {
                op: "membership",
                system: system.kind_name(),
                set: self.kind_name(),
            })
        }
    }

    /// Indicator value at `x`; the point must match the representation.
    #[inline]
    pub fn contains_unchecked(&self, x: &Point) -> bool {
        match (self, x) {
            (Set::Finite(s), Point::Index(i)) => s.contains(*i),
            (Set::Intervals(s), Point::Torus(t)) => s.contains(t.coords()[0]),
            (Set::Grid(g), Point::Torus(t)) => g.contains(t.coords()),
            _ => false,
        }
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        match (self, x) {
            (Set::Finite(s), Point::Index(i)) if *i < s.universe() => Ok(s.contains(*i)),
            (Set::Finite(s), Point::Index(i)) => Err(Error::IndexOutOfRange {
                index: *i,
                n: s.universe(),
            }),
            (Set::Intervals(_), Point::Torus(t)) if t.dim() == 1 => Ok(self.contains_unchecked(x)),
            (Set::Grid(g), Point::Torus(t)) if t.dim() == g.dim => Ok(self.contains_unchecked(x)),
            _ => Err(Error::InvalidParameter(format!(
                "point {x:?} is not in the universe of a {} set",
                self.kind_name()
            ))),
        }
    }

    /// Measure of the intersection with the box `prod [lo_k, hi_k)` (torus
    /// representations) or with the index range `[lo_0, hi_0)` scaled by `1/n`
    /// (finite sets).
    pub fn overlap(&self, lo: &[f64], hi: &[f64]) -> f64 {
        match self {
            Set::Finite(s) => {
                let n = s.universe() as f64;
                let (a, b) = ((lo[0] * n).ceil() as usize, ((hi[0] * n).ceil() as usize).min(s.universe()));
                (a..b).filter(|&i| s.contains(i)).count() as f64 / n
            }
            Set::Intervals(s) => s.overlap(lo[0], hi[0]),
            Set::Grid(g) => g.overlap(lo, hi),
        }
    }

    /// The image `T(A)`.
    pub fn pushforward(&self, system: &System) -> Result<Set> {
        self.transport(system, false)
    }

    /// The preimage `T^{-1}(A)`, whose indicator is `1_A o T`.
    pub fn pullback(&self, system: &System) -> Result<Set> {
        self.transport(system, true)
    }

    fn transport(&self, system: &System, inverse: bool) -> Result<Set> {
        let incompatible = || Error::Incompatible {
            op: "pushforward",
            system: system.kind_name(),
            set: self.kind_name(),
        };
        match (self, system) {
            (Set::Finite(s), System::Finite { perm }) => {
                self.check_system(system)?;
                let bits = if inverse {
                    s.bits.compose(perm.images())
                } else {
                    s.bits.compose(perm.preimages())
                };
                Ok(FiniteSet::from_bits(bits).into())
            }
            (Set::Intervals(s), System::Rotation { rotation }) if rotation.dim() == 1 => {
                let a = rotation.alpha()[0];
                Ok(s.translate(if inverse { -a } else { a })?.into())
            }
            (Set::Grid(g), System::Rotation { rotation }) if rotation.dim() == g.dim => {
                let mut shift = Vec::with_capacity(g.dim);
                for &a in rotation.alpha() {
                    let a = if inverse { reduce(-a) } else { a };
                    let steps = (a * g.n as f64).round();
                    if (a * g.n as f64 - steps).abs() > 1e-9 {
                        return Err(incompatible());
                    }
                    shift.push(steps as usize % g.n);
                }
                Ok(g.shifted(&shift).into())
            }
            (Set::Grid(g), System::Cat) if g.dim == 2 => {
                let perm = CatMap::cell_permutation(g.n);
                let bits = if inverse {
                    g.bits.compose(perm.images())
                } else {
                    g.bits.compose(perm.preimages())
                };
                Ok(g.with_bits(bits).into())
            }
            _ => Err(incompatible()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SetRepr {
    Finite { n: usize, bits: String },
    Intervals { intervals: Vec<[f64; 2]> },
    Grid { n: usize, d: usize, bits: String },
}

impl Serialize for Set {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Set::Finite(s) => SetRepr::Finite {
                n: s.universe(),
                bits: s.bits.to_hex(),
            },
            Set::Intervals(s) => SetRepr::Intervals {
                intervals: s.intervals.iter().map(|&(a, b)| [a, b]).collect(),
            },
            Set::Grid(g) => SetRepr::Grid {
                n: g.n,
                d: g.dim,
                bits: g.bits.to_hex(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Set {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SetRepr::deserialize(deserializer)?;
        let set = match repr {
            SetRepr::Finite { n, bits } => {
                BitVector::from_hex(n, &bits).map(|b| FiniteSet::from_bits(b).into())
            }
            SetRepr::Intervals { intervals } => {
                IntervalUnion::new(intervals.into_iter().map(|[a, b]| (a, b)).collect()).map(Set::from)
            }
            SetRepr::Grid { n, d, bits } => BitVector::from_hex(n.pow(d as u32), &bits)
                .and_then(|b| GridSet::new(n, d, b))
                .map(Set::from),
        };
        set.map_err(D::Error::custom)
    }
}
