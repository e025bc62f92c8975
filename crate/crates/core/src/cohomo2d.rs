//! The GF(2) cochain complex of two commuting permutations `S`, `T`.
//!
//! ```text
//! C0 --d0--> C1 = C0 x C0 --d1--> C2
//! d0 C = (C∘S + C, C∘T + C)
//! d1 (P, Q) = P + Q∘S + P∘T + Q
//! ```
//!
//! A finite action is never free, so the top group does not vanish: on every
//! `M x N` torus grid the dimensions are `(1, 2, 1)` and a curl `F` is
//! solvable exactly when its total parity is zero.

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::dynsys::FinitePermutation;
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action2D {
    shape: (usize, usize),
    s: FinitePermutation,
    t: FinitePermutation,
}

impl Action2D {
    /// Fails with the first point where `S∘T` and `T∘S` differ.
    pub fn new(s: FinitePermutation, t: FinitePermutation) -> Result<Self> {
        if s.len() != t.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: t.len(),
            });
        }
        let (si, ti) = (s.images(), t.images());
        if let Some(x) = (0..s.len()).find(|&x| si[ti[x]] != ti[si[x]]) {
            return Err(Error::NonCommuting(x));
        }
        Ok(Action2D {
            shape: (1, s.len()),
            s,
            t,
        })
    }

    /// The `m x n` torus grid, point `(i, j)` at index `i * n + j`, with
    /// `S(i, j) = (i + 1, j)` and `T(i, j) = (i, j + 1)`.
    pub fn torus_grid(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!("empty grid {m}x{n}")));
        }
        let s = (0..m * n).map(|x| ((x / n + 1) % m) * n + x % n).collect();
        let t = (0..m * n).map(|x| (x / n) * n + (x % n + 1) % n).collect();
        let mut action = Action2D::new(FinitePermutation::new(s)?, FinitePermutation::new(t)?)?;
        action.shape = (m, n);
        Ok(action)
    }

    pub fn identity(n: usize) -> Self {
        Action2D {
            shape: (1, n),
            s: FinitePermutation::identity(n),
            t: FinitePermutation::identity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `(M, N)` for a torus grid, `(1, len)` otherwise.
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn s(&self) -> &FinitePermutation {
        &self.s
    }

    pub fn t(&self) -> &FinitePermutation {
        &self.t
    }

    fn check(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                got: len,
            })
        }
    }

    pub fn d0_matrix(&self) -> Gf2Matrix {
        let n = self.len();
        let mut m = Gf2Matrix::new(n);
        for g in [&self.s, &self.t] {
            for x in 0..n {
                m.push_sparse_row(&[x, g.images()[x]]);
            }
        }
        m
    }

    /// Columns are `P_0..P_{n-1}, Q_0..Q_{n-1}`.
    pub fn d1_matrix(&self) -> Gf2Matrix {
        let n = self.len();
        let mut m = Gf2Matrix::new(2 * n);
        for x in 0..n {
            let (sx, tx) = (self.s.images()[x], self.t.images()[x]);
            m.push_sparse_row(&[x, n + sx, tx, n + x]);
        }
        m
    }
}

/// A function on the points; a subset of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain0(pub BitVector);

/// A pair `(P, Q)`, one value per point and generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain1 {
    pub p: BitVector,
    pub q: BitVector,
}

/// One value per plaquette, i.e. per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain2(pub BitVector);

impl Cochain1 {
    pub fn zeros(n: usize) -> Self {
        Cochain1 {
            p: BitVector::zeros(n),
            q: BitVector::zeros(n),
        }
    }

    /// `P` then `Q`, the variable order of [`Action2D::d1_matrix`].
    pub fn stacked(&self) -> BitVector {
        let n = self.p.len();
        let mut v = BitVector::zeros(2 * n);
        for i in self.p.iter_ones() {
            v.set(i, true);
        }
        for i in self.q.iter_ones() {
            v.set(n + i, true);
        }
        v
    }

    pub fn from_stacked(v: &BitVector) -> Self {
        let n = v.len() / 2;
        let mut c = Cochain1::zeros(n);
        for i in v.iter_ones() {
            if i < n {
                c.p.set(i, true);
            } else {
                c.q.set(i - n, true);
            }
        }
        c
    }
}

pub fn d0(action: &Action2D, c: &Cochain0) -> Result<Cochain1> {
    action.check(c.0.len())?;
    Ok(Cochain1 {
        p: c.0.compose(action.s.images()).xor(&c.0),
        q: c.0.compose(action.t.images()).xor(&c.0),
    })
}

pub fn d1(action: &Action2D, pq: &Cochain1) -> Result<Cochain2> {
    action.check(pq.p.len())?;
    action.check(pq.q.len())?;
    let mut f = pq.p.xor(&pq.q);
    f.xor_assign(&pq.q.compose(action.s.images()));
    f.xor_assign(&pq.p.compose(action.t.images()));
    Ok(Cochain2(f))
}

/// A gauge field with curl `f`, the lexicographically least in the order
/// `P_0, ..., P_{n-1}, Q_0, ..., Q_{n-1}`; `None` if there is none.
pub fn solve_curl(action: &Action2D, f: &Cochain2) -> Result<Option<Cochain1>> {
    action.check(f.0.len())?;
    Ok(action.d1_matrix().solve(&f.0).map(|v| Cochain1::from_stacked(&v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyDims {
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
    pub rank_d0: usize,
    pub rank_d1: usize,
}

impl CohomologyDims {
    pub fn triple(&self) -> (usize, usize, usize) {
        (self.h0, self.h1, self.h2)
    }
}

pub fn cohomology_dims(action: &Action2D) -> CohomologyDims {
    let n = action.len();
    let rank_d0 = action.d0_matrix().rank();
    let rank_d1 = action.d1_matrix().rank();
    CohomologyDims {
        h0: n - rank_d0,
        h1: 2 * n - rank_d1 - rank_d0,
        h2: n - rank_d1,
        rank_d0,
        rank_d1,
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    m: usize,
    n: usize,
}

/// Cochains as JSON: `{"m", "n", "bits"}` for degrees 0 and 2 and
/// `{"m", "n", "p", "q"}` for degree 1, bits in lowercase hex.
pub mod json {
    use super::*;
    use serde_json::{json, Value};

    fn header(v: &Value) -> Result<(usize, usize)> {
        let h: Header = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Ok((h.m, h.n))
    }

    fn field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
        v.get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse(format!("missing `{key}`")))
    }

    pub fn write_bits(shape: (usize, usize), bits: &BitVector) -> Value {
        json!({"m": shape.0, "n": shape.1, "bits": bits.to_hex()})
    }

    pub fn read_bits(v: &Value) -> Result<((usize, usize), BitVector)> {
        let (m, n) = header(v)?;
        Ok(((m, n), BitVector::from_hex(m * n, field(v, "bits")?)?))
    }

    pub fn write_pair(shape: (usize, usize), c: &Cochain1) -> Value {
        json!({"m": shape.0, "n": shape.1, "p": c.p.to_hex(), "q": c.q.to_hex()})
    }

    pub fn read_pair(v: &Value) -> Result<((usize, usize), Cochain1)> {
        let (m, n) = header(v)?;
        Ok((
            (m, n),
            Cochain1 {
                p: BitVector::from_hex(m * n, field(v, "p")?)?,
                q: BitVector::from_hex(m * n, field(v, "q")?)?,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cell(n: usize, i: usize, j: usize) -> usize {
        i * n + j
    }

    fn ind(len: usize, xs: &[usize]) -> BitVector {
        BitVector::from_indices(len, xs).unwrap()
    }

    fn from_mask(len: usize, mask: u64) -> BitVector {
        BitVector::from_bools(&(0..len).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
    }

    fn brute_rank(m: &Gf2Matrix) -> usize {
        // size of the image, found by enumerating every input
        let k = m.ncols();
        let images: std::collections::HashSet<String> = (0..1u64 << k)
            .map(|mask| m.mul_vec(&from_mask(k, mask)).to_hex())
            .collect();
        images.len().trailing_zeros() as usize
    }

    #[test]
    fn d0_examples() {
        let g = Action2D::torus_grid(2, 2).unwrap();
        let zero = d0(&g, &Cochain0(BitVector::zeros(4))).unwrap();
        assert_eq!(zero, Cochain1::zeros(4));
        assert_eq!(d0(&g, &Cochain0(BitVector::ones(4))).unwrap(), Cochain1::zeros(4));
        let pq = d0(&g, &Cochain0(ind(4, &[cell(2, 0, 0)]))).unwrap();
        assert_eq!(pq.p, ind(4, &[cell(2, 0, 0), cell(2, 1, 0)]));
        assert_eq!(pq.q, ind(4, &[cell(2, 0, 0), cell(2, 0, 1)]));
    }

    #[test]
    fn d1_examples() {
        let g = Action2D::torus_grid(2, 2).unwrap();
        let pq = Cochain1 {
            p: ind(4, &[cell(2, 0, 0)]),
            q: BitVector::zeros(4),
        };
        assert_eq!(d1(&g, &pq).unwrap().0, ind(4, &[cell(2, 0, 0), cell(2, 0, 1)]));
        assert!(d1(&g, &Cochain1::zeros(4)).unwrap().0.is_zero());
        assert!(d1(&g, &Cochain1::zeros(5)).is_err());
        assert!(d0(&g, &Cochain0(BitVector::zeros(3))).is_err());
    }

    #[test]
    fn matrices_agree_with_the_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Action2D::torus_grid(3, 5).unwrap();
        for _ in 0..50 {
            let c = BitVector::random(15, 0.5, &mut rng);
            let pq = d0(&g, &Cochain0(c.clone())).unwrap();
            assert_eq!(g.d0_matrix().mul_vec(&c), pq.stacked());
            let r = Cochain1 {
                p: BitVector::random(15, 0.5, &mut rng),
                q: BitVector::random(15, 0.5, &mut rng),
            };
            assert_eq!(g.d1_matrix().mul_vec(&r.stacked()), d1(&g, &r).unwrap().0);
            assert_eq!(Cochain1::from_stacked(&r.stacked()), r);
        }
    }

    #[test]
    fn non_commuting_actions_are_rejected() {
        let s = FinitePermutation::new(vec![1, 0, 2]).unwrap();
        let t = FinitePermutation::new(vec![0, 2, 1]).unwrap();
        assert!(matches!(Action2D::new(s, t), Err(Error::NonCommuting(_))));
        let short = FinitePermutation::identity(2);
        assert!(Action2D::new(short, FinitePermutation::identity(3)).is_err());
        assert!(Action2D::torus_grid(0, 3).is_err());
    }

    #[test]
    fn curl_of_gradient_vanishes_up_to_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let shapes = [(1, 1), (2, 2), (3, 7), (16, 16), (31, 64), (64, 64)];
        for i in 0..1000 {
            let (m, n) = shapes[i % shapes.len()];
            let g = Action2D::torus_grid(m, n).unwrap();
            let c = Cochain0(BitVector::random(m * n, 0.5, &mut rng));
            assert!(d1(&g, &d0(&g, &c).unwrap()).unwrap().0.is_zero());
        }
    }

    #[test]
    fn small_grid_dims_match_brute_force() {
        for (m, n) in [(2, 2), (2, 3), (3, 3)] {
            let g = Action2D::torus_grid(m, n).unwrap();
            let dims = cohomology_dims(&g);
            assert_eq!(dims.rank_d0, brute_rank(&g.d0_matrix()));
            assert_eq!(dims.rank_d1, brute_rank(&g.d1_matrix()));
            assert_eq!(dims.triple(), (1, 2, 1), "{m}x{n}");
        }
    }

    #[test]
    fn torus_grids_have_torus_cohomology() {
        for (m, n) in [(2, 5), (4, 4), (5, 3), (8, 8), (7, 12), (16, 16), (32, 32)] {
            let dims = cohomology_dims(&Action2D::torus_grid(m, n).unwrap());
            assert_eq!(dims.triple(), (1, 2, 1), "{m}x{n}");
        }
    }

    #[test]
    fn trivial_action_has_full_cohomology() {
        for n in [1, 4, 9] {
            assert_eq!(cohomology_dims(&Action2D::identity(n)).triple(), (n, 2 * n, n));
        }
    }

    #[test]
    fn euler_characteristic_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            // powers of one permutation always commute
            let base = FinitePermutation::random(40, &mut rng);
            let sq = base.compose(&base).unwrap();
            let g = Action2D::new(base, sq).unwrap();
            let d = cohomology_dims(&g);
            assert_eq!(d.h0 + d.h2, d.h1);
        }
    }

    #[test]
    fn curl_solvability_is_total_parity_exhaustively() {
        for (m, n) in [(2, 2), (2, 3), (3, 3)] {
            let g = Action2D::torus_grid(m, n).unwrap();
            let len = m * n;
            let mut reachable = std::collections::HashSet::new();
            for mask in 0..1u64 << (2 * len) {
                let pq = Cochain1::from_stacked(&from_mask(2 * len, mask));
                reachable.insert(d1(&g, &pq).unwrap().0.to_hex());
            }
            for mask in 0..1u64 << len {
                let f = Cochain2(from_mask(len, mask));
                let solved = solve_curl(&g, &f).unwrap();
                assert_eq!(solved.is_some(), f.0.count_ones().is_multiple_of(2));
                assert_eq!(solved.is_some(), reachable.contains(&f.0.to_hex()));
                if let Some(pq) = solved {
                    assert_eq!(d1(&g, &pq).unwrap(), f);
                }
            }
        }
    }

    #[test]
    fn curl_solution_is_lexicographically_least() {
        let g = Action2D::torus_grid(2, 2).unwrap();
        let f = Cochain2(ind(4, &[0, 3]));
        let best = solve_curl(&g, &f).unwrap().unwrap().stacked();
        let key = |v: &BitVector| (0..v.len()).map(|i| v.get(i)).collect::<Vec<_>>();
        for mask in 0..1u64 << 8 {
            let v = from_mask(8, mask);
            if d1(&g, &Cochain1::from_stacked(&v)).unwrap() == f {
                assert!(key(&best) <= key(&v));
            }
        }
        let zero = solve_curl(&g, &Cochain2(BitVector::zeros(4))).unwrap().unwrap();
        assert_eq!(zero, Cochain1::zeros(4));
    }

    #[test]
    fn plaquette_examples() {
        let g = Action2D::torus_grid(3, 3).unwrap();
        assert!(solve_curl(&g, &Cochain2(ind(9, &[4]))).unwrap().is_none());
        let pq = solve_curl(&g, &Cochain2(ind(9, &[1, 7]))).unwrap().unwrap();
        assert_eq!(d1(&g, &pq).unwrap().0, ind(9, &[1, 7]));
    }

    #[test]
    fn json_round_trip() {
        let g = Action2D::torus_grid(3, 4).unwrap();
        let c = ind(12, &[0, 5, 11]);
        let v = json::write_bits(g.shape(), &c);
        assert_eq!(v["m"], 3);
        assert_eq!(json::read_bits(&v).unwrap(), ((3, 4), c.clone()));
        let pq = d0(&g, &Cochain0(c)).unwrap();
        let v = json::write_pair(g.shape(), &pq);
        assert_eq!(json::read_pair(&v).unwrap(), ((3, 4), pq));
    }

    proptest! {
        #[test]
        fn d0_is_linear(m in 1usize..6, n in 1usize..6, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = Action2D::torus_grid(m, n).unwrap();
            let a = BitVector::random(m * n, 0.5, &mut rng);
            let b = BitVector::random(m * n, 0.5, &mut rng);
            let da = d0(&g, &Cochain0(a.clone())).unwrap();
            let db = d0(&g, &Cochain0(b.clone())).unwrap();
            let dab = d0(&g, &Cochain0(a.xor(&b))).unwrap();
            prop_assert_eq!(dab.p, da.p.xor(&db.p));
            prop_assert_eq!(dab.q, da.q.xor(&db.q));
        }
    }
}
