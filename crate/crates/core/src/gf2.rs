//! Dense GF(2) matrices with bit-packed rows and Gaussian elimination.

use crate::bits::BitVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Matrix {
    ncols: usize,
    rows: Vec<BitVector>,
}

impl Gf2Matrix {
    pub fn new(ncols: usize) -> Self {
        Gf2Matrix {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(ncols: usize, rows: Vec<BitVector>) -> Self {
        assert!(rows.iter().all(|r| r.len() == ncols));
        Gf2Matrix { ncols, rows }
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.ncols);
        self.rows.push(row);
    }

    /// Appends the row with ones at `cols`; repeated columns cancel.
    pub fn push_sparse_row(&mut self, cols: &[usize]) {
        let mut row = BitVector::zeros(self.ncols);
        for &c in cols {
            row.toggle(c);
        }
        self.rows.push(row);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        assert_eq!(x.len(), self.ncols);
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let parity = row
                .words()
                .iter()
                .zip(x.words())
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
            if parity & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        eliminate(&mut rows, None).len()
    }

    /// Solves `self * x = rhs`, returning the lexicographically least solution
    /// (coordinate 0 most significant), or `None` if the system is inconsistent.
    pub fn solve(&self, rhs: &BitVector) -> Option<BitVector> {
        assert_eq!(rhs.len(), self.rows.len());
        let mut rows = self.rows.clone();
        let mut b: Vec<bool> = (0..rhs.len()).map(|i| rhs.get(i)).collect();
        let pivots = eliminate(&mut rows, Some(&mut b));
        if b[pivots.len()..].iter().any(|&v| v) {
            return None;
        }
        // Pivot rows carry no free column above their pivot, so zero free
        // variables leave each pivot variable equal to its right-hand side.
        let mut x = BitVector::zeros(self.ncols);
        for (r, &col) in pivots.iter().enumerate() {
            if b[r] {
                x.set(col, true);
            }
        }
        Some(x)
    }
}

/// Reduced row echelon form with pivots taken from the highest column down.
/// Returns the pivot column of each of the leading rows; rows past the pivots
/// are zero. `rhs`, if given, is transformed alongside.
fn eliminate(rows: &mut [BitVector], mut rhs: Option<&mut Vec<bool>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in (0..ncols).rev() {
        if next == rows.len() {
            break;
        }
        let Some(p) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(next, p);
        if let Some(b) = rhs.as_deref_mut() {
            b.swap(next, p);
        }
        let (head, tail) = rows.split_at_mut(next);
        let (pivot, tail) = tail.split_first_mut().expect("pivot row");
        for (r, row) in head.iter_mut().enumerate() {
            if row.get(col) {
                row.xor_assign(pivot);
                if let Some(b) = rhs.as_deref_mut() {
                    b[r] ^= b[next];
                }
            }
        }
        for (k, row) in tail.iter_mut().enumerate() {
            if row.get(col) {
                row.xor_assign(pivot);
                if let Some(b) = rhs.as_deref_mut() {
                    let r = next + 1 + k;
                    b[r] ^= b[next];
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    pivots
}
