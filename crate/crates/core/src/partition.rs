//! Uniform cell partitions of the torus used for orbit histograms.

use crate::dynsys::{Point, System};
use crate::error::{Error, Result};

/// `cells` equal intervals in one dimension, a `k x k` grid with `k^2 = cells`
/// in two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellPartition {
    dim: usize,
    per_axis: usize,
}

impl CellPartition {
    pub fn for_system(system: &System, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidParameter("cells must be positive".into()));
        }
        match system.dim() {
            Some(1) => Ok(CellPartition { dim: 1, per_axis: cells }),
            Some(2) => {
                let k = (cells as f64).sqrt().round() as usize;
                if k * k != cells {
                    return Err(Error::InvalidParameter(format!(
                        "two-dimensional systems need a square cell count, got {cells}"
                    )));
                }
                Ok(CellPartition { dim: 2, per_axis: k })
            }
            Some(d) => Err(Error::InvalidParameter(format!(
                "cell partitions support dimensions 1 and 2, got {d}"
            ))),
            None => Err(Error::InvalidParameter(
                "finite systems are binned per point".into(),
            )),
        }
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.per_axis == 0
    }

    #[inline]
    pub fn index(&self, x: &Point) -> usize {
        let c = x.as_torus().expect("torus point").coords();
        let k = self.per_axis;
        let axis = |v: f64| ((v * k as f64) as usize).min(k - 1);
        match self.dim {
            1 => axis(c[0]),
            _ => axis(c[0]) * k + axis(c[1]),
        }
    }

    /// Lower and upper corners of a cell.
    pub fn bounds(&self, cell: usize) -> (Vec<f64>, Vec<f64>) {
        let k = self.per_axis as f64;
        let idx = match self.dim {
            1 => vec![cell],
            _ => vec![cell / self.per_axis, cell % self.per_axis],
        };
        (
            idx.iter().map(|&i| i as f64 / k).collect(),
            idx.iter().map(|&i| (i + 1) as f64 / k).collect(),
        )
    }
}
