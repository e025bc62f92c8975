//! A laboratory for Z2 cocycles over measure-preserving systems.
//!
//! * [`dynsys`]: finite permutations, torus rotations and the cat map;
//! * [`msets`]: measurable sets and the metric group `(A, +)`;
//! * [`cobound`]: the coboundary operator, exact finite solving and the
//!   skew-product ergodicity test;
//! * [`induced`]: first-return (induced) maps and return-time statistics;
//! * [`spectral`]: Koopman correlations, the Wiener weak-mixing statistic and
//!   spectral density estimates;
//! * [`cohomo2d`]: the GF(2) cochain complex of a pair of commuting
//!   permutations;
//! * [`challenge`]: the cat-map coboundary question across grid resolutions.

pub mod bits;
pub mod challenge;
pub mod cobound;
pub mod cohomo2d;
pub mod dynsys;
pub mod error;
pub mod gf2;
pub mod induced;
pub mod msets;
pub mod partition;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
