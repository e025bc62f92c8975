//! Chi-square equidistribution tests with a three-way verdict.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper quantile used as the acceptance threshold.
pub const CHI_SQUARE_LEVEL: f64 = 0.995;
/// A statistic this many times the threshold is a decisive rejection.
pub const REJECT_FACTOR: f64 = 10.0;
/// Minimum visit count for an empty bin to be decisive evidence.
pub const MIN_DECISIVE_VISITS: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ErgodicConsistent,
    NonErgodic,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::ErgodicConsistent => "ergodic-consistent",
            Verdict::NonErgodic => "non-ergodic",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

pub fn chi_square_quantile(dof: usize, level: f64) -> f64 {
    ChiSquared::new(dof.max(1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(level)
}

/// Pearson statistic over bins with positive expectation. Returns the
/// statistic and the number of such bins.
pub fn pearson(observed: &[u64], expected: &[f64]) -> (f64, usize) {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .fold((0.0, 0), |(acc, k), (&o, &e)| {
            let d = o as f64 - e;
            (acc + d * d / e, k + 1)
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub verdict: Verdict,
    pub statistic: f64,
    pub threshold: f64,
    pub dof: usize,
    /// Bins that stayed empty although the evidence says they should not have.
    pub decisive_empty_bins: usize,
}

/// Decides from a histogram against its expectation.
///
/// With `paired`, bins come in mirror pairs `(2c, 2c + 1)` (a cell and the
/// two fiber values above it); an empty bin is decisive when its mirror holds
/// more than `max(10, e / 2)` visits. Without pairing, an empty bin is
/// decisive when its own expectation is at least 10.
///
/// The statistic below the 99.5% quantile of chi-square with (bins - 1)
/// degrees of freedom reads as ergodic-consistent; above ten times that
/// quantile, or with any decisive empty bin, as non-ergodic; anything else is
/// inconclusive.
pub fn decide(observed: &[u64], expected: &[f64], paired: bool) -> ChiSquareOutcome {
    assert_eq!(observed.len(), expected.len());
    let (statistic, bins) = pearson(observed, expected);
    let dof = bins.saturating_sub(1).max(1);
    let threshold = chi_square_quantile(dof, CHI_SQUARE_LEVEL);
    let decisive_empty_bins = if paired {
        (0..observed.len())
            .filter(|&b| {
                let mirror = b ^ 1;
                observed[b] == 0
                    && expected[b] > 0.0
                    && observed[mirror] as f64 > MIN_DECISIVE_VISITS.max(expected[b] / 2.0)
            })
            .count()
    } else {
        (0..observed.len())
            .filter(|&b| observed[b] == 0 && expected[b] >= MIN_DECISIVE_VISITS)
            .count()
    };
    let verdict = if decisive_empty_bins > 0 || statistic > REJECT_FACTOR * threshold {
        Verdict::NonErgodic
    } else if statistic < threshold {
        Verdict::ErgodicConsistent
    } else {
        Verdict::Inconclusive
    };
    ChiSquareOutcome {
        verdict,
        statistic,
        threshold,
        dof,
        decisive_empty_bins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_quantiles() {
        // chi-square(1) 99.5% point is 7.879; chi-square(127) is about 171.8
        assert!((chi_square_quantile(1, 0.995) - 7.879_438_576_622_42).abs() < 1e-6);
        assert!((chi_square_quantile(127, 0.995) - 171.796).abs() < 1e-2);
    }

    #[test]
    fn pearson_matches_hand_value() {
        let (x2, k) = pearson(&[1, 2, 3, 4], &[2.0, 3.0, 4.0, 1.0]);
        assert!((x2 - 10.083_333_333_333_334).abs() < 1e-12);
        assert_eq!(k, 4);
    }

    #[test]
    fn uniform_histogram_is_ergodic_consistent() {
        let out = decide(&[10; 8], &[10.0; 8], true);
        assert_eq!(out.verdict, Verdict::ErgodicConsistent);
        assert_eq!(out.statistic, 0.0);
    }

    #[test]
    fn half_empty_pairs_are_non_ergodic() {
        let out = decide(&[20, 0, 0, 20, 20, 0, 20, 0], &[10.0; 8], true);
        assert_eq!(out.verdict, Verdict::NonErgodic);
        assert_eq!(out.decisive_empty_bins, 4);
    }

    #[test]
    fn middle_band_is_inconclusive() {
        // (30^2 + 30^2) / 100 = 18 sits between q = 7.88 and 10 q for one dof
        let out = decide(&[130, 70], &[100.0, 100.0], false);
        assert!(out.statistic > out.threshold && out.statistic < 10.0 * out.threshold);
        assert_eq!(out.verdict, Verdict::Inconclusive);
    }
}
