//! Koopman correlation analysis.
//!
//! Correlations `c[n] ~ <U^n f, f>` are Birkhoff averages along one seeded
//! orbit. Their Cesaro mean of squares (the Wiener statistic) tends to the
//! sum of squared atom masses of the spectral measure of `f`: zero exactly
//! when that measure is continuous, i.e. when `f` sees no eigenvalue.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynsys::{FinitePermutation, Point, System};
use crate::error::{Error, Result};
use crate::induced::{default_cap, sample_in};
use crate::msets::Set;

/// Weak-mixing statistic below this reads as continuous spectrum.
pub const CONTINUOUS_THRESHOLD: f64 = 0.05;
/// Weak-mixing statistic above this reads as point spectrum.
pub const POINT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObservableKind {
    /// `exp(2 pi i k.x)` on the torus, `exp(2 pi i k x / n)` on `n` points.
    TorusCharacter { k: Vec<i64> },
    /// `(-1)^s` on `X x Z2`.
    FiberSign,
    /// Piecewise constant on the uniform `n^d` grid (row-major values), or a
    /// value per point on a finite system (`d = 1`, `n` points).
    GridFunction { n: usize, d: usize, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub kind: ObservableKind,
    pub mean_removed: bool,
}

impl Observable {
    pub fn character(k: Vec<i64>) -> Self {
        Observable {
            kind: ObservableKind::TorusCharacter { k },
            mean_removed: true,
        }
    }

    pub fn fiber_sign() -> Self {
        Observable {
            kind: ObservableKind::FiberSign,
            mean_removed: true,
        }
    }

    pub fn constant(value: f64) -> Self {
        Observable {
            kind: ObservableKind::GridFunction {
                n: 1,
                d: 1,
                values: vec![value],
            },
            mean_removed: false,
        }
    }

    pub fn with_mean_removed(mut self, on: bool) -> Self {
        self.mean_removed = on;
        self
    }

    fn check(&self, system: &System) -> Result<()> {
        match (&self.kind, system) {
            (ObservableKind::TorusCharacter { k }, System::Finite { .. }) if k.len() == 1 => Ok(()),
            (ObservableKind::TorusCharacter { k }, s) if Some(k.len()) == s.dim() => Ok(()),
            (ObservableKind::TorusCharacter { k }, s) => Err(Error::ObservableMismatch(format!(
                "character of dimension {} on a {}",
                k.len(),
                s.kind_name()
            ))),
            (ObservableKind::FiberSign, _) => Ok(()),
            (ObservableKind::GridFunction { n, d, values }, s) => {
                if values.len() != n.pow(*d as u32) || *n == 0 {
                    return Err(Error::ObservableMismatch("grid function size".into()));
                }
                match s {
                    System::Finite { perm } if *d == 1 && (*n == perm.len() || *n == 1) => Ok(()),
                    System::Finite { .. } => Err(Error::ObservableMismatch(
                        "finite systems need one value per point".into(),
                    )),
                    _ if *n == 1 || s.dim() == Some(*d) => Ok(()),
                    _ => Err(Error::ObservableMismatch("grid function dimension".into())),
                }
            }
        }
    }

    #[inline]
    pub fn eval(&self, system: &System, state: &OrbitState) -> Complex64 {
        match &self.kind {
            ObservableKind::TorusCharacter { k } => {
                let phase = match &state.point {
                    Point::Index(i) => {
                        let n = system.as_finite().map_or(1, FinitePermutation::len);
                        k[0] as f64 * *i as f64 / n as f64
                    }
                    Point::Torus(t) => k.iter().zip(t.coords()).map(|(&kj, &xj)| kj as f64 * xj).sum(),
                };
                Complex64::from_polar(1.0, TAU * phase)
            }
            ObservableKind::FiberSign => Complex64::new(if state.fiber { -1.0 } else { 1.0 }, 0.0),
            ObservableKind::GridFunction { n, d, values } => {
                if *n == 1 {
                    return Complex64::new(values[0], 0.0);
                }
                let cell = match &state.point {
                    Point::Index(i) => *i,
                    Point::Torus(t) => {
                        let c = t.coords();
                        let axis = |v: f64| ((v * *n as f64) as usize).min(n - 1);
                        if *d == 1 {
                            axis(c[0])
                        } else {
                            axis(c[0]) * n + axis(c[1])
                        }
                    }
                };
                Complex64::new(values[cell], 0.0)
            }
        }
    }
}

/// Which transformation generates the orbit.
#[derive(Clone, Debug, PartialEq)]
pub enum Process {
    /// `T` itself.
    Base,
    /// The induced map `T_A`.
    Induced { set: Set, cap: Option<u64> },
    /// The skew product `(x, s) -> (Tx, s + 1_A(x))`.
    Skew { set: Set },
}

impl Process {
    pub fn name(&self) -> &'static str {
        match self {
            Process::Base => "base",
            Process::Induced { .. } => "induced",
            Process::Skew { .. } => "skew",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitState {
    pub point: Point,
    pub fiber: bool,
}

/// `len` consecutive states of the process from a start drawn from its
/// invariant measure.
pub fn sample_orbit(system: &System, process: &Process, len: usize, seed: u64) -> Result<Vec<OrbitState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = OrbitState {
        point: match process {
            Process::Induced { set, .. } => {
                set.check_system(system)?;
                sample_in(system, set, &mut rng)?
            }
            Process::Skew { set } => {
                set.check_system(system)?;
                system.sample_point(&mut rng)
            }
            Process::Base => system.sample_point(&mut rng),
        },
        fiber: false,
    };
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(state.clone());
        match process {
            Process::Base => system.step(&mut state.point),
            Process::Skew { set } => {
                state.fiber ^= set.contains_unchecked(&state.point);
                system.step(&mut state.point);
            }
            Process::Induced { set, cap } => {
                let cap = cap.unwrap_or_else(|| default_cap(set));
                let mut t = 0;
                loop {
                    system.step(&mut state.point);
                    t += 1;
                    if set.contains_unchecked(&state.point) {
                        break;
                    }
                    if t == cap {
                        return Err(Error::CapExceeded { cap });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSequence {
    /// Largest lag `L`; `c` holds lags `0..=L`.
    pub lags: usize,
    pub c: Vec<Complex64>,
    pub orbit_length: u64,
    pub seed: u64,
    pub mean_removed: bool,
    /// Empirical orbit mean of the observable before any removal.
    pub mean: Complex64,
}

impl CorrelationSequence {
    /// A sequence given directly by its values, `c[0..=L]`.
    pub fn from_values(c: Vec<Complex64>, mean_removed: bool) -> Self {
        CorrelationSequence {
            lags: c.len().saturating_sub(1),
            c,
            orbit_length: 0,
            seed: 0,
            mean_removed,
            mean: Complex64::new(0.0, 0.0),
        }
    }

    /// `lag,re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lag,re,im\n");
        for (n, z) in self.c.iter().enumerate() {
            writeln!(s, "{n},{},{}", z.re, z.im).expect("write to string");
        }
        s
    }
}

/// Birkhoff estimate `c[n] = (1/M) sum_{j<M} f(x_{j+n}) conj(f(x_j))` for
/// `n = 0..=lags` along an orbit of `M + lags` states.
pub fn autocorrelation(
    system: &System,
    process: &Process,
    f: &Observable,
    orbit_length: u64,
    lags: usize,
    seed: u64,
) -> Result<CorrelationSequence> {
    if orbit_length < 10 * lags as u64 || orbit_length == 0 {
        return Err(Error::InsufficientOrbit {
            got: orbit_length,
            need: (10 * lags as u64).max(1),
        });
    }
    f.check(system)?;
    let m = orbit_length as usize;
    let orbit = sample_orbit(system, process, m + lags, seed)?;
    let mut values: Vec<Complex64> = orbit.iter().map(|s| f.eval(system, s)).collect();
    let mean = values.iter().sum::<Complex64>() / values.len() as f64;
    if f.mean_removed {
        for v in &mut values {
            *v -= mean;
        }
    }
    Ok(CorrelationSequence {
        lags,
        c: lagged_products(&values, m, lags),
        orbit_length,
        seed,
        mean_removed: f.mean_removed,
        mean,
    })
}

/// `(1/m) sum_{j<m} v[j+n] conj(v[j])` for `n = 0..=lags`, by blocked FFT
/// cross-correlation. Requires `v.len() >= m + lags`.
pub(crate) fn lagged_products(v: &[Complex64], m: usize, lags: usize) -> Vec<Complex64> {
    assert!(v.len() >= m + lags);
    let size = (4 * (lags + 1)).next_power_of_two().max(1024);
    let block = size - lags;
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = vec![zero; lags + 1];
    let mut g = vec![zero; size];
    let mut h = vec![zero; size];
    let mut start = 0;
    while start < m {
        let len = block.min(m - start);
        g.fill(zero);
        h.fill(zero);
        g[..len + lags].copy_from_slice(&v[start..start + len + lags]);
        h[..len].copy_from_slice(&v[start..start + len]);
        forward.process(&mut g);
        forward.process(&mut h);
        for (a, b) in g.iter_mut().zip(&h) {
            *a *= b.conj();
        }
        inverse.process(&mut g);
        for (n, slot) in acc.iter_mut().enumerate() {
            *slot += g[n];
        }
        start += len;
    }
    let scale = 1.0 / (size as f64 * m as f64);
    acc.into_iter().map(|z| z * scale).collect()
}

/// `(1/L) sum_{n=1}^{L} |c[n]|^2 / c[0]^2`.
pub fn wiener_statistic(c: &CorrelationSequence) -> Result<f64> {
    if !c.mean_removed {
        return Err(Error::InvalidParameter(
            "the weak-mixing statistic needs a mean-removed observable".into(),
        ));
    }
    let c0 = c.c.first().map_or(0.0, |z| z.re);
    if c0 <= f64::EPSILON || c.lags == 0 {
        return Err(Error::DegenerateObservable);
    }
    let sum: f64 = c.c[1..].iter().map(|z| z.norm_sqr()).sum();
    Ok(sum / (c.lags as f64 * c0 * c0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensityEstimate {
    pub bins: usize,
    /// Estimated spectral mass of `[b / bins, (b + 1) / bins)` on the
    /// frequency circle.
    pub density: Vec<f64>,
    pub total_mass: f64,
}

impl SpectralDensityEstimate {
    /// `bin,density` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin,density\n");
        for (b, d) in self.density.iter().enumerate() {
            writeln!(s, "{b},{d}").expect("write to string");
        }
        s
    }

    pub fn peak(&self) -> (usize, f64) {
        self.density
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::MIN), |best, (b, d)| if d > best.1 { (b, d) } else { best })
    }
}

/// Fejer-smoothed spectral measure of `c`, binned on the frequency circle.
///
/// `F(w) = sum_{|n|<=L} (1 - |n|/(L+1)) c[n] exp(-2 pi i n w)` is evaluated on
/// a grid of `P >= L + 1` frequencies (a multiple of `bins`), clipped at
/// zero and summed per bin with weight `1/P`. Without clipping the bins add
/// up to `c[0]` exactly.
pub fn spectral_density(c: &CorrelationSequence, bins: usize) -> Result<SpectralDensityEstimate> {
    let lags = c.lags;
    if bins == 0 || bins > lags.max(1) {
        return Err(Error::InvalidParameter(format!(
            "bins must be in 1..={}, got {bins}",
            lags.max(1)
        )));
    }
    let fine = bins * (lags + 1).div_ceil(bins);
    let mut a = vec![Complex64::new(0.0, 0.0); fine];
    for (n, z) in c.c.iter().enumerate() {
        a[n] = z * (1.0 - n as f64 / (lags + 1) as f64);
    }
    FftPlanner::new().plan_fft_forward(fine).process(&mut a);
    let c0 = c.c[0].re;
    let per_bin = fine / bins;
    let density: Vec<f64> = a
        .chunks(per_bin)
        .map(|chunk| {
            chunk
                .iter()
                .map(|z| (2.0 * z.re - c0).max(0.0))
                .sum::<f64>()
                / fine as f64
        })
        .collect();
    Ok(SpectralDensityEstimate {
        bins,
        total_mass: density.iter().sum(),
        density,
    })
}

/// Eigenvalues of the Koopman operator of a permutation: the `l`-th roots of
/// unity for every cycle of length `l`, cycle by cycle.
pub fn koopman_spectrum_finite(perm: &FinitePermutation) -> Vec<Complex64> {
    perm.cycles()
        .iter()
        .flat_map(|cycle| {
            let l = cycle.len();
            (0..l).map(move |k| Complex64::from_polar(1.0, TAU * k as f64 / l as f64))
        })
        .collect()
}

pub fn eigenvalue_multiplicity(spectrum: &[Complex64], lambda: Complex64, tol: f64) -> usize {
    spectrum.iter().filter(|z| (*z - lambda).norm() < tol).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralVerdict {
    PointSpectrumConsistent,
    ContinuousSpectrumConsistent,
    Inconclusive,
}

pub fn classify_wiener(wm: f64) -> SpectralVerdict {
    if wm < CONTINUOUS_THRESHOLD {
        SpectralVerdict::ContinuousSpectrumConsistent
    } else if wm > POINT_THRESHOLD {
        SpectralVerdict::PointSpectrumConsistent
    } else {
        SpectralVerdict::Inconclusive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub orbit_length: u64,
    pub lags: usize,
    pub seed: u64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            orbit_length: 1_000_000,
            lags: 4096,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakMixingReport {
    pub observable: Observable,
    pub process: String,
    pub wiener: f64,
    pub c0: f64,
    pub verdict: SpectralVerdict,
    pub orbit_length: u64,
    pub lags: usize,
    pub seed: u64,
}

/// Wiener statistic and verdict for each observable, along the orbit of the
/// base map, the induced map or the skew product.
pub fn weak_mixing_experiment(
    system: &System,
    process: &Process,
    observables: &[Observable],
    params: &SpectralParams,
) -> Result<Vec<WeakMixingReport>> {
    observables
        .iter()
        .map(|f| {
            if !f.mean_removed {
                return Err(Error::InvalidParameter(
                    "weak-mixing experiments need mean-removed observables".into(),
                ));
            }
            let c = autocorrelation(system, process, f, params.orbit_length, params.lags, params.seed)?;
            let wiener = wiener_statistic(&c)?;
            Ok(WeakMixingReport {
                observable: f.clone(),
                process: process.name().into(),
                wiener,
                c0: c.c[0].re,
                verdict: classify_wiener(wiener),
                orbit_length: params.orbit_length,
                lags: params.lags,
                seed: params.seed,
            })
        })
        .collect()
}
