//! Complex signal primitives, probe generators and the cyclic
//! time-shift / modulation operators.
//!
//! `time_shift` is a cyclic delay, `(T^k v)[n] = v[(n - k) mod N]`, and
//! `modulate` multiplies entry `n` by `exp(2 pi i n q / N)`. A time-frequency
//! shift applies the delay first and the modulation second, so atom `(k, q)`
//! is `M^q T^k f`.

use crate::bounds::is_prime;
use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, seeded};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;
use std::ops::Index;

/// Finite-energy signal of length N >= 1 with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(i) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(entries))
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Standard basis vector `e_index`.
    pub fn unit(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[index] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self, other>` with the conjugate on `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: other.len() });
        }
        Ok(inner(&self.0, &other.0))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }

    fn normalized(mut self) -> Self {
        let norm = self.norm();
        self.0.iter_mut().for_each(|z| *z /= norm);
        self
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A cell of the N x N delay/modulation grid. Flat index is `delay * N + doppler`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftIndex {
    pub delay: usize,
    pub doppler: usize,
}

impl ShiftIndex {
    pub fn new(delay: usize, doppler: usize, n: usize) -> Result<Self> {
        if delay >= n || doppler >= n {
            return Err(Error::IndexOutOfRange { index: delay.max(doppler), n });
        }
        Ok(Self { delay, doppler })
    }

    pub fn from_flat(flat: usize, n: usize) -> Result<Self> {
        if flat >= n * n {
            return Err(Error::IndexOutOfRange { index: flat, n });
        }
        Ok(Self { delay: flat / n, doppler: flat % n })
    }

    pub fn flat(&self, n: usize) -> usize {
        self.delay * n + self.doppler
    }
}

fn require_len(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptyVector)
    } else {
        Ok(())
    }
}

/// Alltop sequence `(1/sqrt N) exp(2 pi i n^3 / N)` for prime N >= 5.
pub fn alltop_sequence(n: usize) -> Result<ComplexVector> {
    if n < 5 {
        return Err(Error::DimensionTooSmall { n, min: 5 });
    }
    if !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    let modulus = n as u128;
    let amplitude = 1.0 / (n as f64).sqrt();
    let entries = (0..n)
        .map(|idx| {
            let i = idx as u128;
            let cube = (i * i % modulus) * i % modulus;
            Complex64::from_polar(amplitude, TAU * cube as f64 / n as f64)
        })
        .collect();
    Ok(ComplexVector(entries))
}

/// I.i.d. complex Gaussian entries normalized to unit norm.
pub fn random_gaussian_probe(n: usize, seed: u64) -> Result<ComplexVector> {
    require_len(n)?;
    let mut rng = seeded(seed);
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
        // an exactly zero draw has probability zero, but normalizing it would give NaN
        if norm2(&v) > 0.0 {
            return Ok(ComplexVector(v).normalized());
        }
    }
}

/// Constant-envelope probe `(1/sqrt N) exp(i theta_n)`, theta uniform on [0, 2 pi).
pub fn random_phase_probe(n: usize, seed: u64) -> Result<ComplexVector> {
    require_len(n)?;
    let mut rng = seeded(seed);
    let amplitude = 1.0 / (n as f64).sqrt();
    let entries = (0..n)
        .map(|_| Complex64::from_polar(amplitude, TAU * rng.gen::<f64>()))
        .collect();
    Ok(ComplexVector(entries))
}

/// Pulse width (standard deviation, in samples) per unit of sqrt(N). At N = 47
/// this gives the delay-axis half-maximum width of the self-ambiguity seven cells:
/// the autocorrelation of a sampled Gaussian of width w is a Gaussian of width
/// w * sqrt(2), whose FWHM is 4 w sqrt(ln 2).
pub const PULSE_WIDTH_PER_SQRT_N: f64 = 0.306_602_992_404_740_76;

/// Default Gaussian pulse width for dimension N.
pub fn default_pulse_width(n: usize) -> f64 {
    PULSE_WIDTH_PER_SQRT_N * (n as f64).sqrt()
}

/// Real periodized Gaussian centred at sample 0, unit norm.
pub fn gaussian_pulse(n: usize, width: f64) -> Result<ComplexVector> {
    require_len(n)?;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(format!("pulse width must be positive, got {width}")));
    }
    let entries = (0..n)
        .map(|i| {
            let d = i.min(n - i) as f64;
            Complex64::new((-d * d / (2.0 * width * width)).exp(), 0.0)
        })
        .collect();
    Ok(ComplexVector(entries).normalized())
}

/// Cyclic delay by `k` samples: output[n] = v[(n - k) mod N].
pub fn time_shift(v: &ComplexVector, k: i64) -> ComplexVector {
    let n = v.len();
    let k = k.rem_euclid(n as i64) as usize;
    let mut out = v.0.clone();
    out.rotate_right(k);
    ComplexVector(out)
}

/// Multiply entry n by exp(2 pi i n q / N).
pub fn modulate(v: &ComplexVector, q: i64) -> ComplexVector {
    let n = v.len();
    let q = q.rem_euclid(n as i64) as usize;
    let out = v
        .0
        .iter()
        .enumerate()
        .map(|(idx, z)| z * root_of_unity(idx * q % n, n))
        .collect();
    ComplexVector(out)
}

/// `exp(2 pi i p / n)` with `p` already reduced mod `n`.
pub(crate) fn root_of_unity(p: usize, n: usize) -> Complex64 {
    if p == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, TAU * p as f64 / n as f64)
    }
}

/// `M^q T^k v` for `idx = (k, q)`.
pub fn tf_shift(v: &ComplexVector, idx: ShiftIndex) -> ComplexVector {
    modulate(&time_shift(v, idx.delay as i64), idx.doppler as i64)
}
