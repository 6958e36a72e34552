//! The N x N^2 Gabor dictionary of all time-frequency shifts of a unit-norm probe.
//!
//! Column `k * N + q` is `M^q T^k f`. The dictionary is never stored densely; block
//! `k` acts as `diag(T^k f) * W` where `W` is the unnormalized length-N DFT with
//! kernel `exp(+2 pi i p q / N)`, so `apply` and `adjoint` cost N FFTs each.

use crate::error::{Error, Result};
use crate::tfcore::{inner, tf_shift, ComplexVector, ShiftIndex};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Index;
use std::sync::Arc;

/// Largest N for which Gram-based diagnostics run without an explicit opt-in.
pub const DEFAULT_DENSE_LIMIT: usize = 61;

const PROBE_NORM_TOL: f64 = 1e-9;

/// Coefficients over the N x N delay/doppler grid, flattened delay-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    n: usize,
    entries: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, actual: entries.len() });
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn unit(n: usize, idx: ShiftIndex) -> Result<Self> {
        let flat = ShiftIndex::new(idx.delay, idx.doppler, n)?.flat(n);
        let mut c = Self::zeros(n);
        c.entries[flat] = Complex64::new(1.0, 0.0);
        Ok(c)
    }

    /// Grid dimension N (the vector has N^2 entries).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn get(&self, idx: ShiftIndex) -> Complex64 {
        self.entries[idx.flat(self.n)]
    }

    pub fn norm(&self) -> f64 {
        crate::tfcore::norm2(&self.entries)
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).sum()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: other.len() });
        }
        Ok(inner(&self.entries, &other.entries))
    }

    /// Flat indices of entries with modulus strictly above `threshold`, ascending.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > threshold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Flat indices of the `k` largest-modulus entries, ties to the lower index.
    pub fn top_k(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by(|&a, &b| {
            self.entries[b].norm().total_cmp(&self.entries[a].norm()).then(a.cmp(&b))
        });
        order.truncate(k);
        order.sort_unstable();
        order
    }
}

impl Index<usize> for CoefficientVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

/// Work buffers for one thread of `apply`/`adjoint` calls.
pub(crate) struct TransformScratch {
    blocks: Vec<Complex64>,
    fft: Vec<Complex64>,
}

#[derive(Clone)]
pub struct GaborDictionary {
    probe: ComplexVector,
    /// Row k holds `T^k f`, i.e. entry `k * N + m` is `f[(m - k) mod N]`.
    shifted: Vec<Complex64>,
    shifted_conj: Vec<Complex64>,
    n: usize,
    frame_bound: f64,
    dense_limit: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GaborDictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaborDictionary")
            .field("n", &self.n)
            .field("frame_bound", &self.frame_bound)
            .field("dense_limit", &self.dense_limit)
            .finish_non_exhaustive()
    }
}

/// Dictionary over all N^2 shifts of `probe`. The probe must have unit norm.
pub fn build_dictionary(probe: &ComplexVector) -> Result<GaborDictionary> {
    GaborDictionary::new(probe.clone())
}

impl GaborDictionary {
    pub fn new(probe: ComplexVector) -> Result<Self> {
        let n = probe.len();
        if n == 0 {
            return Err(Error::EmptyVector);
        }
        let norm = probe.norm();
        if (norm - 1.0).abs() > PROBE_NORM_TOL {
            return Err(Error::NonUnitProbe(norm));
        }
        let mut planner = FftPlanner::new();
        let f = probe.as_slice();
        let shifted: Vec<Complex64> =
            (0..n).flat_map(|k| (0..n).map(move |m| f[(m + n - k) % n])).collect();
        let shifted_conj = shifted.iter().map(|z| z.conj()).collect();
        Ok(Self {
            shifted,
            shifted_conj,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            frame_bound: n as f64 * probe.norm_sqr(),
            probe,
            n,
            dense_limit: DEFAULT_DENSE_LIMIT,
        })
    }

    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.dense_limit = limit;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atom_count(&self) -> usize {
        self.n * self.n
    }

    pub fn probe(&self) -> &ComplexVector {
        &self.probe
    }

    pub fn dense_limit(&self) -> usize {
        self.dense_limit
    }

    /// `Phi Phi^* = frame_bound * I`. A full Gabor system of a probe is always a tight
    /// frame with bound `N |f|^2`, so this scalar is the whole Gram factorization.
    pub fn frame_bound(&self) -> f64 {
        self.frame_bound
    }

    pub fn atom(&self, idx: ShiftIndex) -> Result<ComplexVector> {
        let idx = ShiftIndex::new(idx.delay, idx.doppler, self.n)?;
        Ok(tf_shift(&self.probe, idx))
    }

    pub fn atom_flat(&self, flat: usize) -> Result<ComplexVector> {
        self.atom(ShiftIndex::from_flat(flat, self.n)?)
    }

    /// `Phi s = sum_i s_i phi_i`.
    pub fn apply(&self, s: &CoefficientVector) -> Result<ComplexVector> {
        if s.len() != self.atom_count() {
            return Err(Error::LengthMismatch { expected: self.atom_count(), actual: s.len() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.apply_into(s.as_slice(), &mut out, &mut self.scratch());
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// `(Phi^* y)_i = <phi_i, y>`.
    pub fn adjoint(&self, y: &ComplexVector) -> Result<CoefficientVector> {
        if y.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: y.len() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.atom_count()];
        self.adjoint_into(y.as_slice(), &mut out, &mut self.scratch());
        Ok(CoefficientVector { n: self.n, entries: out })
    }

    pub(crate) fn scratch(&self) -> TransformScratch {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        TransformScratch {
            blocks: vec![Complex64::new(0.0, 0.0); self.atom_count()],
            fft: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub(crate) fn apply_into(&self, s: &[Complex64], out: &mut [Complex64], scratch: &mut TransformScratch) {
        let n = self.n;
        debug_assert_eq!(s.len(), n * n);
        debug_assert_eq!(out.len(), n);
        let blocks = &mut scratch.blocks;
        blocks.copy_from_slice(s);
        self.inverse.process_with_scratch(blocks, &mut scratch.fft);
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (block, row) in blocks.chunks_exact(n).zip(self.shifted.chunks_exact(n)) {
            for ((o, b), f) in out.iter_mut().zip(block).zip(row) {
                *o += f * b;
            }
        }
    }

    pub(crate) fn adjoint_into(&self, y: &[Complex64], out: &mut [Complex64], scratch: &mut TransformScratch) {
        let n = self.n;
        debug_assert_eq!(y.len(), n);
        debug_assert_eq!(out.len(), n * n);
        for (block, row) in out.chunks_exact_mut(n).zip(self.shifted_conj.chunks_exact(n)) {
            for ((b, yv), f) in block.iter_mut().zip(y).zip(row) {
                *b = f * yv;
            }
        }
        self.forward.process_with_scratch(out, &mut scratch.fft);
    }

    fn require_dense(&self, allow_large: bool) -> Result<()> {
        if self.n > self.dense_limit && !allow_large {
            Err(Error::TooLargeForDense { n: self.n, limit: self.dense_limit })
        } else {
            Ok(())
        }
    }

    /// Visit every Gram column `Phi^* phi_j` in order of `j`.
    fn for_each_gram_column(&self, mut visit: impl FnMut(usize, &[Complex64])) {
        let mut column = vec![Complex64::new(0.0, 0.0); self.atom_count()];
        let mut scratch = self.scratch();
        for j in 0..self.atom_count() {
            let atom = tf_shift(&self.probe, ShiftIndex { delay: j / self.n, doppler: j % self.n });
            self.adjoint_into(atom.as_slice(), &mut column, &mut scratch);
            visit(j, &column);
        }
    }
}

/// Mutual coherence `max_{i != j} |<phi_i, phi_j>|` from the explicit Gram matrix.
pub fn coherence(dict: &GaborDictionary) -> Result<f64> {
    coherence_with(dict, false)
}

/// As [`coherence`]; `allow_large` lifts the dense-size guard.
pub fn coherence_with(dict: &GaborDictionary, allow_large: bool) -> Result<f64> {
    dict.require_dense(allow_large)?;
    let mut mu = 0.0f64;
    dict.for_each_gram_column(|j, column| {
        for (i, g) in column.iter().enumerate() {
            if i != j {
                mu = mu.max(g.norm());
            }
        }
    });
    Ok(mu)
}

/// Coherence of an explicit list of unit vectors, by direct pairwise inner products.
pub fn coherence_of(atoms: &[ComplexVector]) -> Result<f64> {
    let mut mu = 0.0f64;
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            mu = mu.max(a.inner(b)?.norm());
        }
    }
    Ok(mu)
}

/// Welch lower bound on the coherence of M unit vectors in C^N.
pub fn welch_bound(n: usize, m: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    if m < n {
        return Err(Error::InvalidParameter(format!("need M >= N, got M = {m}, N = {n}")));
    }
    if m == 1 {
        return Ok(0.0);
    }
    let (n, m) = (n as f64, m as f64);
    Ok(((m - n) / (n * (m - 1.0))).sqrt())
}

/// Outcome of checking the orthonormal-block / mutually-unbiased structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub n: usize,
    pub tolerance: f64,
    /// Each delay block is an orthonormal basis.
    pub blocks_orthonormal: bool,
    pub within_block_max_deviation: f64,
    /// Every cross-block inner product has modulus 1/sqrt(N).
    pub blocks_mutually_unbiased: bool,
    pub cross_block_max_deviation: f64,
    pub coherence: f64,
    pub inverse_sqrt_n: f64,
    pub welch_bound: f64,
    pub coherence_above_welch: bool,
}

impl PropertyReport {
    pub fn pass(&self) -> bool {
        self.blocks_orthonormal && self.blocks_mutually_unbiased && self.coherence_above_welch
    }
}

/// Check block orthonormality and cross-block unbiasedness; failures are reported, not raised.
pub fn verify_mub_properties(dict: &GaborDictionary, tol: f64) -> Result<PropertyReport> {
    dict.require_dense(false)?;
    let n = dict.n();
    let target = 1.0 / (n as f64).sqrt();
    let mut within = 0.0f64;
    let mut cross = 0.0f64;
    let mut mu = 0.0f64;
    dict.for_each_gram_column(|j, column| {
        let block_j = j / n;
        for (i, g) in column.iter().enumerate() {
            if i / n == block_j {
                let expected = if i == j { 1.0 } else { 0.0 };
                within = within.max((g - Complex64::new(expected, 0.0)).norm());
            } else {
                cross = cross.max((g.norm() - target).abs());
            }
            if i != j {
                mu = mu.max(g.norm());
            }
        }
    });
    let welch = welch_bound(n, n * n)?;
    Ok(PropertyReport {
        n,
        tolerance: tol,
        blocks_orthonormal: within <= tol,
        within_block_max_deviation: within,
        blocks_mutually_unbiased: cross <= tol,
        cross_block_max_deviation: cross,
        coherence: mu,
        inverse_sqrt_n: target,
        welch_bound: welch,
        coherence_above_welch: mu >= welch - tol,
    })
}
