//! Matched-filter baseline: the received signal is correlated against every
//! time-frequency shift of the transmitted pulse, giving a discrete ambiguity
//! surface on the N x N grid.

use crate::error::{Error, Result};
use crate::gabor::GaborDictionary;
use crate::scenes::{add_awgn, vectorize, NoiseSpec, SparseScene};
use crate::tfcore::{ComplexVector, ShiftIndex};
use std::fmt::Write as _;

/// Nonnegative matched-filter magnitudes, row = delay, column = doppler.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityMap {
    n: usize,
    values: Vec<f64>,
}

impl AmbiguityMap {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, actual: values.len() });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter("ambiguity values must be finite and nonnegative".into()));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, delay: usize, doppler: usize) -> f64 {
        self.values[delay * self.n + doppler]
    }

    pub fn at(&self, cell: ShiftIndex) -> f64 {
        self.get(cell.delay, cell.doppler)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Cell of the largest value; the lowest flat index wins ties.
    pub fn argmax(&self) -> ShiftIndex {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        ShiftIndex { delay: best / self.n, doppler: best % self.n }
    }

    /// Circular translation: output(k + a, q + b) = self(k, q).
    pub fn translated(&self, delay: usize, doppler: usize) -> Self {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for k in 0..n {
            for q in 0..n {
                values[((k + delay) % n) * n + (q + doppler) % n] = self.values[k * n + q];
            }
        }
        Self { n, values }
    }

    /// CSV: header `# n=<N> probe=<name>`, then N rows (delay) of N values (doppler)
    /// with 17 significant digits.
    pub fn to_csv(&self, probe_name: &str) -> String {
        let mut out = String::with_capacity(self.n * self.n * 24 + 32);
        writeln!(out, "# n={} probe={}", self.n, probe_name).unwrap();
        for row in self.values.chunks_exact(self.n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(",")).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<(Self, String)> {
        let bad = |m: &str| Error::InvalidParameter(format!("ambiguity CSV: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let rest = header.strip_prefix("# n=").ok_or_else(|| bad("missing header"))?;
        let (n_text, probe) = rest.split_once(" probe=").ok_or_else(|| bad("missing probe name"))?;
        let n: usize = n_text.parse().map_err(|_| bad("bad n"))?;
        let mut values = Vec::with_capacity(n * n);
        for line in lines {
            for field in line.split(',') {
                values.push(field.trim().parse::<f64>().map_err(|_| bad("bad value"))?);
            }
        }
        Ok((Self::new(n, values)?, probe.to_string()))
    }
}

/// `value(k, q) = |<M^q T^k probe, y>|`.
pub fn ambiguity_map(probe: &ComplexVector, y: &ComplexVector) -> Result<AmbiguityMap> {
    if probe.len() != y.len() {
        return Err(Error::LengthMismatch { expected: probe.len(), actual: y.len() });
    }
    let norm = probe.norm();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("probe must be nonzero".into()));
    }
    // unit-norm probes use their own dictionary so the map is exactly |Phi^* y|
    let (dict, scale) = match GaborDictionary::new(probe.clone()) {
        Ok(d) => (d, 1.0),
        Err(_) => (GaborDictionary::new(probe.scaled(1.0 / norm))?, norm),
    };
    let correlations = dict.adjoint(y)?;
    let values = correlations.as_slice().iter().map(|c| c.norm() * scale).collect();
    Ok(AmbiguityMap { n: probe.len(), values })
}

/// Ambiguity surface of a unit-norm probe against itself; peak 1 at (0, 0).
pub fn self_ambiguity(probe: &ComplexVector) -> Result<AmbiguityMap> {
    let norm = probe.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitProbe(norm));
    }
    ambiguity_map(probe, probe)
}

/// Matched-filter image of a scene: `ambiguity_map(probe, Phi s + e)`.
pub fn classical_scene_map(
    probe: &ComplexVector,
    scene: &SparseScene,
    noise: NoiseSpec,
) -> Result<AmbiguityMap> {
    if scene.n() != probe.len() {
        return Err(Error::LengthMismatch { expected: probe.len(), actual: scene.n() });
    }
    let dict = GaborDictionary::new(probe.clone())?;
    let clean = dict.apply(&vectorize(scene))?;
    let y = add_awgn(&clean, noise)?;
    ambiguity_map(probe, &y)
}

/// Full width at half maximum along the delay axis through `center`, in cells.
///
/// Scans circularly outward in both directions up to half the circle and
/// interpolates linearly between the last cell at or above half maximum and the
/// first below. If either side never drops below half maximum the surface has no
/// resolvable footprint and N is returned.
pub fn footprint_width(map: &AmbiguityMap, center: ShiftIndex) -> Result<f64> {
    let n = map.n;
    ShiftIndex::new(center.delay, center.doppler, n)?;
    let peak = map.at(center);
    if peak <= 0.0 {
        return Err(Error::ZeroCenter);
    }
    let half = peak / 2.0;
    let value = |offset: isize| {
        let k = (center.delay as isize + offset).rem_euclid(n as isize) as usize;
        map.get(k, center.doppler)
    };
    let crossing = |dir: isize| -> Option<f64> {
        let mut prev = peak;
        for d in 1..=(n / 2) as isize {
            let v = value(dir * d);
            if v < half {
                return Some((d - 1) as f64 + (prev - half) / (prev - v));
            }
            prev = v;
        }
        None
    };
    match (crossing(1), crossing(-1)) {
        (Some(right), Some(left)) => Ok(right + left),
        _ => Ok(n as f64),
    }
}

/// Width in grid cells expressed in units of the 1/sqrt(N) grid spacing.
pub fn cells_to_normalized(width_cells: f64, n: usize) -> f64 {
    width_cells / (n as f64).sqrt()
}
