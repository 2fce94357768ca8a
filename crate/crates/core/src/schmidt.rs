//! Schmidt spectra, entanglement entropy and scaled eigenvalues.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::dynamics::WaveFunction2D;
use crate::error::{Error, Result};

/// Weights below this contribute nothing to the entropy.
const ENTROPY_FLOOR: f64 = 1e-300;

/// Squared Schmidt coefficients `λ_i²`, non-increasing, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    weights: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Validates externally supplied weights (sorted, non-negative, unit sum).
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("empty Schmidt spectrum"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("Schmidt weights must be finite and non-negative"));
        }
        if weights.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("Schmidt weights must be non-increasing"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("Schmidt weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }
}

/// Scaled eigenvalues `ε_i = N² λ_i²`, summing to `N²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSpectrum {
    n: usize,
    epsilons: Vec<f64>,
}

impl ScaledSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.epsilons
    }
}

/// Squared singular values of a row-major `n × n` coefficient matrix,
/// sorted non-increasing and renormalized to sum to one.
pub fn schmidt_weights_of_matrix(n: usize, amps: &[Complex64]) -> Result<SchmidtSpectrum> {
    if amps.len() != n * n || n == 0 {
        return Err(Error::invalid("coefficient matrix must be square and non-empty"));
    }
    if let Some(i) = amps.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
        return Err(Error::NonFinite(i));
    }
    let m = DMatrix::from_row_slice(n, n, amps);
    let svd = SVD::try_new(m, false, false, f64::EPSILON, 10_000).ok_or(Error::SvdNotConverged)?;
    let mut w: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("coefficient matrix is zero"));
    }
    w.iter_mut().for_each(|x| *x /= total);
    Ok(SchmidtSpectrum { weights: w })
}

/// Schmidt spectrum of a wavefunction's position-basis coefficient matrix.
pub fn schmidt_decompose(psi: &WaveFunction2D) -> Result<SchmidtSpectrum> {
    schmidt_weights_of_matrix(psi.n(), psi.amplitudes())
}

/// `S = -Σ λ² ln λ²`, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(s: &SchmidtSpectrum) -> f64 {
    let h: f64 = s
        .weights
        .iter()
        .filter(|&&w| w > ENTROPY_FLOOR)
        .map(|&w| -w * w.ln())
        .sum();
    h.max(0.0)
}

pub fn scale_spectrum(s: &SchmidtSpectrum, n: usize) -> Result<ScaledSpectrum> {
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.len(),
        });
    }
    let n2 = (n * n) as f64;
    Ok(ScaledSpectrum {
        n,
        epsilons: s.weights.iter().map(|w| w * n2).collect(),
    })
}

/// First index `i` at which the least-squares slope of
/// `series[i + 1 - window ..= i]` is below `slope_tol` in magnitude.
pub fn detect_saturation(series: &[f64], window: usize, slope_tol: f64) -> Result<Option<usize>> {
    if window < 2 {
        return Err(Error::invalid(format!("saturation window must be at least 2, got {window}")));
    }
    if series.len() < window {
        return Err(Error::invalid(format!(
            "series of length {} is shorter than the window {window}",
            series.len()
        )));
    }
    let w = window as f64;
    let t_mean = (w - 1.0) / 2.0;
    let t_var: f64 = (0..window).map(|t| (t as f64 - t_mean).powi(2)).sum();
    for end in window - 1..series.len() {
        let seg = &series[end + 1 - window..=end];
        let y_mean = seg.iter().sum::<f64>() / w;
        let cov: f64 = seg
            .iter()
            .enumerate()
            .map(|(t, y)| (t as f64 - t_mean) * (y - y_mean))
            .sum();
        if (cov / t_var).abs() < slope_tol {
            return Ok(Some(end));
        }
    }
    Ok(None)
}
