//! Monte Carlo reference ensembles: Laguerre unitary spectra from complex
//! Gaussian matrices, and unfolded GUE nearest-neighbour spacings.
//!
//! Every draw takes its own ChaCha stream (`seed`, `index`), so ensembles
//! are reproducible and independent of how indices are scheduled.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schmidt::schmidt_weights_of_matrix;

/// Independent random stream for sample `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
    /// Rescale each spectrum so that `Σ ε = N²`.
    pub fixed_trace: bool,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64, fixed_trace: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("sampler dimension must be at least 1"));
        }
        Ok(Self { n, seed, fixed_trace })
    }
}

/// Complex normal deviate with `E|z|² = variance`.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `N × N` matrix of i.i.d. unit-variance complex Gaussians, row-major.
pub fn ginibre_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n * n).map(|_| complex_normal(rng, 1.0)).collect()
}

/// Squared singular values of a complex Ginibre matrix, descending.
///
/// Without `fixed_trace` the values follow the Laguerre unitary joint
/// density `Π|ε_i - ε_j|² e^{-Σε}`; with it they are rescaled to `Σε = N²`.
pub fn sample_lue_spectrum<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<Vec<f64>> {
    let n = cfg.n;
    let a = ginibre_matrix(n, rng);
    let trace: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let weights = schmidt_weights_of_matrix(n, &a)?;
    let scale = if cfg.fixed_trace { (n * n) as f64 } else { trace };
    Ok(weights.weights().iter().map(|w| w * scale).collect())
}

/// `count` spectra, spectrum `i` drawn from `stream_rng(cfg.seed, i)`.
pub fn sample_lue_ensemble(cfg: &SamplerConfig, count: usize) -> Result<Vec<Vec<f64>>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_lue_spectrum(cfg, &mut stream_rng(cfg.seed, i)))
        .collect()
}

/// Eigenvalues of a GUE matrix (off-diagonal `E|H_ij|² = 1`, diagonal
/// variance 1), ascending.
pub fn sample_gue_eigenvalues<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        h[(i, i)] = Complex64::new(d, 0.0);
        for j in i + 1..n {
            let z = complex_normal(rng, 1.0);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigenNotConverged)?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Integrated semicircle density for radius `2 sqrt(N)`, mapping the GUE
/// spectrum onto `[0, N]` with unit mean spacing.
pub fn semicircle_unfold(x: f64, n: usize) -> f64 {
    let t = (x / (2.0 * (n as f64).sqrt())).clamp(-1.0, 1.0);
    n as f64 * (0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) / PI)
}

/// Unfolded nearest-neighbour spacings from the central half of GUE spectra,
/// drawing matrices until `count` spacings are collected.
pub fn sample_gue_unfolded_spacings<R: Rng + ?Sized>(
    n: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(Error::invalid(format!("GUE spacing sampler needs N ≥ 8, got {n}")));
    }
    let lo = n / 4;
    let hi = 3 * n / 4;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let ev = sample_gue_eigenvalues(n, rng)?;
        let unfolded: Vec<f64> = ev[lo..hi].iter().map(|&x| semicircle_unfold(x, n)).collect();
        for w in unfolded.windows(2) {
            if out.len() == count {
                break;
            }
            out.push(w[1] - w[0]);
        }
    }
    Ok(out)
}
