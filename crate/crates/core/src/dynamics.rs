//! Split-step Floquet propagation of two kicked rotors coupled through their
//! momenta, on a doubly periodic `N × N` lattice.
//!
//! One period is
//!
//! ```text
//! U = exp(-i T(p₁, p₂)/ħ) · exp(-i [k₁ sin x₁ + k₂ sin x₂]/ħ)
//! T = 2 sin²(p₁/2) + 2 sin²(p₂/2) + 4 c_pp sin(p₁/2) sin(p₂/2)
//! ```
//!
//! with `ħ = 2π/N`, so positions `x = 2πj/N` and momenta `p = ħ m`,
//! `m ∈ [-N/2, N/2)`, are both exactly representable.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Grid size and effective Planck constant of the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    n: usize,
    hbar: f64,
}

impl LatticeConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("lattice size must be at least 2, got {n}")));
        }
        if n % 2 != 0 {
            return Err(Error::invalid(format!("lattice size must be even, got {n}")));
        }
        Ok(Self {
            n,
            hbar: 2.0 * PI / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn position(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    /// Momentum carried by FFT index `m`, wrapped into `[-π, π)`.
    pub fn momentum(&self, m: usize) -> f64 {
        let n = self.n as i64;
        let wrapped = ((m as i64 + n / 2).rem_euclid(n)) - n / 2;
        self.hbar * wrapped as f64
    }
}

/// Kick strengths and momentum–momentum coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub k1: f64,
    pub k2: f64,
    pub cpp: f64,
}

impl SystemParams {
    pub const STRONG_CHAOS: SystemParams = SystemParams {
        k1: 3.0,
        k2: 2.5,
        cpp: 0.05,
    };

    pub const WEAK_CHAOS: SystemParams = SystemParams {
        k1: 0.7,
        k2: 0.2,
        cpp: 0.05,
    };

    pub fn new(k1: f64, k2: f64, cpp: f64) -> Result<Self> {
        let p = Self { k1, k2, cpp };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k2.is_finite() && self.cpp.is_finite()) {
            return Err(Error::invalid(format!("non-finite system parameters {self:?}")));
        }
        Ok(())
    }
}

/// Centre and width of a Gaussian wave packet on one circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentStateSpec {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl CoherentStateSpec {
    /// Minimal-uncertainty packet, `σ = sqrt(ħ/2)`.
    pub fn minimal(x0: f64, p0: f64, lattice: &LatticeConfig) -> Self {
        Self {
            x0,
            p0,
            sigma: (0.5 * lattice.hbar()).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid(format!("coherent-state width must be positive, got {}", self.sigma)));
        }
        if !(0.0..2.0 * PI).contains(&self.x0) {
            return Err(Error::invalid(format!("position centre {} outside [0, 2π)", self.x0)));
        }
        if !(-PI..PI).contains(&self.p0) {
            return Err(Error::invalid(format!("momentum centre {} outside [-π, π)", self.p0)));
        }
        Ok(())
    }

    /// Number of periodic images summed on each side.
    fn windings(&self) -> i64 {
        // Images beyond (2πW - π) from the centre are below e^{-32}.
        let needed = ((PI + 8.0 * self.sigma) / (2.0 * PI)).ceil() as i64 + 1;
        needed.max(5)
    }

    fn amplitudes(&self, lattice: &LatticeConfig) -> Vec<Complex64> {
        let w = self.windings();
        let two_sigma_sq = 2.0 * self.sigma * self.sigma;
        (0..lattice.n())
            .map(|j| {
                let x = lattice.position(j);
                (-w..=w)
                    .map(|wind| {
                        let d = x - self.x0 - 2.0 * PI * wind as f64;
                        Complex64::from_polar((-d * d / two_sigma_sq).exp(), self.p0 * d / lattice.hbar())
                    })
                    .sum()
            })
            .collect()
    }
}

/// Amplitudes `ψ(x₁, x₂)` on the position lattice, row-major in `(j₁, j₂)`.
///
/// The amplitude matrix is the coefficient matrix of the state in the
/// product position basis.
#[derive(Clone, PartialEq)]
pub struct WaveFunction2D {
    lattice: LatticeConfig,
    amps: Vec<Complex64>,
}

impl fmt::Debug for WaveFunction2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveFunction2D")
            .field("n", &self.lattice.n())
            .field("norm", &self.norm())
            .finish()
    }
}

impl WaveFunction2D {
    /// Wraps raw amplitudes, renormalizing them to unit norm.
    pub fn from_amplitudes(lattice: LatticeConfig, mut amps: Vec<Complex64>) -> Result<Self> {
        let n = lattice.n();
        if amps.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for an {n}×{n} lattice, got {}",
                n * n,
                amps.len()
            )));
        }
        check_finite(&amps)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::invalid("wavefunction has zero norm"));
        }
        let inv = 1.0 / norm;
        amps.iter_mut().for_each(|a| *a *= inv);
        Ok(Self { lattice, amps })
    }

    pub fn lattice(&self) -> &LatticeConfig {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, j1: usize, j2: usize) -> Complex64 {
        self.amps[j1 * self.n() + j2]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unitary 2D discrete Fourier transform; entry `(m₁, m₂)` is the
    /// amplitude at momenta `(lattice.momentum(m₁), lattice.momentum(m₂))`.
    pub fn to_momentum(&self) -> Vec<Complex64> {
        let mut fft = Fft2d::new(self.n());
        let mut buf = self.amps.clone();
        fft.forward(&mut buf);
        let scale = 1.0 / self.n() as f64;
        buf.iter_mut().for_each(|a| *a *= scale);
        buf
    }

    /// Inverse of [`to_momentum`](Self::to_momentum).
    pub fn from_momentum(lattice: LatticeConfig, momentum: &[Complex64]) -> Result<Self> {
        let n = lattice.n();
        if momentum.len() != n * n {
            return Err(Error::invalid("momentum array has the wrong length"));
        }
        let mut fft = Fft2d::new(n);
        let mut buf = momentum.to_vec();
        fft.inverse(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|a| *a *= scale);
        check_finite(&buf)?;
        Ok(Self { lattice, amps: buf })
    }
}

fn check_finite(amps: &[Complex64]) -> Result<()> {
    match amps.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Product of two periodized coherent states, normalized on the lattice.
pub fn build_coherent_product(
    spec1: &CoherentStateSpec,
    spec2: &CoherentStateSpec,
    lattice: &LatticeConfig,
) -> Result<WaveFunction2D> {
    spec1.validate()?;
    spec2.validate()?;
    let n = lattice.n();
    let phi1 = spec1.amplitudes(lattice);
    let phi2 = spec2.amplitudes(lattice);
    let mut amps = Vec::with_capacity(n * n);
    for a in &phi1 {
        amps.extend(phi2.iter().map(|b| a * b));
    }
    WaveFunction2D::from_amplitudes(*lattice, amps)
}

/// Row FFTs plus a transpose, so both axes are transformed with contiguous
/// passes.
struct Fft2d {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Fft2d {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            tmp: vec![Complex64::default(); n * n],
        }
    }

    fn transpose(&mut self, buf: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                self.tmp[j * n + i] = buf[i * n + j];
            }
        }
        buf.copy_from_slice(&self.tmp);
    }

    /// Forward transform along both axes, layout preserved. Unnormalized.
    fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward_transposed(buf);
        self.transpose(buf);
    }

    fn inverse(&mut self, buf: &mut [Complex64]) {
        self.transpose(buf);
        self.inverse_from_transposed(buf);
    }

    /// Forward transform leaving the result transposed: entry `(m₂, m₁)`.
    fn forward_transposed(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
        self.transpose(buf);
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Inverse of [`forward_transposed`](Self::forward_transposed), unnormalized.
    fn inverse_from_transposed(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        self.transpose(buf);
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }
}

/// Order of the two factors within one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitOrder {
    /// Position kick, then free flight.
    #[default]
    KickFirst,
    KineticFirst,
}

/// One-period propagator with its phase tables precomputed for a fixed
/// lattice and parameter set.
pub struct FloquetPropagator {
    lattice: LatticeConfig,
    params: SystemParams,
    order: SplitOrder,
    /// `exp(-i k sin x / ħ)` per axis.
    kick1: Vec<Complex64>,
    kick2: Vec<Complex64>,
    /// Kinetic phase in the transposed momentum layout `(m₂, m₁)`, with the
    /// `1/N²` FFT normalization folded in.
    kinetic: Vec<Complex64>,
    fft: Fft2d,
}

impl FloquetPropagator {
    pub fn new(lattice: LatticeConfig, params: SystemParams) -> Result<Self> {
        Self::with_order(lattice, params, SplitOrder::KickFirst)
    }

    pub fn with_order(lattice: LatticeConfig, params: SystemParams, order: SplitOrder) -> Result<Self> {
        params.validate()?;
        let n = lattice.n();
        let hbar = lattice.hbar();
        let kick = |k: f64| -> Vec<Complex64> {
            (0..n)
                .map(|j| Complex64::from_polar(1.0, -k * lattice.position(j).sin() / hbar))
                .collect()
        };
        let half_sin: Vec<f64> = (0..n).map(|m| (0.5 * lattice.momentum(m)).sin()).collect();
        let norm = 1.0 / (n * n) as f64;
        let mut kinetic = Vec::with_capacity(n * n);
        for m2 in 0..n {
            for m1 in 0..n {
                let (s1, s2) = (half_sin[m1], half_sin[m2]);
                let t = 2.0 * s1 * s1 + 2.0 * s2 * s2 + 4.0 * params.cpp * s1 * s2;
                kinetic.push(Complex64::from_polar(norm, -t / hbar));
            }
        }
        Ok(Self {
            lattice,
            params,
            order,
            kick1: kick(params.k1),
            kick2: kick(params.k2),
            kinetic,
            fft: Fft2d::new(n),
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn lattice(&self) -> &LatticeConfig {
        &self.lattice
    }

    fn apply_kick(&self, amps: &mut [Complex64]) {
        let n = self.lattice.n();
        for (row, k1) in amps.chunks_exact_mut(n).zip(&self.kick1) {
            for (a, k2) in row.iter_mut().zip(&self.kick2) {
                *a *= k1 * k2;
            }
        }
    }

    fn apply_kinetic(&mut self, amps: &mut [Complex64]) {
        self.fft.forward_transposed(amps);
        for (a, ph) in amps.iter_mut().zip(&self.kinetic) {
            *a *= ph;
        }
        self.fft.inverse_from_transposed(amps);
    }

    /// Advances `psi` by one period in place.
    pub fn step(&mut self, psi: &mut WaveFunction2D) -> Result<()> {
        if psi.lattice != self.lattice {
            return Err(Error::invalid("wavefunction lattice does not match the propagator"));
        }
        check_finite(&psi.amps)?;
        match self.order {
            SplitOrder::KickFirst => {
                self.apply_kick(&mut psi.amps);
                self.apply_kinetic(&mut psi.amps);
            }
            SplitOrder::KineticFirst => {
                self.apply_kinetic(&mut psi.amps);
                self.apply_kick(&mut psi.amps);
            }
        }
        check_finite(&psi.amps)
    }

    /// Applies `steps` periods, calling `observer(step, state)` after each
    /// (steps are numbered from 1).
    pub fn evolve<F>(&mut self, psi: &mut WaveFunction2D, steps: usize, mut observer: F) -> Result<()>
    where
        F: FnMut(usize, &WaveFunction2D) -> Result<()>,
    {
        for t in 1..=steps {
            self.step(psi)?;
            observer(t, psi)?;
        }
        Ok(())
    }
}

/// One Floquet period applied to a copy of `psi`.
pub fn floquet_step(psi: &WaveFunction2D, params: &SystemParams) -> Result<WaveFunction2D> {
    let mut prop = FloquetPropagator::new(*psi.lattice(), *params)?;
    let mut out = psi.clone();
    prop.step(&mut out)?;
    Ok(out)
}

/// `steps` Floquet periods; `observer` sees every intermediate state.
pub fn evolve(
    psi: &WaveFunction2D,
    params: &SystemParams,
    steps: usize,
    observer: Option<&mut dyn FnMut(usize, &WaveFunction2D)>,
) -> Result<WaveFunction2D> {
    if steps == 0 {
        return Err(Error::invalid("evolve needs at least one step"));
    }
    let mut prop = FloquetPropagator::new(*psi.lattice(), *params)?;
    let mut out = psi.clone();
    match observer {
        Some(obs) => prop.evolve(&mut out, steps, |t, s| {
            obs(t, s);
            Ok(())
        })?,
        None => prop.evolve(&mut out, steps, |_, _| Ok(()))?,
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn naive_dft_1d(v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|m| {
                v.iter()
                    .enumerate()
                    .map(|(j, a)| a * Complex64::from_polar(1.0, -2.0 * PI * (j * m) as f64 / n as f64))
                    .sum::<Complex64>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    fn coherent(n: usize) -> WaveFunction2D {
        let lat = LatticeConfig::new(n).unwrap();
        let s = CoherentStateSpec::minimal(PI / 2.0, PI / 4.0, &lat);
        build_coherent_product(&s, &s, &lat).unwrap()
    }

    #[test]
    fn lattice_validation() {
        assert!(LatticeConfig::new(1).is_err());
        assert!(LatticeConfig::new(7).is_err());
        let lat = LatticeConfig::new(128).unwrap();
        assert_abs_diff_eq!(lat.hbar() * 128.0, 2.0 * PI, epsilon = 1e-14);
    }

    #[test]
    fn momentum_window_is_centred() {
        let lat = LatticeConfig::new(8).unwrap();
        let ps: Vec<f64> = (0..8).map(|m| lat.momentum(m) / lat.hbar()).collect();
        assert_eq!(ps, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn coherent_rejects_bad_width() {
        let lat = LatticeConfig::new(16).unwrap();
        let bad = CoherentStateSpec { x0: 1.0, p0: 0.0, sigma: 0.0 };
        let good = CoherentStateSpec::minimal(1.0, 0.0, &lat);
        assert!(build_coherent_product(&bad, &good, &lat).is_err());
        let outside = CoherentStateSpec { x0: 7.0, ..good };
        assert!(build_coherent_product(&outside, &good, &lat).is_err());
    }

    #[test]
    fn coherent_peak_in_position_and_momentum() {
        let n = 128;
        let psi = coherent(n);
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        let (imax, _) = psi
            .amplitudes()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        assert_eq!((imax / n, imax % n), (n / 4, n / 4));

        // momentum profile of one factor via an independent naive DFT
        let lat = *psi.lattice();
        let s = CoherentStateSpec::minimal(PI / 2.0, PI / 4.0, &lat);
        let row = s.amplitudes(&lat);
        let mom = naive_dft_1d(&row);
        let (mmax, _) = mom
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        let nearest = (0..n)
            .min_by(|&a, &b| (lat.momentum(a) - PI / 4.0).abs().total_cmp(&(lat.momentum(b) - PI / 4.0).abs()))
            .unwrap();
        assert_eq!(mmax, nearest);
    }

    #[test]
    fn fft_matches_naive_dft() {
        let n = 8;
        let lat = LatticeConfig::new(n).unwrap();
        let amps: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let psi = WaveFunction2D::from_amplitudes(lat, amps).unwrap();
        let fast = psi.to_momentum();
        // rows then columns with the naive transform
        let mut rows: Vec<Complex64> = Vec::new();
        for r in psi.amplitudes().chunks(n) {
            rows.extend(naive_dft_1d(r));
        }
        for m2 in 0..n {
            let col: Vec<Complex64> = (0..n).map(|j1| rows[j1 * n + m2]).collect();
            let t = naive_dft_1d(&col);
            for m1 in 0..n {
                assert!((t[m1] - fast[m1 * n + m2]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn representation_round_trip() {
        let psi = coherent(32);
        let back = WaveFunction2D::from_momentum(*psi.lattice(), &psi.to_momentum()).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_momentum_eigenstate_is_stationary_without_kicks() {
        let n = 16;
        let lat = LatticeConfig::new(n).unwrap();
        let flat = vec![Complex64::new(1.0, 0.0); n * n];
        let psi = WaveFunction2D::from_amplitudes(lat, flat).unwrap();
        let params = SystemParams::new(0.0, 0.0, 0.37).unwrap();
        let out = floquet_step(&psi, &params).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn kinetic_only_preserves_momentum_profile() {
        let psi = coherent(32);
        let params = SystemParams::new(0.0, 0.0, 0.2).unwrap();
        let out = floquet_step(&psi, &params).unwrap();
        let before = psi.to_momentum();
        let after = out.to_momentum();
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a.norm_sqr(), b.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn step_is_unitary_and_evolve_matches_steps() {
        let psi = coherent(32);
        let p = SystemParams::STRONG_CHAOS;
        let one = floquet_step(&psi, &p).unwrap();
        assert_abs_diff_eq!(one.norm(), 1.0, epsilon = 1e-12);
        let via_evolve = evolve(&psi, &p, 1, None).unwrap();
        assert_eq!(one, via_evolve);

        let mut seen = Vec::new();
        let mut obs = |t: usize, s: &WaveFunction2D| seen.push((t, s.norm()));
        evolve(&psi, &p, 5, Some(&mut obs)).unwrap();
        assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        assert!(evolve(&psi, &p, 0, None).is_err());
    }

    #[test]
    fn non_finite_parameters_rejected() {
        assert!(SystemParams::new(f64::NAN, 0.0, 0.0).is_err());
        let psi = coherent(8);
        let p = SystemParams { k1: f64::INFINITY, k2: 0.0, cpp: 0.0 };
        assert!(floquet_step(&psi, &p).is_err());
    }

    #[test]
    fn non_finite_amplitudes_rejected() {
        let lat = LatticeConfig::new(4).unwrap();
        let mut amps = vec![Complex64::new(1.0, 0.0); 16];
        amps[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            WaveFunction2D::from_amplitudes(lat, amps),
            Err(Error::NonFinite(3))
        ));
    }
}
