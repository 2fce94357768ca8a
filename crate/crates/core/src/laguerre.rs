//! Analytic one- and two-level functions of the Laguerre unitary ensemble.
//!
//! The ensemble has joint eigenvalue density proportional to
//! `Π_{i<j} |ε_i - ε_j|² exp(-Σ ε_i)` on `[0, ∞)^N`. Every correlation
//! function is a determinant of the kernel
//!
//! ```text
//! K_N(a, b) = Σ_{k<N} φ_k(a) φ_k(b),     φ_k(ε) = e^{-ε/2} L_k(ε)
//! ```
//!
//! where `L_k` are the Laguerre polynomials, orthonormal for the weight `e^{-ε}`.
//! The weighted functions `φ_k` are produced by a rescaled three-term recurrence
//! so that the soft edge (`ε ≈ 4N`) and beyond stays representable.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Magnitude at which the recurrence is rescaled.
const RESCALE_THRESHOLD: f64 = 1e100;
const RESCALE_LOG: f64 = 230.258_509_299_404_56; // ln(1e100)

/// Streams `φ_0(ε), φ_1(ε), …` through `visit`, stopping after `count` terms.
///
/// The exponential weight is carried as a separate log-scale and folded into
/// the running values whenever they are rescaled, so neither `L_k(ε)` nor
/// `e^{-ε/2}` is ever formed on its own.
fn for_each_phi<F: FnMut(usize, f64)>(count: usize, eps: f64, mut visit: F) {
    let mut log_scale = -0.5 * eps;
    let mut factor = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..count {
        visit(k, cur * factor);
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - eps) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_THRESHOLD {
            prev /= RESCALE_THRESHOLD;
            cur /= RESCALE_THRESHOLD;
            log_scale += RESCALE_LOG;
            factor = log_scale.exp();
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Domain(format!(
            "Laguerre argument must be finite and non-negative, got {eps}"
        )));
    }
    Ok(())
}

/// Weighted orthonormal Laguerre function `e^{-ε/2} L_k(ε)`.
pub fn phi(k: usize, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let mut out = 0.0;
    for_each_phi(k + 1, eps, |j, v| {
        if j == k {
            out = v;
        }
    });
    Ok(out)
}

/// Fills `out[k] = φ_k(ε)` for `k < out.len()`.
pub fn phi_table(eps: f64, out: &mut [f64]) -> Result<()> {
    check_eps(eps)?;
    for_each_phi(out.len(), eps, |k, v| out[k] = v);
    Ok(())
}

/// Kernel of the `N`-dimensional Laguerre unitary ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaguerreKernel {
    n: usize,
}

impl LaguerreKernel {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("kernel dimension must be at least 1"));
        }
        Ok(Self { n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `K_N(a, b)`, summed directly over the `N` weighted functions.
    pub fn kernel(&self, a: f64, b: f64) -> Result<f64> {
        check_eps(a)?;
        check_eps(b)?;
        Ok(self.kernel_unchecked(a, b))
    }

    pub(crate) fn kernel_unchecked(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return self.density_unchecked(a);
        }
        // Two recurrences in lockstep; no allocation on the hot path.
        let mut la = (0.0, 1.0, -0.5 * a, (-0.5 * a).exp());
        let mut lb = (0.0, 1.0, -0.5 * b, (-0.5 * b).exp());
        let mut sum = 0.0;
        for k in 0..self.n {
            sum += (la.1 * la.3) * (lb.1 * lb.3);
            advance(&mut la, k, a);
            advance(&mut lb, k, b);
        }
        sum
    }

    /// One-level density `σ_N(ε) = K_N(ε, ε)`.
    pub fn one_level_density(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.density_unchecked(eps))
    }

    pub(crate) fn density_unchecked(&self, eps: f64) -> f64 {
        let mut sum = 0.0;
        for_each_phi(self.n, eps, |_, v| sum += v * v);
        sum
    }

    /// Two-level cluster function `T_2(a, b) = K_N(a, b)²`.
    pub fn two_level_cluster(&self, a: f64, b: f64) -> Result<f64> {
        let k = self.kernel(a, b)?;
        Ok(k * k)
    }

    /// `T_2(a, b) / sqrt(σ_N(a) σ_N(b))`, the density-renormalized cluster
    /// function expressed in the original level variable.
    pub fn renormalized_cluster_eps(&self, a: f64, b: f64) -> Result<f64> {
        check_eps(a)?;
        check_eps(b)?;
        let da = self.density_unchecked(a);
        let db = self.density_unchecked(b);
        let denom = (da * db).sqrt();
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::Domain(format!(
                "one-level density vanishes at ε = {a} or ε = {b}"
            )));
        }
        let k = self.kernel_unchecked(a, b);
        Ok(k * k / denom)
    }
}

#[inline]
fn advance(state: &mut (f64, f64, f64, f64), k: usize, eps: f64) {
    let (prev, cur, log_scale, factor) = state;
    let kf = k as f64;
    let next = ((2.0 * kf + 1.0 - eps) * *cur - kf * *prev) / (kf + 1.0);
    *prev = *cur;
    *cur = next;
    if cur.abs() > RESCALE_THRESHOLD {
        *prev /= RESCALE_THRESHOLD;
        *cur /= RESCALE_THRESHOLD;
        *log_scale += RESCALE_LOG;
        *factor = log_scale.exp();
    }
}

/// Gauss–Legendre order used inside each unfolding panel.
const PANEL_ORDER: usize = 12;

/// Monotone map `ε ↦ ω(ε) = ∫_0^ε σ_N`, which gives the levels unit mean
/// spacing on `[0, N]`.
///
/// Panels are uniform in `u = sqrt(ε)`, which resolves the Bessel-like
/// oscillations at the hard edge with the same panel count as the bulk.
/// Values between panel boundaries are obtained by quadrature from the
/// nearest boundary, so evaluation error is set by the quadrature alone.
#[derive(Debug, Clone)]
pub struct UnfoldingMap {
    kernel: LaguerreKernel,
    eps_nodes: Vec<f64>,
    omega_nodes: Vec<f64>,
    rule: GaussLegendre,
}

impl UnfoldingMap {
    pub fn new(kernel: LaguerreKernel) -> Self {
        let n = kernel.dim() as f64;
        let eps_max = 4.0 * n + 30.0 * n.cbrt() + 30.0;
        let u_max = eps_max.sqrt();
        let du_target = 0.25 / n.sqrt();
        let panels = ((u_max / du_target).ceil() as usize).max(64);
        let du = u_max / panels as f64;
        let rule = GaussLegendre::new(PANEL_ORDER);

        let mut eps_nodes = Vec::with_capacity(panels + 1);
        let mut omega_nodes = Vec::with_capacity(panels + 1);
        eps_nodes.push(0.0);
        omega_nodes.push(0.0);
        let mut acc = 0.0;
        for i in 0..panels {
            let u0 = du * i as f64;
            let u1 = du * (i + 1) as f64;
            acc += rule.integrate(u0, u1, |u| 2.0 * u * kernel.density_unchecked(u * u));
            eps_nodes.push(u1 * u1);
            omega_nodes.push(acc);
        }
        Self {
            kernel,
            eps_nodes,
            omega_nodes,
            rule,
        }
    }

    pub fn kernel(&self) -> &LaguerreKernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Largest tabulated level; `ω` is constant beyond it to double precision.
    pub fn eps_max(&self) -> f64 {
        *self.eps_nodes.last().unwrap()
    }

    /// `(ε, ω)` pairs at the panel boundaries.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eps_nodes.iter().copied().zip(self.omega_nodes.iter().copied())
    }

    fn panel_integral(&self, u0: f64, u1: f64) -> f64 {
        let k = &self.kernel;
        self.rule
            .integrate(u0, u1, |u| 2.0 * u * k.density_unchecked(u * u))
    }

    pub fn unfold(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.unfold_unchecked(eps))
    }

    pub(crate) fn unfold_unchecked(&self, eps: f64) -> f64 {
        if eps >= self.eps_max() {
            return *self.omega_nodes.last().unwrap();
        }
        // index of the panel containing eps
        let i = self.eps_nodes.partition_point(|&e| e <= eps) - 1;
        let u0 = self.eps_nodes[i].sqrt();
        self.omega_nodes[i] + self.panel_integral(u0, eps.sqrt())
    }

    /// Inverse of [`unfold`](Self::unfold) on `[0, N]`.
    ///
    /// Values of `ω` above the last tabulated boundary (within rounding of
    /// `N`) map to [`eps_max`](Self::eps_max).
    pub fn invert_unfold(&self, omega: f64) -> Result<f64> {
        let n = self.dim() as f64;
        if !omega.is_finite() || omega < 0.0 || omega > n * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "unfolded level {omega} outside [0, {n}]"
            )));
        }
        let last = *self.omega_nodes.last().unwrap();
        if omega >= last || n - omega <= 1e-12 * n {
            return Ok(self.eps_max());
        }
        if omega == 0.0 {
            return Ok(0.0);
        }
        let i = self.omega_nodes.partition_point(|&w| w <= omega) - 1;
        let base = self.omega_nodes[i];
        let mut lo = self.eps_nodes[i].sqrt();
        let mut hi = self.eps_nodes[i + 1].sqrt();
        let mut u = 0.5 * (lo + hi);
        // Safeguarded Newton in u = sqrt(ε); the derivative is 2u σ_N(u²).
        for _ in 0..100 {
            let f = base + self.panel_integral(self.eps_nodes[i].sqrt(), u) - omega;
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let d = 2.0 * u * self.kernel.density_unchecked(u * u);
            let mut next = if d > 0.0 { u - f / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step_eps = (next * next - u * u).abs();
            u = next;
            if step_eps < 1e-13 * (1.0 + u * u) || (hi - lo) * (hi + lo) < 1e-13 {
                break;
            }
        }
        Ok(u * u)
    }

    /// `T̄_2(ω_1, ω_2)` evaluated through the inverse unfolding.
    pub fn renormalized_cluster(&self, omega1: f64, omega2: f64) -> Result<f64> {
        let a = self.invert_unfold(omega1)?;
        let b = self.invert_unfold(omega2)?;
        self.kernel.renormalized_cluster_eps(a, b)
    }
}

/// Builds the unfolding map for `kernel`.
pub fn build_unfolding(kernel: LaguerreKernel) -> UnfoldingMap {
    UnfoldingMap::new(kernel)
}

/// Wigner surmise for the GUE nearest-neighbour spacing density,
/// `P(s) = (32/π²) s² exp(-4s²/π)`.
pub fn wigner_surmise_gue(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()
}

/// Cumulative distribution of [`wigner_surmise_gue`].
pub fn wigner_surmise_gue_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let a = 4.0 / PI;
    // ∫_0^s t² e^{-a t²} dt = (√π/(4 a^{3/2})) erf(√a s) - s e^{-a s²}/(2a)
    let integral = PI.sqrt() / (4.0 * a.powf(1.5)) * libm::erf(a.sqrt() * s)
        - s * (-a * s * s).exp() / (2.0 * a);
    (32.0 / (PI * PI) * integral).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Plain (unweighted) recurrence, valid only where nothing overflows.
    fn laguerre_plain(k: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, 1.0 - x);
        if k == 0 {
            return p0;
        }
        for j in 1..k {
            let jf = j as f64;
            let p2 = ((2.0 * jf + 1.0 - x) * p1 - jf * p0) / (jf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn phi_small_values() {
        assert_eq!(phi(0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(phi(1, 1.0).unwrap(), 0.0, epsilon = 1e-16);
        // L_2(x) = 1 - 2x + x²/2
        let x: f64 = 3.0;
        let expect = (-x / 2.0).exp() * (1.0 - 2.0 * x + x * x / 2.0);
        assert_abs_diff_eq!(phi(2, x).unwrap(), expect, epsilon = 1e-14);
        assert!(phi(3, -0.1).is_err());
        assert!(phi(3, f64::NAN).is_err());
    }

    #[test]
    fn phi_matches_plain_recurrence_where_representable() {
        for &x in &[0.5f64, 7.0, 40.0, 150.0] {
            for k in [0usize, 1, 5, 30, 90] {
                let plain = (-x / 2.0).exp() * laguerre_plain(k, x);
                let got = phi(k, x).unwrap();
                assert!(
                    (got - plain).abs() <= 1e-10 * plain.abs().max(1e-300) + 1e-300,
                    "k={k} x={x}: {got} vs {plain}"
                );
            }
        }
    }

    #[test]
    fn phi_stays_finite_far_beyond_soft_edge() {
        let mut buf = vec![0.0; 257];
        for &x in &[0.0, 1.0, 100.0, 1024.0, 2048.0, 5000.0] {
            phi_table(x, &mut buf).unwrap();
            assert!(buf.iter().all(|v| v.is_finite()), "x = {x}");
        }
    }

    #[test]
    fn kernel_closed_forms() {
        let k1 = LaguerreKernel::new(1).unwrap();
        assert_abs_diff_eq!(
            k1.kernel(0.3, 1.7).unwrap(),
            (-(0.3 + 1.7) / 2.0f64).exp(),
            epsilon = 1e-15
        );
        let k2 = LaguerreKernel::new(2).unwrap();
        assert_abs_diff_eq!(k2.kernel(1.0, 1.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        assert!(LaguerreKernel::new(0).is_err());
    }

    #[test]
    fn density_closed_forms() {
        let k1 = LaguerreKernel::new(1).unwrap();
        let k2 = LaguerreKernel::new(2).unwrap();
        for &e in &[0.0, 0.5, 1.0, 3.0, 10.0] {
            assert_abs_diff_eq!(k1.one_level_density(e).unwrap(), (-e as f64).exp(), epsilon = 1e-15);
            let s2 = (-e as f64).exp() * (1.0 + (1.0 - e) * (1.0 - e));
            assert_abs_diff_eq!(k2.one_level_density(e).unwrap(), s2, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(k2.one_level_density(1.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn cluster_diagonal_is_density_squared() {
        let k = LaguerreKernel::new(9).unwrap();
        for &e in &[0.0, 0.2, 5.0, 30.0] {
            let d = k.one_level_density(e).unwrap();
            assert_abs_diff_eq!(k.two_level_cluster(e, e).unwrap(), d * d, epsilon = 1e-12 * d * d);
        }
        let k1 = LaguerreKernel::new(1).unwrap();
        assert_abs_diff_eq!(
            k1.two_level_cluster(0.4, 2.0).unwrap(),
            (-2.4f64).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn unfold_closed_form_for_one_level() {
        let map = UnfoldingMap::new(LaguerreKernel::new(1).unwrap());
        assert_eq!(map.unfold(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(map.unfold(2f64.ln()).unwrap(), 0.5, epsilon = 1e-12);
        for &e in &[0.01, 0.3, 2.0, 9.0] {
            assert_abs_diff_eq!(map.unfold(e).unwrap(), 1.0 - (-e as f64).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn invert_rejects_out_of_range() {
        let map = UnfoldingMap::new(LaguerreKernel::new(4).unwrap());
        assert!(map.invert_unfold(-0.1).is_err());
        assert!(map.invert_unfold(4.5).is_err());
        assert!(map.invert_unfold(f64::NAN).is_err());
        assert_eq!(map.invert_unfold(0.0).unwrap(), 0.0);
        assert_eq!(map.invert_unfold(4.0).unwrap(), map.eps_max());
    }

    #[test]
    fn table_is_strictly_increasing_and_reaches_n() {
        for n in [1usize, 3, 16, 64] {
            let map = UnfoldingMap::new(LaguerreKernel::new(n).unwrap());
            let t: Vec<_> = map.table().collect();
            assert_eq!(t[0], (0.0, 0.0));
            for w in t.windows(2) {
                assert!(w[1].0 > w[0].0);
                assert!(w[1].1 > w[0].1 || w[1].1 >= n as f64 - 1e-12);
            }
            assert_abs_diff_eq!(t.last().unwrap().1, n as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn renormalized_cluster_one_level() {
        let map = UnfoldingMap::new(LaguerreKernel::new(1).unwrap());
        for &(w1, w2) in &[(0.1, 0.5), (0.3, 0.9), (0.6, 0.6)] {
            let e1 = -(1.0f64 - w1).ln();
            let e2 = -(1.0f64 - w2).ln();
            let got = map.renormalized_cluster(w1, w2).unwrap();
            assert_abs_diff_eq!(got, (-(e1 + e2) / 2.0f64).exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn surmise_values() {
        assert_eq!(wigner_surmise_gue(0.0), 0.0);
        assert_eq!(wigner_surmise_gue_cdf(0.0), 0.0);
        assert_abs_diff_eq!(wigner_surmise_gue_cdf(20.0), 1.0, epsilon = 1e-15);
        let smax = PI.sqrt() / 2.0;
        assert!(wigner_surmise_gue(smax) > wigner_surmise_gue(smax - 1e-4));
        assert!(wigner_surmise_gue(smax) > wigner_surmise_gue(smax + 1e-4));
    }
}
