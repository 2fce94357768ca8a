#![allow(dead_code)]

use chaos_entanglement::LaguerreKernel;

/// Composite Simpson rule with `panels` (rounded up to even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// `∫_a^b σ_N`, integrated in `u = sqrt(ε)` so the hard edge is smooth.
pub fn density_integral(kernel: &LaguerreKernel, a: f64, b: f64, panels: usize) -> f64 {
    simpson(a.sqrt(), b.sqrt(), panels, |u| 2.0 * u * kernel.one_level_density(u * u).unwrap())
}

/// `-Σ w ln w` over the weights `ε / N²`.
pub fn entropy_of_scaled(eps: &[f64], n: usize) -> f64 {
    let n2 = (n * n) as f64;
    eps.iter()
        .map(|e| e / n2)
        .filter(|&w| w > 0.0)
        .map(|w| -w * w.ln())
        .sum()
}
