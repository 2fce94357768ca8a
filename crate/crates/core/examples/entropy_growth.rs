//! Entanglement entropy and the three largest Schmidt weights over time,
//! for strong and weak chaos, next to the fixed-trace Laguerre ensemble mean.
//!
//! ```text
//! cargo run --release --example entropy_growth -- 64 600
//! ```

use chaos_entanglement::pipeline::{entropy_series, rmt_sample};
use chaos_entanglement::{RunConfig, SchmidtSpectrum, SystemParams};

fn main() -> chaos_entanglement::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(64);
    let steps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(600);

    let strong = entropy_series(
        &RunConfig {
            n,
            ..RunConfig::default()
        },
        steps,
    )?;
    let weak = entropy_series(
        &RunConfig {
            n,
            params: SystemParams::WEAK_CHAOS,
            ..RunConfig::default()
        },
        steps,
    )?;

    println!("step   S(strong)  l1^2     l2^2     l3^2     S(weak)");
    for (s, w) in strong.iter().zip(&weak).step_by((steps / 30).max(1)) {
        println!(
            "{:5}  {:.4}     {:.5}  {:.5}  {:.5}  {:.4}",
            s.step, s.entropy, s.top[0], s.top[1], s.top[2], w.entropy
        );
    }

    let lue = rmt_sample(n, 1000, true, 1)?;
    let n2 = (n * n) as f64;
    let mut mean = 0.0;
    for eps in lue.spectra() {
        mean += SchmidtSpectrum::from_weights(eps.iter().map(|e| e / n2).collect())?.entropy();
    }
    mean /= lue.len() as f64;
    let tail = &strong[steps / 2..];
    let plateau = tail.iter().map(|r| r.entropy).sum::<f64>() / tail.len() as f64;
    println!();
    println!("ln N                       {:.4}", (n as f64).ln());
    println!("fixed-trace LUE mean S     {mean:.4}");
    println!("strong-chaos plateau       {plateau:.4}");
    Ok(())
}
