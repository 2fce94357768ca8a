//! Draws Laguerre-ensemble spectra from complex Gaussian matrices and checks
//! the trace and the one-level density against the kernel.
//!
//! ```text
//! cargo run --release --example lue_sampling -- 16 20000
//! ```

use chaos_entanglement::pipeline::rmt_sample;
use chaos_entanglement::stats::uniform_edges;
use chaos_entanglement::{estimate_r1, LaguerreKernel, UnfoldingMap};

fn main() -> chaos_entanglement::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(16);
    let count: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);

    let ens = rmt_sample(n, count, false, 42)?;
    let trace = ens.spectra().iter().map(|s| s.iter().sum::<f64>()).sum::<f64>() / count as f64;
    println!("{count} spectra, N = {n}: mean trace {trace:.2} (N^2 = {})", n * n);

    let map = UnfoldingMap::new(LaguerreKernel::new(n)?);
    let top = 4.0 * n as f64 + 8.0;
    let edges = uniform_edges(0.0, top, 24);
    let r1 = estimate_r1(&ens, &edges)?;
    println!("\n  eps      R1         +-         sigma_N (bin mean)   z");
    for (w, (v, e)) in edges.windows(2).zip(r1.values.iter().zip(&r1.errors)) {
        let expect = (map.unfold(w[1])? - map.unfold(w[0])?) / (w[1] - w[0]);
        let z = if *e > 0.0 { (v - expect) / e } else { 0.0 };
        println!(
            "{:6.2}  {v:.5}  {e:.5}  {expect:.5}              {z:+.2}",
            0.5 * (w[0] + w[1])
        );
    }

    let fixed = rmt_sample(n, 5, true, 42)?;
    println!(
        "\nfixed-trace sums: {:?}",
        fixed
            .spectra()
            .iter()
            .map(|s| s.iter().sum::<f64>())
            .collect::<Vec<_>>()
    );
    Ok(())
}
