//! One-level density, unfolding and the renormalized cluster function of the
//! Laguerre unitary ensemble.
//!
//! ```text
//! cargo run --release --example laguerre_kernel -- 32
//! ```

use chaos_entanglement::{phi, LaguerreKernel, UnfoldingMap};

fn main() -> chaos_entanglement::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(32);
    let kernel = LaguerreKernel::new(n)?;
    let map = UnfoldingMap::new(kernel);

    println!("phi_k(1.5) for k = 0..5:");
    for k in 0..5 {
        println!("  phi_{k} = {:+.10}", phi(k, 1.5)?);
    }

    println!("\n  eps        sigma_N     omega(eps)");
    let top = 4.0 * n as f64 + 10.0;
    for i in 0..=12 {
        let e = top * (i as f64 / 12.0).powi(2);
        println!("{e:7.2}  {:.6e}  {:9.5}", kernel.one_level_density(e)?, map.unfold(e)?);
    }
    println!(
        "omega(eps_max = {:.1}) = {:.12}",
        map.eps_max(),
        map.unfold(map.eps_max())?
    );

    let mid = n as f64 / 2.0;
    println!("\nT2bar(N/2, N/2 + w), hard edge T2bar(0, w) and soft edge T2bar(N - w, N):");
    println!("   w      bulk        hard        soft");
    for i in 0..=16 {
        let w = 0.25 * i as f64;
        let soft = if w > 0.0 {
            format!("{:.4e}", map.renormalized_cluster(n as f64 - w, n as f64 - 1e-3)?)
        } else {
            "-".into()
        };
        println!(
            "{w:5.2}  {:.4e}  {:.4e}  {soft}",
            map.renormalized_cluster(mid, mid + w)?,
            map.renormalized_cluster(1e-3, 1e-3 + w)?,
        );
    }
    Ok(())
}
