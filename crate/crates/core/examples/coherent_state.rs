//! Builds the product of two coherent states on the torus and applies a few
//! Floquet periods of the coupled kicked rotors.
//!
//! ```text
//! cargo run --release --example coherent_state -- 64
//! ```

use std::f64::consts::PI;

use chaos_entanglement::{
    build_coherent_product, schmidt_decompose, CoherentStateSpec, FloquetPropagator, LatticeConfig, SystemParams,
};

fn main() -> chaos_entanglement::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(64);
    let lattice = LatticeConfig::new(n)?;
    let spec = CoherentStateSpec::minimal(PI / 2.0, PI / 4.0, &lattice);
    println!("N = {n}, hbar = {:.5}, sigma = {:.5}", lattice.hbar(), spec.sigma);

    let mut psi = build_coherent_product(&spec, &spec, &lattice)?;

    let (mut best, mut at) = (0.0, (0, 0));
    for j1 in 0..n {
        for j2 in 0..n {
            let p = psi.amplitude(j1, j2).norm_sqr();
            if p > best {
                best = p;
                at = (j1, j2);
            }
        }
    }
    println!(
        "position peak at x = ({:.4}, {:.4})",
        lattice.position(at.0),
        lattice.position(at.1)
    );

    let mom = psi.to_momentum();
    let peak = (0..n * n)
        .max_by(|&a, &b| mom[a].norm_sqr().total_cmp(&mom[b].norm_sqr()))
        .unwrap();
    println!(
        "momentum peak at p = ({:.4}, {:.4})",
        lattice.momentum(peak / n),
        lattice.momentum(peak % n)
    );

    let mut prop = FloquetPropagator::new(lattice, SystemParams::STRONG_CHAOS)?;
    println!("step  norm              S");
    for t in 0..=5 {
        if t > 0 {
            prop.step(&mut psi)?;
        }
        println!("{t:4}  {:.15}  {:.6}", psi.norm(), schmidt_decompose(&psi)?.entropy());
    }
    Ok(())
}
