//! Nearest-neighbour spacing distributions: sampled GUE matrices, the bulk of
//! Laguerre spectra, and both kicked-rotor regimes, against the Wigner surmise.
//!
//! ```text
//! cargo run --release --example spacing_distribution
//! ```

use chaos_entanglement::pipeline::{rmt_sample, simulate};
use chaos_entanglement::stats::uniform_edges;
use chaos_entanglement::{
    ks_distance, sample_gue_unfolded_spacings, spacing_distribution, stream_rng, wigner_surmise_gue,
    wigner_surmise_gue_cdf, InitialCondition, LaguerreKernel, RunConfig, SpacingHistogram, SpectraEnsemble,
    SystemParams, UnfoldingMap,
};

fn bulk(ens: &SpectraEnsemble) -> chaos_entanglement::Result<SpacingHistogram> {
    let map = UnfoldingMap::new(LaguerreKernel::new(ens.n())?);
    let n = ens.n() as f64;
    spacing_distribution(ens, &map, (10.0, n - 10.0), &uniform_edges(0.0, 3.0, 15))
}

fn main() -> chaos_entanglement::Result<()> {
    let gue = sample_gue_unfolded_spacings(64, 20_000, &mut stream_rng(1, 0))?;
    println!(
        "GUE N=64: KS distance to the surmise {:.4}",
        ks_distance(&gue, wigner_surmise_gue_cdf)?
    );

    let lue = bulk(&rmt_sample(64, 1000, true, 2)?)?;

    let run = |params| {
        simulate(&RunConfig {
            params,
            initial: InitialCondition::Random,
            trajectories: 10,
            count: 500,
            seed: 3,
            ..RunConfig::default()
        })
        .map(|s| s.ensemble)
    };
    let strong = bulk(&run(SystemParams::STRONG_CHAOS)?)?;
    let weak = bulk(&run(SystemParams::WEAK_CHAOS)?)?;

    println!("\n   s     surmise  LUE      strong   weak");
    for (i, c) in lue.centers().iter().enumerate() {
        println!(
            "{c:5.2}  {:.4}   {:.4}   {:.4}   {:.4}",
            wigner_surmise_gue(*c),
            lue.density[i],
            strong.density[i],
            weak.density[i]
        );
    }
    for (name, h) in [("LUE", &lue), ("strong", &strong), ("weak", &weak)] {
        println!(
            "{name:7} KS {:.4}  P(s < 0.5) {:.4}  raw mean spacing {:.3}",
            h.ks_distance(wigner_surmise_gue_cdf)?,
            h.fraction_below(0.5),
            h.raw_mean
        );
    }
    Ok(())
}
