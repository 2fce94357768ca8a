//! The file-based workflow: simulate, sample the reference ensemble, then
//! tabulate every analysis for both. Outputs go to the directory given as
//! the first argument (default: `chaos-entanglement-pipeline` under the system temp dir).
//!
//! ```text
//! cargo run --release --example full_pipeline -- out/
//! ```

use std::path::PathBuf;

use chaos_entanglement::pipeline::{run_analyze, run_entropy, run_rmt_sample, run_simulate, Analysis, AnalyzeOptions};
use chaos_entanglement::{InitialCondition, RunConfig};

fn main() -> chaos_entanglement::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("chaos-entanglement-pipeline"));
    std::fs::create_dir_all(&dir).map_err(|e| chaos_entanglement::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let cfg = RunConfig {
        n: 32,
        initial: InitialCondition::Random,
        trajectories: 8,
        count: 400,
        seed: 11,
        out: Some(dir.join("strong.txt")),
        ..RunConfig::default()
    };
    let sim = run_simulate(&cfg)?;
    println!(
        "simulated {} spectra -> {}",
        sim.len(),
        dir.join("strong.txt").display()
    );
    run_entropy(
        &RunConfig {
            n: 32,
            ..RunConfig::default()
        },
        300,
        &dir.join("entropy.tsv"),
    )?;

    run_rmt_sample(32, 4000, false, 11, &dir.join("lue.txt"))?;

    let opts = AnalyzeOptions::default();
    for input in ["strong", "lue"] {
        for a in [
            Analysis::R1,
            Analysis::ClusterHard,
            Analysis::ClusterBulk,
            Analysis::ClusterSoft,
            Analysis::Spacing,
        ] {
            let out = dir.join(format!("{input}.{a}.tsv"));
            let t = run_analyze(&dir.join(format!("{input}.txt")), a, &opts, &out)?;
            let extra = t
                .header_value("ks_distance")
                .map(|k| format!("  ks_distance={k}"))
                .unwrap_or_default();
            println!(
                "{:32} {} rows{extra}",
                out.file_name().unwrap().to_string_lossy(),
                t.rows.len()
            );
        }
    }
    Ok(())
}
