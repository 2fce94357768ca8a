//! Ensemble generation, persistence and figure-ready tables.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::dynamics::{build_coherent_product, CoherentStateSpec, FloquetPropagator, LatticeConfig, WaveFunction2D};
use crate::ensemble::{BurnIn, EnsembleMetadata, InitialCondition, Source, SpectraEnsemble};
use crate::error::{Error, Result};
use crate::laguerre::{wigner_surmise_gue, wigner_surmise_gue_cdf, LaguerreKernel, UnfoldingMap};
use crate::sampler::{sample_lue_ensemble, stream_rng, SamplerConfig};
use crate::schmidt::{detect_saturation, schmidt_decompose, SchmidtSpectrum};
use crate::stats::{
    analytic_cluster_reference, estimate_r1, estimate_renormalized_cluster, spacing_distribution, uniform_edges,
    ClusterOptions, Regime,
};

/// Trailing window (steps) for automatic burn-in detection.
pub const SATURATION_WINDOW: usize = 50;
/// Entropy slope (nats per step) below which the series counts as saturated.
pub const SATURATION_SLOPE_TOL: f64 = 1e-3;
/// Extra steps evolved after saturation is detected.
pub const SATURATION_GUARD: usize = 50;
/// Upper limit on automatic burn-in.
pub const MAX_AUTO_BURN_IN: usize = 5000;

/// Entropy and the three largest Schmidt weights at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRecord {
    pub step: usize,
    pub entropy: f64,
    pub top: [f64; 3],
}

impl EntropyRecord {
    fn new(step: usize, s: &SchmidtSpectrum) -> Self {
        let w = s.weights();
        let mut top = [0.0; 3];
        for (t, v) in top.iter_mut().zip(w) {
            *t = *v;
        }
        Self {
            step,
            entropy: s.entropy(),
            top,
        }
    }
}

/// Result of [`simulate`]: the ensemble and the entropy record of the first
/// trajectory (every burn-in step, then every collected snapshot).
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub ensemble: SpectraEnsemble,
    pub entropy: Vec<EntropyRecord>,
    /// Burn-in actually used by each trajectory.
    pub burn_in_used: Vec<usize>,
}

fn coherent_spec(cfg: &RunConfig, lattice: &LatticeConfig, x0: f64, p0: f64) -> CoherentStateSpec {
    let mut spec = CoherentStateSpec::minimal(x0, p0, lattice);
    if let Some(s) = cfg.sigma {
        spec.sigma = s;
    }
    spec
}

/// Initial product state of trajectory `index`.
pub fn initial_state(cfg: &RunConfig, index: u64) -> Result<WaveFunction2D> {
    let lattice = cfg.lattice()?;
    let (s1, s2) = match cfg.initial {
        InitialCondition::Fixed { x0, p0 } => {
            let s = coherent_spec(cfg, &lattice, x0, p0);
            (s, s)
        }
        InitialCondition::Random => {
            let mut rng = stream_rng(cfg.seed, index);
            let mut draw = || {
                let x0 = rng.random_range(0.0..2.0 * PI);
                let p0 = rng.random_range(-PI..PI);
                coherent_spec(cfg, &lattice, x0, p0)
            };
            (draw(), draw())
        }
    };
    build_coherent_product(&s1, &s2, &lattice)
}

fn scaled(s: &SchmidtSpectrum, n: usize) -> Vec<f64> {
    let n2 = (n * n) as f64;
    s.weights().iter().map(|w| w * n2).collect()
}

struct TrajectoryRun {
    spectra: Vec<Vec<f64>>,
    entropy: Vec<EntropyRecord>,
    burn_in: usize,
}

fn run_trajectory(cfg: &RunConfig, index: u64, count: usize, record: bool) -> Result<TrajectoryRun> {
    let n = cfg.n;
    let mut psi = initial_state(cfg, index)?;
    let mut prop = FloquetPropagator::new(*psi.lattice(), cfg.params)?;
    let mut entropy = Vec::new();
    let first = schmidt_decompose(&psi)?;
    let mut series = vec![first.entropy()];
    if record {
        entropy.push(EntropyRecord::new(0, &first));
    }

    let mut step = 0usize;
    let burn_in = match cfg.burn_in {
        BurnIn::Steps(b) => {
            for _ in 0..b {
                prop.step(&mut psi)?;
                step += 1;
                if record {
                    entropy.push(EntropyRecord::new(step, &schmidt_decompose(&psi)?));
                }
            }
            b
        }
        BurnIn::Auto => {
            let mut saturated_at = None;
            while step < MAX_AUTO_BURN_IN {
                prop.step(&mut psi)?;
                step += 1;
                let s = schmidt_decompose(&psi)?;
                series.push(s.entropy());
                if record {
                    entropy.push(EntropyRecord::new(step, &s));
                }
                match saturated_at {
                    None if series.len() >= SATURATION_WINDOW => {
                        let tail = &series[series.len() - SATURATION_WINDOW..];
                        if detect_saturation(tail, SATURATION_WINDOW, SATURATION_SLOPE_TOL)?.is_some() {
                            saturated_at = Some(step);
                        }
                    }
                    Some(at) if step >= at + SATURATION_GUARD => break,
                    _ => {}
                }
            }
            step
        }
    };

    let mut spectra = Vec::with_capacity(count);
    for k in 0..count {
        if k > 0 {
            for _ in 0..cfg.stride {
                prop.step(&mut psi)?;
                step += 1;
            }
        }
        let s = schmidt_decompose(&psi)?;
        if record && k > 0 {
            entropy.push(EntropyRecord::new(step, &s));
        }
        spectra.push(scaled(&s, n));
    }
    Ok(TrajectoryRun {
        spectra,
        entropy,
        burn_in,
    })
}

fn simulation_metadata(cfg: &RunConfig, lattice: &LatticeConfig) -> EnsembleMetadata {
    EnsembleMetadata {
        source: Source::Simulation,
        k1: Some(cfg.params.k1),
        k2: Some(cfg.params.k2),
        cpp: Some(cfg.params.cpp),
        sigma: Some(cfg.sigma.unwrap_or_else(|| (0.5 * lattice.hbar()).sqrt())),
        burn_in: Some(cfg.burn_in),
        stride: Some(cfg.stride),
        seed: cfg.seed,
        fixed_trace: true,
        initial: Some(cfg.initial.label().to_string()),
        trajectories: Some(cfg.trajectories),
    }
}

/// Generates the simulation ensemble without touching the filesystem.
///
/// Trajectory `t` collects `count / T` spectra (the first `count % T`
/// trajectories one more) and draws any random initial condition from
/// stream `t` of the master seed, so the output is independent of how the
/// trajectories are scheduled.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let lattice = cfg.lattice()?;
    let t = cfg.trajectories;
    let runs: Vec<TrajectoryRun> = (0..t)
        .into_par_iter()
        .map(|i| {
            let share = cfg.count / t + usize::from(i < cfg.count % t);
            run_trajectory(cfg, i as u64, share, i == 0)
        })
        .collect::<Result<_>>()?;
    let mut ensemble = SpectraEnsemble::new(cfg.n, simulation_metadata(cfg, &lattice))?;
    let mut entropy = Vec::new();
    let mut burn_in_used = Vec::with_capacity(t);
    for (i, run) in runs.into_iter().enumerate() {
        for s in run.spectra {
            ensemble.push(s)?;
        }
        if i == 0 {
            entropy = run.entropy;
        }
        burn_in_used.push(run.burn_in);
    }
    Ok(SimulationOutput {
        ensemble,
        entropy,
        burn_in_used,
    })
}

fn default_entropy_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".entropy.txt");
    PathBuf::from(s)
}

/// Runs [`simulate`] and writes the ensemble (`cfg.out`, default
/// `ensemble.txt`) and the first trajectory's entropy series
/// (`cfg.entropy_out`, default `<out>.entropy.txt`).
pub fn run_simulate(cfg: &RunConfig) -> Result<SpectraEnsemble> {
    let sim = simulate(cfg)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("ensemble.txt"));
    sim.ensemble.write(&out)?;
    let entropy_out = cfg.entropy_out.clone().unwrap_or_else(|| default_entropy_path(&out));
    write_entropy(&entropy_out, &sim.entropy)?;
    Ok(sim.ensemble)
}

/// Entropy and leading Schmidt weights for steps `0..=steps`.
pub fn entropy_series(cfg: &RunConfig, steps: usize) -> Result<Vec<EntropyRecord>> {
    cfg.validate()?;
    let mut psi = initial_state(cfg, 0)?;
    let mut prop = FloquetPropagator::new(*psi.lattice(), cfg.params)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(EntropyRecord::new(0, &schmidt_decompose(&psi)?));
    prop.evolve(&mut psi, steps, |t, state| {
        out.push(EntropyRecord::new(t, &schmidt_decompose(state)?));
        Ok(())
    })?;
    Ok(out)
}

pub fn entropy_table(records: &[EntropyRecord]) -> String {
    let mut s = String::from("# columns=step\tS\tlambda1_sq\tlambda2_sq\tlambda3_sq\n");
    for r in records {
        let _ = writeln!(
            s,
            "{}\t{:e}\t{:e}\t{:e}\t{:e}",
            r.step, r.entropy, r.top[0], r.top[1], r.top[2]
        );
    }
    s
}

fn write_entropy(path: &Path, records: &[EntropyRecord]) -> Result<()> {
    fs::write(path, entropy_table(records)).map_err(|e| Error::io(path, e))
}

/// Writes the entropy time series of `cfg` to `output`.
pub fn run_entropy(cfg: &RunConfig, steps: usize, output: &Path) -> Result<Vec<EntropyRecord>> {
    let records = entropy_series(cfg, steps)?;
    write_entropy(output, &records)?;
    Ok(records)
}

/// Laguerre-ensemble spectra from the matrix sampler.
pub fn rmt_sample(n: usize, count: usize, fixed_trace: bool, seed: u64) -> Result<SpectraEnsemble> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let cfg = SamplerConfig::new(n, seed, fixed_trace)?;
    let spectra = sample_lue_ensemble(&cfg, count)?;
    SpectraEnsemble::from_spectra(n, EnsembleMetadata::sampler(seed, fixed_trace), spectra)
}

pub fn run_rmt_sample(n: usize, count: usize, fixed_trace: bool, seed: u64, output: &Path) -> Result<SpectraEnsemble> {
    let ens = rmt_sample(n, count, fixed_trace, seed)?;
    ens.write(output)?;
    Ok(ens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    R1,
    ClusterHard,
    ClusterBulk,
    ClusterSoft,
    Spacing,
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Analysis::R1 => "r1",
            Analysis::ClusterHard => "cluster-hard",
            Analysis::ClusterBulk => "cluster-bulk",
            Analysis::ClusterSoft => "cluster-soft",
            Analysis::Spacing => "spacing",
        })
    }
}

impl FromStr for Analysis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r1" => Ok(Analysis::R1),
            "cluster-hard" => Ok(Analysis::ClusterHard),
            "cluster-bulk" => Ok(Analysis::ClusterBulk),
            "cluster-soft" => Ok(Analysis::ClusterSoft),
            "spacing" => Ok(Analysis::Spacing),
            other => Err(Error::invalid(format!(
                "unknown analysis `{other}` (expected r1, cluster-hard, cluster-bulk, cluster-soft or spacing)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    /// Dimension the caller expects; a mismatch with the file is an error.
    pub n: Option<usize>,
    pub r1_bins: usize,
    pub omega_max: f64,
    pub omega_bin: f64,
    pub cluster: ClusterOptions,
    /// Defaults to the bulk window of `cluster`.
    pub spacing_window: Option<(f64, f64)>,
    pub spacing_max: f64,
    pub spacing_bin: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            n: None,
            r1_bins: 80,
            omega_max: 4.0,
            omega_bin: 0.1,
            cluster: ClusterOptions::default(),
            spacing_window: None,
            spacing_max: 5.0,
            spacing_bin: 0.1,
        }
    }
}

/// Delimiter-separated table with a `#` header.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisTable {
    pub header: Vec<(String, String)>,
    pub columns: [&'static str; 4],
    pub rows: Vec<[f64; 4]>,
}

impl AnalysisTable {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "# columns={}", self.columns.join("\t"));
        for r in &self.rows {
            let _ = writeln!(s, "{:e}\t{:e}\t{:e}\t{:e}", r[0], r[1], r[2], r[3]);
        }
        s
    }

    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn steps_edges(max: f64, bin: f64) -> Result<Vec<f64>> {
    if !(max > 0.0 && bin > 0.0) {
        return Err(Error::invalid("bin width and range must be positive"));
    }
    let bins = (max / bin).round().max(1.0) as usize;
    Ok(uniform_edges(0.0, bin * bins as f64, bins))
}

/// Computes the table for `analysis` on an in-memory ensemble.
pub fn analyze(ens: &SpectraEnsemble, analysis: Analysis, opts: &AnalyzeOptions) -> Result<AnalysisTable> {
    let n = ens.n();
    if let Some(expected) = opts.n {
        if expected != n {
            return Err(Error::DimensionMismatch { expected, found: n });
        }
    }
    if ens.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let kernel = LaguerreKernel::new(n)?;
    let mut header = vec![
        ("analysis".to_string(), analysis.to_string()),
        ("N".to_string(), n.to_string()),
        ("source".to_string(), ens.metadata.source.to_string()),
        ("spectra".to_string(), ens.len().to_string()),
    ];
    let (columns, rows) = match analysis {
        Analysis::R1 => {
            let max = ens
                .spectra()
                .iter()
                .flat_map(|s| s.first().copied())
                .fold(0.0f64, f64::max);
            let hi = if max > 0.0 { max * (1.0 + 1e-9) } else { 1.0 };
            let est = estimate_r1(ens, &uniform_edges(0.0, hi, opts.r1_bins.max(1)))?;
            let map = UnfoldingMap::new(kernel);
            // bin average of σ_N, so the comparison carries no curvature bias
            let rows = est
                .edges
                .windows(2)
                .zip(est.values.iter().zip(&est.errors))
                .map(|(w, (&v, &e))| {
                    let avg = (map.unfold(w[1])? - map.unfold(w[0])?) / (w[1] - w[0]);
                    Ok([0.5 * (w[0] + w[1]), v, e, avg])
                })
                .collect::<Result<Vec<_>>>()?;
            header.push(("reference".into(), "laguerre-one-level-density-bin-average".into()));
            (["epsilon", "value", "stderr", "reference"], rows)
        }
        Analysis::ClusterHard | Analysis::ClusterBulk | Analysis::ClusterSoft => {
            let regime = match analysis {
                Analysis::ClusterHard => Regime::Hard,
                Analysis::ClusterBulk => Regime::Bulk,
                _ => Regime::Soft,
            };
            let map = UnfoldingMap::new(kernel);
            let edges = steps_edges(opts.omega_max, opts.omega_bin)?;
            let est = estimate_renormalized_cluster(ens, &map, regime, &edges, &opts.cluster)?;
            let reference = analytic_cluster_reference(&map, regime, &edges, &opts.cluster)?;
            header.push(("unfolding".into(), "analytic-laguerre".into()));
            header.push(("edge_window".into(), opts.cluster.edge_window.to_string()));
            header.push(("bulk_window".into(), format!("{},{}", opts.cluster.bulk_margin, n as f64 - opts.cluster.bulk_margin)));
            header.push(("reference".into(), "laguerre-renormalized-cluster".into()));
            let rows = est
                .centers()
                .iter()
                .enumerate()
                .map(|(i, &c)| [c, est.values[i], est.errors[i], reference[i]])
                .collect();
            (["omega", "value", "stderr", "reference"], rows)
        }
        Analysis::Spacing => {
            let map = UnfoldingMap::new(kernel);
            let window = opts.spacing_window.unwrap_or((
                opts.cluster.bulk_margin,
                n as f64 - opts.cluster.bulk_margin,
            ));
            let edges = steps_edges(opts.spacing_max, opts.spacing_bin)?;
            let hist = spacing_distribution(ens, &map, window, &edges)?;
            header.push(("unfolding".into(), "analytic-laguerre".into()));
            header.push(("window".into(), format!("{},{}", window.0, window.1)));
            header.push(("spacings".into(), hist.samples().to_string()));
            header.push(("raw_mean_spacing".into(), format!("{:e}", hist.raw_mean)));
            header.push(("ks_distance".into(), format!("{:e}", hist.ks_distance(wigner_surmise_gue_cdf)?)));
            header.push(("reference".into(), "gue-wigner-surmise".into()));
            let rows = hist
                .centers()
                .iter()
                .enumerate()
                .map(|(i, &c)| [c, hist.density[i], hist.errors[i], wigner_surmise_gue(c)])
                .collect();
            (["s", "value", "stderr", "reference"], rows)
        }
    };
    Ok(AnalysisTable { header, columns, rows })
}

/// Reads an ensemble file, analyzes it and writes the table to `output`.
pub fn run_analyze(
    ensemble_path: &Path,
    analysis: Analysis,
    opts: &AnalyzeOptions,
    output: &Path,
) -> Result<AnalysisTable> {
    let ens = SpectraEnsemble::read(ensemble_path)?;
    let table = analyze(&ens, analysis, opts)?;
    fs::write(output, table.to_text()).map_err(|e| Error::io(output, e))?;
    Ok(table)
}
