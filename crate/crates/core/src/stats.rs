//! Histogram estimators for level densities, pair correlations, the
//! renormalized two-level cluster function and nearest-neighbour spacings.
//!
//! Spectra are unfolded with the analytic Laguerre map before any estimate
//! in `ω` coordinates. Error bars are Poisson on the underlying counts.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::ensemble::SpectraEnsemble;
use crate::error::{Error, Result};
use crate::laguerre::UnfoldingMap;

/// Coordinate in which bin edges are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Epsilon,
    Omega,
    Spacing,
}

/// One-dimensional histogram estimate with per-bin standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedEstimate {
    pub coordinate: Coordinate,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Number of spectra contributing.
    pub samples: usize,
}

impl BinnedEstimate {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `Σ value × width`.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.widths()).map(|(v, w)| v * w).sum()
    }
}

/// Two-dimensional histogram estimate, row-major over `(x, y)` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedEstimate2D {
    pub edges_x: Vec<f64>,
    pub edges_y: Vec<f64>,
    pub counts: Vec<u64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub samples: usize,
}

impl BinnedEstimate2D {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * (self.edges_y.len() - 1) + iy]
    }

    pub fn integral(&self) -> f64 {
        let ny = self.edges_y.len() - 1;
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let (ix, iy) = (k / ny, k % ny);
                v * (self.edges_x[ix + 1] - self.edges_x[ix]) * (self.edges_y[iy + 1] - self.edges_y[iy])
            })
            .sum()
    }
}

/// `bins + 1` equally spaced edges on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let h = (hi - lo) / bins as f64;
    (0..=bins).map(|i| lo + h * i as f64).collect()
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::invalid("need at least two bin edges"));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("bin edges must be finite and strictly increasing"));
    }
    Ok(())
}

/// Bin containing `x`, with the last edge exclusive.
fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    if x < edges[0] || x >= edges[edges.len() - 1] {
        return None;
    }
    Some(edges.partition_point(|&e| e <= x) - 1)
}

fn nonempty(ens: &SpectraEnsemble) -> Result<()> {
    if ens.is_empty() {
        Err(Error::EmptyEnsemble)
    } else {
        Ok(())
    }
}

/// One-level density `R_1(ε)`: counts / (spectra × bin width).
pub fn estimate_r1(ens: &SpectraEnsemble, edges: &[f64]) -> Result<BinnedEstimate> {
    nonempty(ens)?;
    check_edges(edges)?;
    let mut counts = vec![0u64; edges.len() - 1];
    for s in ens.spectra() {
        for &e in s {
            if let Some(b) = bin_index(edges, e) {
                counts[b] += 1;
            }
        }
    }
    Ok(density_estimate(Coordinate::Epsilon, edges, counts, ens.len() as f64, ens.len()))
}

fn density_estimate(coordinate: Coordinate, edges: &[f64], counts: Vec<u64>, norm: f64, samples: usize) -> BinnedEstimate {
    let (values, errors) = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| {
            let scale = 1.0 / (norm * (w[1] - w[0]));
            (c as f64 * scale, (c as f64).sqrt() * scale)
        })
        .unzip();
    BinnedEstimate {
        coordinate,
        edges: edges.to_vec(),
        counts,
        values,
        errors,
        samples,
    }
}

/// Two-level correlation `R_2(ε, ε')` over ordered pairs `i ≠ j` of each
/// spectrum.
pub fn estimate_r2(ens: &SpectraEnsemble, edges1: &[f64], edges2: &[f64]) -> Result<BinnedEstimate2D> {
    nonempty(ens)?;
    if ens.n() < 2 {
        return Err(Error::invalid("pair correlations need N ≥ 2"));
    }
    check_edges(edges1)?;
    check_edges(edges2)?;
    let (nx, ny) = (edges1.len() - 1, edges2.len() - 1);
    let mut counts = vec![0u64; nx * ny];
    for s in ens.spectra() {
        let bx: Vec<Option<usize>> = s.iter().map(|&e| bin_index(edges1, e)).collect();
        let by: Vec<Option<usize>> = s.iter().map(|&e| bin_index(edges2, e)).collect();
        for (i, bi) in bx.iter().enumerate() {
            let Some(bi) = bi else { continue };
            for (j, bj) in by.iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Some(bj) = bj {
                    counts[bi * ny + bj] += 1;
                }
            }
        }
    }
    let samples = ens.len() as f64;
    let mut values = Vec::with_capacity(nx * ny);
    let mut errors = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        for iy in 0..ny {
            let area = (edges1[ix + 1] - edges1[ix]) * (edges2[iy + 1] - edges2[iy]);
            let c = counts[ix * ny + iy] as f64;
            values.push(c / (samples * area));
            errors.push(c.sqrt() / (samples * area));
        }
    }
    Ok(BinnedEstimate2D {
        edges_x: edges1.to_vec(),
        edges_y: edges2.to_vec(),
        counts,
        values,
        errors,
        samples: ens.len(),
    })
}

/// Unfolds every spectrum into ascending `ω` values.
pub fn unfold_ensemble(ens: &SpectraEnsemble, map: &UnfoldingMap) -> Result<Vec<Vec<f64>>> {
    if ens.n() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: ens.n(),
        });
    }
    Ok(ens
        .spectra()
        .par_iter()
        .map(|s| {
            let mut w: Vec<f64> = s.iter().map(|&e| map.unfold_unchecked(e)).collect();
            w.sort_by(f64::total_cmp);
            w
        })
        .collect())
}

/// Spectral region of a renormalized cluster-function section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `T̄₂(0, ω)`: anchored on the smallest level.
    Hard,
    /// `T̄₂(ω', ω' + ω)` averaged over the bulk window.
    Bulk,
    /// `T̄₂(N - ω, N)`: anchored on the largest level.
    Soft,
}

/// Reference-window conventions for the cluster-function estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    /// Width in `ω` of the anchoring window at the hard and soft edges.
    pub edge_window: f64,
    /// Width in `ω'` of the cells averaged over in the bulk.
    pub bulk_cell: f64,
    /// The bulk window is `[bulk_margin, N - bulk_margin]`.
    pub bulk_margin: f64,
    /// Midpoint sub-samples per axis of each (cell, separation bin) when
    /// averaging density-dependent factors and analytic references.
    pub subsamples: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            edge_window: 0.05,
            bulk_cell: 0.1,
            bulk_margin: 10.0,
            subsamples: 4,
        }
    }
}

struct Section {
    cells: Vec<(f64, f64)>,
    /// +1 when partners lie above the reference level, -1 below.
    direction: f64,
}

fn section(regime: Regime, n: usize, opts: &ClusterOptions) -> Result<Section> {
    let nf = n as f64;
    match regime {
        Regime::Hard => Ok(Section {
            cells: vec![(0.0, opts.edge_window)],
            direction: 1.0,
        }),
        Regime::Soft => Ok(Section {
            cells: vec![(nf - opts.edge_window, nf)],
            direction: -1.0,
        }),
        Regime::Bulk => {
            let lo = opts.bulk_margin;
            let span = nf - 2.0 * opts.bulk_margin;
            let count = (span / opts.bulk_cell + 1e-9).floor();
            if !(count >= 1.0) {
                return Err(Error::Domain(format!(
                    "bulk window [{lo}, {}] is empty for N = {n}",
                    nf - lo
                )));
            }
            let cells = (0..count as usize)
                .map(|i| (lo + opts.bulk_cell * i as f64, lo + opts.bulk_cell * (i + 1) as f64))
                .collect();
            Ok(Section { cells, direction: 1.0 })
        }
    }
}

fn partner_interval(cell: (f64, f64), bin: (f64, f64), direction: f64) -> (f64, f64) {
    if direction > 0.0 {
        (cell.0 + bin.0, cell.1 + bin.1)
    } else {
        (cell.0 - bin.1, cell.1 - bin.0)
    }
}

/// Memoized `ω ↦ ε` and `σ_N(ε(ω))`, sampled on the `sub × sub` midpoint
/// grid of each (anchoring cell, separation bin) pair.
struct CellSampler<'a> {
    map: &'a UnfoldingMap,
    sub: usize,
    direction: f64,
    cache: HashMap<i64, (f64, f64)>,
}

impl<'a> CellSampler<'a> {
    fn new(map: &'a UnfoldingMap, sub: usize, direction: f64) -> Self {
        Self {
            map,
            sub: sub.max(1),
            direction,
            cache: HashMap::new(),
        }
    }

    /// `(ε(ω), σ_N(ε(ω)))`.
    fn point(&mut self, omega: f64) -> Result<(f64, f64)> {
        let w = omega.clamp(0.0, self.map.dim() as f64);
        let key = (w * 1e9).round() as i64;
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let e = self.map.invert_unfold(w)?;
        let v = (e, self.map.kernel().density_unchecked(e));
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Mean of `f(ε_a, σ_a, ε_b, σ_b)` over the sample pairs of `cell` and
    /// separation `bin`; pairs leaving `[0, N]` are skipped.
    fn mean<F: FnMut(f64, f64, f64, f64) -> Result<f64>>(
        &mut self,
        cell: (f64, f64),
        bin: (f64, f64),
        mut f: F,
    ) -> Result<f64> {
        let nf = self.map.dim() as f64;
        let sub = self.sub as f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..self.sub {
            let wr = cell.0 + (cell.1 - cell.0) * (i as f64 + 0.5) / sub;
            for k in 0..self.sub {
                let d = bin.0 + (bin.1 - bin.0) * (k as f64 + 0.5) / sub;
                let wp = wr + self.direction * d;
                if !(0.0..=nf).contains(&wp) {
                    continue;
                }
                let (ea, da) = self.point(wr)?;
                let (eb, db) = self.point(wp)?;
                sum += f(ea, da, eb, db)?;
                count += 1;
            }
        }
        Ok(if count > 0 { sum / count as f64 } else { 0.0 })
    }
}

/// Renormalized two-level cluster function estimated on `omega_edges`
/// (separations `ω ≥ 0` from the anchoring level).
///
/// For every anchoring cell `c` and separation bin `b` the empirical
/// densities in unfolded coordinates give
/// `(R₁(c) R₁(p) - R₂(c, b)) / sqrt(R₁(c) R₁(p))`, with `p` the interval
/// swept by partners. This is converted to the `ε`-density convention of
/// [`UnfoldingMap::renormalized_cluster`] by the mean of
/// `sqrt(σ_N(ε(ω)) σ_N(ε(ω')))` over the same sub-samples that
/// [`analytic_cluster_reference`] uses, then averaged over cells.
pub fn estimate_renormalized_cluster(
    ens: &SpectraEnsemble,
    map: &UnfoldingMap,
    regime: Regime,
    omega_edges: &[f64],
    opts: &ClusterOptions,
) -> Result<BinnedEstimate> {
    nonempty(ens)?;
    check_edges(omega_edges)?;
    if omega_edges[0] < 0.0 {
        return Err(Error::invalid("separation edges must be non-negative"));
    }
    let n = ens.n();
    if n < 2 {
        return Err(Error::invalid("cluster function needs N ≥ 2"));
    }
    let sec = section(regime, n, opts)?;
    let levels = unfold_ensemble(ens, map)?;
    let nbins = omega_edges.len() - 1;
    let ncells = sec.cells.len();
    let cell_lo = sec.cells[0].0;
    let cell_w = sec.cells[0].1 - sec.cells[0].0;
    let max_sep = omega_edges[nbins];
    let reach = match regime {
        Regime::Bulk => opts.bulk_margin,
        Regime::Hard | Regime::Soft => n as f64 - opts.edge_window,
    };
    if max_sep > reach {
        return Err(Error::invalid(format!(
            "separation {max_sep} would leave the unfolded range (at most {reach} here)"
        )));
    }

    let mut ref_counts = vec![0u64; ncells];
    let mut pair_counts = vec![0u64; ncells * nbins];
    let cell_of = |w: f64| -> Option<usize> {
        let i = ((w - cell_lo) / cell_w).floor();
        if i >= 0.0 && (i as usize) < ncells && w >= sec.cells[i as usize].0 && w < sec.cells[i as usize].1 {
            Some(i as usize)
        } else if i as usize == ncells && regime == Regime::Soft && w <= sec.cells[ncells - 1].1 {
            Some(ncells - 1)
        } else {
            None
        }
    };
    for lv in &levels {
        let refs: Vec<usize> = match regime {
            Regime::Hard => vec![0],
            Regime::Soft => vec![lv.len() - 1],
            Regime::Bulk => (0..lv.len()).collect(),
        };
        for r in refs {
            let wr = lv[r];
            let Some(c) = cell_of(wr) else { continue };
            ref_counts[c] += 1;
            let mut visit = |j: usize| -> bool {
                let d = sec.direction * (lv[j] - wr);
                if d >= max_sep {
                    return false;
                }
                if let Some(b) = bin_index(omega_edges, d) {
                    pair_counts[c * nbins + b] += 1;
                }
                true
            };
            if sec.direction > 0.0 {
                for j in r + 1..lv.len() {
                    if !visit(j) {
                        break;
                    }
                }
            } else {
                for j in (0..r).rev() {
                    if !visit(j) {
                        break;
                    }
                }
            }
        }
    }

    let mut all: Vec<f64> = levels.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let samples = ens.len() as f64;
    let nf = n as f64;
    let density_in = |lo: f64, hi: f64| -> (f64, f64) {
        let (lo, hi) = (lo.max(0.0), hi.min(nf));
        let count = (all.partition_point(|&w| w < hi) - all.partition_point(|&w| w < lo)) as f64;
        let width = hi - lo;
        (count / (samples * width), count.sqrt() / (samples * width))
    };

    let mut sampler = CellSampler::new(map, opts.subsamples, sec.direction);
    let mut values = vec![0.0; nbins];
    let mut errors = vec![0.0; nbins];
    let mut totals = vec![0u64; nbins];
    for b in 0..nbins {
        let bin = (omega_edges[b], omega_edges[b + 1]);
        let db = bin.1 - bin.0;
        let mut sum = 0.0;
        let mut var = 0.0;
        let mut used = 0usize;
        for (c, &cell) in sec.cells.iter().enumerate() {
            let dc = cell.1 - cell.0;
            let rc = ref_counts[c] as f64;
            let r1c = rc / (samples * dc);
            let pint = partner_interval(cell, bin, sec.direction);
            let (r1p, r1p_err) = density_in(pint.0, pint.1);
            if r1c <= 0.0 || r1p <= 0.0 {
                continue;
            }
            let pc = pair_counts[c * nbins + b] as f64;
            let r2 = pc / (samples * dc * db);
            let scale = sampler.mean(cell, bin, |_, da, _, db| Ok((da * db).sqrt()))?;
            let g = (r1c * r1p).sqrt();
            let value = scale * (g - r2 / g);
            let d_r2 = scale / g;
            let d_r1c = scale * (0.5 * (r1p / r1c).sqrt() + 0.5 * r2 / (r1c * g));
            let d_r1p = scale * (0.5 * (r1c / r1p).sqrt() + 0.5 * r2 / (r1p * g));
            let se_r2 = pc.sqrt() / (samples * dc * db);
            let se_r1c = rc.sqrt() / (samples * dc);
            var += (d_r2 * se_r2).powi(2) + (d_r1c * se_r1c).powi(2) + (d_r1p * r1p_err).powi(2);
            sum += value;
            used += 1;
            totals[b] += pair_counts[c * nbins + b];
        }
        if used == 0 {
            return Err(Error::Domain(format!(
                "no anchoring levels for {regime:?} cluster estimate at separation bin {b}"
            )));
        }
        values[b] = sum / used as f64;
        errors[b] = var.sqrt() / used as f64;
    }
    Ok(BinnedEstimate {
        coordinate: Coordinate::Omega,
        edges: omega_edges.to_vec(),
        counts: totals,
        values,
        errors,
        samples: ens.len(),
    })
}

/// Analytic `T̄₂` averaged over the same anchoring cells and separation
/// bins as [`estimate_renormalized_cluster`], using
/// `opts.subsamples × opts.subsamples` midpoint sub-samples per (cell, bin).
pub fn analytic_cluster_reference(
    map: &UnfoldingMap,
    regime: Regime,
    omega_edges: &[f64],
    opts: &ClusterOptions,
) -> Result<Vec<f64>> {
    check_edges(omega_edges)?;
    let sec = section(regime, map.dim(), opts)?;
    let kernel = *map.kernel();
    let mut sampler = CellSampler::new(map, opts.subsamples, sec.direction);
    let mut out = Vec::with_capacity(omega_edges.len() - 1);
    for w in omega_edges.windows(2) {
        let mut sum = 0.0;
        for &cell in &sec.cells {
            sum += sampler.mean(cell, (w[0], w[1]), |ea, da, eb, db| {
                let denom = (da * db).sqrt();
                if !(denom > 0.0) {
                    return Err(Error::Domain(format!("one-level density vanishes at ε = {ea} or {eb}")));
                }
                let kv = kernel.kernel_unchecked(ea, eb);
                Ok(kv * kv / denom)
            })?;
        }
        out.push(sum / sec.cells.len() as f64);
    }
    Ok(out)
}

/// Nearest-neighbour spacings of unfolded levels within a window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub errors: Vec<f64>,
    pub counts: Vec<u64>,
    pub window: (f64, f64),
    /// Mean spacing in `ω` units before rescaling.
    pub raw_mean: f64,
    /// Spacings divided by `raw_mean`, in collection order.
    pub spacings: Vec<f64>,
}

impl SpacingHistogram {
    pub fn samples(&self) -> usize {
        self.spacings.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().zip(self.edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum()
    }

    pub fn mean(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }

    /// Fraction of spacings strictly below `s`.
    pub fn fraction_below(&self, s: f64) -> f64 {
        self.spacings.iter().filter(|&&x| x < s).count() as f64 / self.spacings.len() as f64
    }

    /// KS distance between the spacing samples and `cdf`.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> Result<f64> {
        ks_distance(&self.spacings, cdf)
    }

    /// KS distance evaluated only at the histogram edges.
    pub fn binned_ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let total = self.spacings.len() as f64;
        let below_first = self.spacings.iter().filter(|&&x| x < self.edges[0]).count() as f64;
        let mut acc = below_first;
        let mut d = (acc / total - cdf(self.edges[0])).abs();
        for (c, e) in self.counts.iter().zip(&self.edges[1..]) {
            acc += *c as f64;
            d = d.max((acc / total - cdf(*e)).abs());
        }
        d
    }
}

/// Spacings between consecutive unfolded levels that both lie in
/// `window`, rescaled to unit mean and histogrammed as a density.
pub fn spacing_distribution(
    ens: &SpectraEnsemble,
    map: &UnfoldingMap,
    window: (f64, f64),
    edges: &[f64],
) -> Result<SpacingHistogram> {
    nonempty(ens)?;
    check_edges(edges)?;
    let nf = ens.n() as f64;
    if !(window.0 >= 0.0 && window.1 <= nf && window.0 < window.1) {
        return Err(Error::invalid(format!("spacing window {window:?} not inside [0, {nf}]")));
    }
    let levels = unfold_ensemble(ens, map)?;
    let mut raw = Vec::new();
    for lv in &levels {
        for w in lv.windows(2) {
            if w[0] >= window.0 && w[1] <= window.1 {
                raw.push(w[1] - w[0]);
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::Domain(format!("no level pairs inside window {window:?}")));
    }
    let raw_mean = raw.iter().sum::<f64>() / raw.len() as f64;
    if !(raw_mean > 0.0) {
        return Err(Error::Domain("all spacings vanish".into()));
    }
    let spacings: Vec<f64> = raw.iter().map(|s| s / raw_mean).collect();
    let mut counts = vec![0u64; edges.len() - 1];
    for &s in &spacings {
        if let Some(b) = bin_index(edges, s) {
            counts[b] += 1;
        }
    }
    let est = density_estimate(Coordinate::Spacing, edges, counts, spacings.len() as f64, ens.len());
    Ok(SpacingHistogram {
        edges: est.edges,
        density: est.values,
        errors: est.errors,
        counts: est.counts,
        window,
        raw_mean,
        spacings,
    })
}

/// Kolmogorov–Smirnov sup distance between the empirical CDF of `samples`
/// and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("KS distance needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("KS distance samples contain NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}
