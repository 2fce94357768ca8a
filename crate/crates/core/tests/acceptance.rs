//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use chaos_entanglement::pipeline::{
    analyze, entropy_series, rmt_sample, run_analyze, run_entropy, run_rmt_sample, run_simulate, simulate, Analysis,
    AnalyzeOptions, AnalysisTable,
};
use chaos_entanglement::schmidt::schmidt_weights_of_matrix;
use chaos_entanglement::stats::uniform_edges;
use chaos_entanglement::{
    build_coherent_product, detect_saturation, estimate_r1, schmidt_decompose, spacing_distribution,
    wigner_surmise_gue_cdf, BurnIn, CoherentStateSpec, FloquetPropagator, InitialCondition, LaguerreKernel,
    LatticeConfig, RunConfig, SpectraEnsemble, SystemParams, UnfoldingMap,
};
use common::{density_integral, entropy_of_scaled};
use num_complex::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn criterion_1() -> Outcome {
    let k1 = LaguerreKernel::new(1).unwrap();
    let k2 = LaguerreKernel::new(2).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let e = 0.1 * i as f64;
        worst = worst.max((k1.one_level_density(e).unwrap() - (-e).exp()).abs());
        let s2 = (-e).exp() * (1.0 + (1.0 - e) * (1.0 - e));
        worst = worst.max((k2.one_level_density(e).unwrap() - s2).abs());
    }
    check(worst < 1e-8, format!("closed-form density error {worst:e}"))?;
    let mut worst_int: f64 = 0.0;
    for n in [1usize, 2, 8, 32, 128] {
        let k = LaguerreKernel::new(n).unwrap();
        let upper = 4.0 * n as f64 + 40.0 * (n as f64).cbrt() + 60.0;
        let total = density_integral(&k, 0.0, upper, 40_000);
        let map = UnfoldingMap::new(k);
        let tabulated = map.unfold(map.eps_max()).unwrap();
        let err = (total - n as f64).abs().max((tabulated - n as f64).abs());
        check(err < 1e-8, format!("∫σ_{n} off by {err:e}"))?;
        worst_int = worst_int.max(err);
    }
    Ok(format!("density error {worst:.1e}, normalization error {worst_int:.1e}"))
}

fn r1_counts_within(ens: &SpectraEnsemble, kernel: &LaguerreKernel, edges: &[f64]) -> Result<(usize, f64), String> {
    let est = estimate_r1(ens, edges).map_err(|e| e.to_string())?;
    let m = ens.len() as f64;
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    for (b, w) in edges.windows(2).enumerate() {
        let expected = m * density_integral(kernel, w[0], w[1], 400);
        if expected < 50.0 {
            continue;
        }
        tested += 1;
        let z = (est.counts[b] as f64 - expected) / expected.sqrt();
        worst = worst.max(z.abs());
        check(
            z.abs() <= 3.0,
            format!("R1 bin [{:.2}, {:.2}]: {} counts vs {expected:.1} expected (z = {z:.2})", w[0], w[1], est.counts[b]),
        )?;
    }
    Ok((tested, worst))
}

fn cluster_within(table: &AnalysisTable, lo: f64, hi: f64, tol: f64) -> Result<(usize, f64), String> {
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    for r in &table.rows {
        if r[0] < lo || r[0] > hi {
            continue;
        }
        tested += 1;
        let z = (r[1] - r[3]) / r[2];
        worst = worst.max(z.abs());
        check(
            z.abs() <= tol,
            format!("T̄₂ at ω = {:.2}: {:.4} ± {:.4} vs {:.4} (z = {z:.2})", r[0], r[1], r[2], r[3]),
        )?;
    }
    Ok((tested, worst))
}

fn criterion_2() -> Outcome {
    let n = 32;
    let ens = rmt_sample(n, 10_000, false, 20_061).map_err(|e| e.to_string())?;
    let kernel = LaguerreKernel::new(n).unwrap();
    let (r1_bins, r1_worst) = r1_counts_within(&ens, &kernel, &uniform_edges(0.0, 160.0, 80))?;
    let table = analyze(&ens, Analysis::ClusterBulk, &AnalyzeOptions::default()).map_err(|e| e.to_string())?;
    let (t_bins, t_worst) = cluster_within(&table, 0.25, 4.0, 3.0)?;
    Ok(format!(
        "R1: {r1_bins} bins, max |z| {r1_worst:.2}; bulk T̄₂: {t_bins} bins, max |z| {t_worst:.2}"
    ))
}

fn local_unitary(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    // diag(phases) · DFT · diag(phases)
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let norm = 1.0 / (n as f64).sqrt();
    let mut u = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let ph = a[i] + b[j] - 2.0 * PI * (i * j) as f64 / n as f64;
            u[i * n + j] = Complex64::from_polar(norm, ph);
        }
    }
    u
}

fn matmul(n: usize, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let xik = x[i * n + k];
            for j in 0..n {
                out[i * n + j] += xik * y[k * n + j];
            }
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let n = 64;
    let lattice = LatticeConfig::new(n).unwrap();
    let start = |lattice: &LatticeConfig| {
        let s = CoherentStateSpec::minimal(PI / 2.0, PI / 4.0, lattice);
        build_coherent_product(&s, &s, lattice).unwrap()
    };

    let mut psi = start(&lattice);
    let mut prop = FloquetPropagator::new(lattice, SystemParams::STRONG_CHAOS).unwrap();
    let mut drift: f64 = 0.0;
    prop.evolve(&mut psi, 1000, |_, s| {
        drift = drift.max((s.norm() - 1.0).abs());
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    check(drift < 1e-10, format!("norm drift {drift:e} over 1000 steps"))?;

    let separable = SystemParams::new(3.0, 2.5, 0.0).unwrap();
    let mut psi0 = start(&lattice);
    let mut prop0 = FloquetPropagator::new(lattice, separable).unwrap();
    let mut s_max: f64 = 0.0;
    prop0
        .evolve(&mut psi0, 1000, |_, s| {
            s_max = s_max.max(schmidt_decompose(s)?.entropy());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    check(s_max < 1e-10, format!("entropy {s_max:e} without coupling"))?;

    let mut rng = chaos_entanglement::stream_rng(7, 0);
    let mut lu_worst: f64 = 0.0;
    for _ in 0..3 {
        let u1 = local_unitary(n, &mut rng);
        let u2 = local_unitary(n, &mut rng);
        let u2t: Vec<Complex64> = (0..n * n).map(|k| u2[(k % n) * n + k / n]).collect();
        let m = psi.amplitudes();
        let rotated = matmul(n, &matmul(n, &u1, m), &u2t);
        let before = schmidt_decompose(&psi).map_err(|e| e.to_string())?;
        let after = schmidt_weights_of_matrix(n, &rotated).map_err(|e| e.to_string())?;
        for (x, y) in before.weights().iter().zip(after.weights()) {
            lu_worst = lu_worst.max((x - y).abs());
        }
    }
    check(lu_worst < 1e-10, format!("local-unitary change of Schmidt weights {lu_worst:e}"))?;
    Ok(format!(
        "norm drift {drift:.1e}, uncoupled entropy {s_max:.1e}, local-unitary deviation {lu_worst:.1e}"
    ))
}

fn criterion_4() -> Outcome {
    let cfg = RunConfig::default();
    let records = entropy_series(&cfg, 1000).map_err(|e| e.to_string())?;
    let s: Vec<f64> = records.iter().map(|r| r.entropy).collect();
    let plateau = s[500..=1000].iter().sum::<f64>() / 501.0;

    let smooth: Vec<f64> = (0..s.len())
        .map(|t| {
            let lo = t.saturating_sub(9);
            s[lo..=t].iter().sum::<f64>() / (t + 1 - lo) as f64
        })
        .collect();
    let rise_end = smooth
        .iter()
        .position(|&v| v >= 0.9 * plateau)
        .ok_or_else(|| "smoothed entropy never reaches 90% of the plateau".to_string())?;
    for t in 1..=rise_end {
        check(
            smooth[t] >= smooth[t - 1],
            format!("smoothed entropy decreases at step {t} before reaching the plateau"),
        )?;
    }
    let sat = detect_saturation(&s, 50, 1e-3)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| "no saturation detected".to_string())?;
    check(sat <= 500, format!("saturation only detected at step {sat}"))?;

    let n = cfg.n;
    let lue = rmt_sample(n, 4000, true, 4).map_err(|e| e.to_string())?;
    let lue_mean = lue.spectra().iter().map(|e| entropy_of_scaled(e, n)).sum::<f64>() / lue.len() as f64;
    let rel = (plateau - lue_mean).abs() / lue_mean;
    check(rel < 0.05, format!("plateau {plateau:.4} vs LUE {lue_mean:.4} ({:.2}%)", 100.0 * rel))?;
    Ok(format!(
        "rise to 90% by step {rise_end}, saturation at step {sat}, plateau {plateau:.4} vs LUE {lue_mean:.4} ({:.2}%)",
        100.0 * rel
    ))
}

struct ChaosEnsembles {
    strong: SpectraEnsemble,
    weak: SpectraEnsemble,
}

fn chaos_config(params: SystemParams) -> RunConfig {
    RunConfig {
        params,
        initial: InitialCondition::Random,
        trajectories: 40,
        count: 2000,
        seed: 2006,
        ..RunConfig::default()
    }
}

fn chaos_ensembles() -> Result<ChaosEnsembles, String> {
    let run = |p| simulate(&chaos_config(p)).map(|s| s.ensemble).map_err(|e| e.to_string());
    Ok(ChaosEnsembles {
        strong: run(SystemParams::STRONG_CHAOS)?,
        weak: run(SystemParams::WEAK_CHAOS)?,
    })
}

fn criterion_5(ens: &ChaosEnsembles) -> Outcome {
    let opts = AnalyzeOptions::default();
    let table = analyze(&ens.strong, Analysis::Spacing, &opts).map_err(|e| e.to_string())?;
    let ks: f64 = table.header_value("ks_distance").unwrap().parse().unwrap();
    check(ks < 0.05, format!("strong-chaos KS distance {ks:.4}"))?;

    let window = (opts.cluster.bulk_margin, 64.0 - opts.cluster.bulk_margin);
    let edges = uniform_edges(0.0, 5.0, 50);
    let below = |e: &SpectraEnsemble| -> Result<f64, String> {
        let map = UnfoldingMap::new(LaguerreKernel::new(e.n()).unwrap());
        let h = spacing_distribution(e, &map, window, &edges).map_err(|e| e.to_string())?;
        Ok(h.fraction_below(0.5))
    };
    let strong = below(&ens.strong)?;
    let weak = below(&ens.weak)?;
    check(weak > strong, format!("mass below 0.5: weak {weak:.4} vs strong {strong:.4}"))?;
    // the test statistic itself against the surmise, recomputed here
    let check_ks = {
        let map = UnfoldingMap::new(LaguerreKernel::new(64).unwrap());
        let h = spacing_distribution(&ens.strong, &map, window, &edges).map_err(|e| e.to_string())?;
        let mut sorted = h.spacings.clone();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = wigner_surmise_gue_cdf(x);
                (c - i as f64 / m).abs().max(((i + 1) as f64 / m - c).abs())
            })
            .fold(0.0f64, f64::max)
    };
    check((check_ks - ks).abs() < 1e-12, format!("KS mismatch {check_ks} vs {ks}"))?;
    Ok(format!("KS {ks:.4}; mass below 0.5: strong {strong:.4}, weak {weak:.4}"))
}

fn criterion_6(ens: &ChaosEnsembles) -> Outcome {
    let opts = AnalyzeOptions {
        omega_max: 10.0,
        ..AnalyzeOptions::default()
    };
    let strong = analyze(&ens.strong, Analysis::ClusterBulk, &opts).map_err(|e| e.to_string())?;
    let (bins, worst) = cluster_within(&strong, 0.25, 4.0, 4.0)?;
    let negative = |t: &AnalysisTable| -> Vec<f64> { t.rows.iter().filter(|r| r[1] + 3.0 * r[2] < 0.0).map(|r| r[0]).collect() };
    let weak = analyze(&ens.weak, Analysis::ClusterBulk, &opts).map_err(|e| e.to_string())?;
    let weak_neg = negative(&weak);
    check(
        !weak_neg.is_empty(),
        "weak-chaos bulk T̄₂ has no bin below zero by 3 standard errors".to_string(),
    )?;
    let strong_neg = negative(&strong).len();
    Ok(format!(
        "strong: {bins} bins, max |z| {worst:.2}; weak: {} bins significantly negative (first at ω = {:.2}); strong control: {strong_neg}",
        weak_neg.len(),
        weak_neg[0]
    ))
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    let sim_cfg = |tag: &str| RunConfig {
        n: 32,
        initial: InitialCondition::Random,
        trajectories: 3,
        count: 40,
        burn_in: BurnIn::Auto,
        stride: 3,
        seed: 99,
        out: Some(dir.path().join(format!("sim{tag}.txt"))),
        entropy_out: Some(dir.path().join(format!("sim{tag}.entropy.tsv"))),
        ..RunConfig::default()
    };
    for tag in ["a", "b"] {
        run_simulate(&sim_cfg(tag)).map_err(|e| e.to_string())?;
        run_rmt_sample(32, 200, true, 5, &dir.path().join(format!("lue{tag}.txt"))).map_err(|e| e.to_string())?;
        run_entropy(&sim_cfg(tag), 60, &dir.path().join(format!("entropy{tag}.tsv"))).map_err(|e| e.to_string())?;
        for a in [Analysis::R1, Analysis::ClusterHard, Analysis::Spacing] {
            run_analyze(
                &dir.path().join(format!("lue{tag}.txt")),
                a,
                &AnalyzeOptions::default(),
                &dir.path().join(format!("{a}{tag}.tsv")),
            )
            .map_err(|e| e.to_string())?;
        }
    }
    let mut files = vec!["sim{}.txt", "sim{}.entropy.tsv", "lue{}.txt", "entropy{}.tsv"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    files.extend(["r1", "cluster-hard", "spacing"].iter().map(|a| format!("{a}{{}}.tsv")));
    for f in &files {
        let a = read(&f.replace("{}", "a"));
        let b = read(&f.replace("{}", "b"));
        check(!a.is_empty() && a == b, format!("{} differs between runs", f.replace("{}", "")))?;
    }
    Ok(format!("{} output files byte-identical across two runs", files.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} [{title}]: PASS ({detail}; {secs:.1} s)"),
            Err(why) => {
                failed += 1;
                println!("criterion {id} [{title}]: FAIL ({why}; {secs:.1} s)");
            }
        }
    };
    report(1, "analytic closed forms", &mut criterion_1);
    report(2, "LUE sampler vs analytic kernel", &mut criterion_2);
    report(3, "dynamics invariants", &mut criterion_3);
    report(4, "entropy growth and saturation", &mut criterion_4);
    let t = Instant::now();
    let ensembles = chaos_ensembles();
    println!("(strong and weak chaos ensembles built in {:.1} s)", t.elapsed().as_secs_f64());
    match &ensembles {
        Ok(ens) => {
            report(5, "bulk spacing distribution", &mut || criterion_5(ens));
            report(6, "bulk cluster function", &mut || criterion_6(ens));
        }
        Err(e) => {
            for (id, title) in [(5, "bulk spacing distribution"), (6, "bulk cluster function")] {
                report(id, title, &mut || Err(format!("ensemble generation failed: {e}")));
            }
        }
    }
    report(7, "determinism", &mut criterion_7);
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
