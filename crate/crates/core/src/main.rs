use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chaos_entanglement::pipeline::{self, Analysis, AnalyzeOptions};
use chaos_entanglement::{BurnIn, RunConfig, SystemParams};

#[derive(Parser)]
#[command(version, about = "Schmidt-spectrum statistics of coupled kicked rotors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    cpp: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `auto` or a number of steps.
    #[arg(long = "burn-in")]
    burn_in: Option<BurnIn>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long = "fixed-trace")]
    fixed_trace: bool,
}

impl Common {
    fn resolve(&self) -> chaos_entanglement::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        let SystemParams { k1, k2, cpp } = cfg.params;
        cfg.params = SystemParams {
            k1: self.k1.unwrap_or(k1),
            k2: self.k2.unwrap_or(k2),
            cpp: self.cpp.unwrap_or(cpp),
        };
        if let Some(c) = self.count {
            cfg.count = c;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(b) = self.burn_in {
            cfg.burn_in = b;
        }
        if let Some(s) = self.stride {
            cfg.stride = s;
        }
        cfg.fixed_trace |= self.fixed_trace;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the kicked pair and collect Schmidt spectra.
    Simulate(Common),
    /// Sample Laguerre-ensemble spectra.
    RmtSample(Common),
    /// Tabulate an ensemble against its analytic reference.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        analysis: Analysis,
    },
    /// Entropy and leading Schmidt weights per step.
    Entropy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn run(cli: Cli) -> chaos_entanglement::Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = common.resolve()?;
            pipeline::run_simulate(&cfg)?;
        }
        Command::RmtSample(common) => {
            let cfg = common.resolve()?;
            let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("lue.txt"));
            pipeline::run_rmt_sample(cfg.n, cfg.count, cfg.fixed_trace, cfg.seed, &out)?;
        }
        Command::Analyze { common, input, analysis } => {
            let opts = AnalyzeOptions {
                n: common.n,
                ..AnalyzeOptions::default()
            };
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from(format!("{analysis}.tsv")));
            pipeline::run_analyze(&input, analysis, &opts, &out)?;
        }
        Command::Entropy { common, steps } => {
            let cfg = common.resolve()?;
            let steps = steps.unwrap_or(cfg.steps);
            let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("entropy.tsv"));
            pipeline::run_entropy(&cfg, steps, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
