//! Collections of scaled Schmidt spectra and their text file format.
//!
//! ```text
//! # format_version=1
//! # N=4
//! # source=lue-sampler
//! # k1=none
//! # ...
//! 7.93e0 5.1e0 2.6e0 3.7e-1
//! ```
//!
//! Header lines start with `#` and carry one `key=value` each. Every
//! following line is one spectrum of `N` values, descending, written in
//! shortest round-trip scientific notation.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Simulation,
    LueSampler,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Simulation => "simulation",
            Source::LueSampler => "lue-sampler",
        })
    }
}

impl FromStr for Source {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "simulation" => Ok(Source::Simulation),
            "lue-sampler" => Ok(Source::LueSampler),
            other => Err(format!("unknown source `{other}`")),
        }
    }
}

/// Number of periods evolved before collection starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BurnIn {
    /// Run until the entropy saturates, plus a guard interval.
    #[default]
    Auto,
    Steps(usize),
}

impl fmt::Display for BurnIn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BurnIn::Auto => f.write_str("auto"),
            BurnIn::Steps(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for BurnIn {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(BurnIn::Auto);
        }
        s.parse()
            .map(BurnIn::Steps)
            .map_err(|_| format!("burn-in must be `auto` or a non-negative integer, got `{s}`"))
    }
}

/// How initial states are chosen for each trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialCondition {
    /// Both degrees of freedom start at `(x0, p0)`.
    Fixed { x0: f64, p0: f64 },
    /// Centres drawn uniformly from the phase-space torus per trajectory.
    #[default]
    Random,
}

impl InitialCondition {
    pub fn label(&self) -> &'static str {
        match self {
            InitialCondition::Fixed { .. } => "fixed",
            InitialCondition::Random => "random",
        }
    }
}

/// Provenance carried in the ensemble header.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMetadata {
    pub source: Source,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub cpp: Option<f64>,
    pub sigma: Option<f64>,
    pub burn_in: Option<BurnIn>,
    pub stride: Option<usize>,
    pub seed: u64,
    pub fixed_trace: bool,
    /// `fixed` or `random` for simulated ensembles.
    pub initial: Option<String>,
    pub trajectories: Option<usize>,
}

impl EnsembleMetadata {
    pub fn sampler(seed: u64, fixed_trace: bool) -> Self {
        Self {
            source: Source::LueSampler,
            k1: None,
            k2: None,
            cpp: None,
            sigma: None,
            burn_in: None,
            stride: None,
            seed,
            fixed_trace,
            initial: None,
            trajectories: None,
        }
    }
}

/// Scaled spectra `ε` sharing one dimension `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraEnsemble {
    n: usize,
    spectra: Vec<Vec<f64>>,
    pub metadata: EnsembleMetadata,
}

impl SpectraEnsemble {
    pub fn new(n: usize, metadata: EnsembleMetadata) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ensemble dimension must be at least 1"));
        }
        Ok(Self {
            n,
            spectra: Vec::new(),
            metadata,
        })
    }

    pub fn from_spectra(n: usize, metadata: EnsembleMetadata, spectra: Vec<Vec<f64>>) -> Result<Self> {
        let mut ens = Self::new(n, metadata)?;
        for s in spectra {
            ens.push(s)?;
        }
        Ok(ens)
    }

    fn check(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: s.len(),
            });
        }
        if s.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::invalid("spectrum values must be finite and non-negative"));
        }
        if s.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("spectrum must be sorted in descending order"));
        }
        if self.metadata.fixed_trace {
            let n2 = (self.n * self.n) as f64;
            let total: f64 = s.iter().sum();
            if (total - n2).abs() > 1e-6 * n2 {
                return Err(Error::invalid(format!("spectrum sums to {total}, expected N² = {n2}")));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, spectrum: Vec<f64>) -> Result<()> {
        self.check(&spectrum)?;
        self.spectra.push(spectrum);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn spectra(&self) -> &[Vec<f64>] {
        &self.spectra
    }

    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        let mut out = String::new();
        let _ = writeln!(out, "# format_version={FORMAT_VERSION}");
        let _ = writeln!(out, "# N={}", self.n);
        let _ = writeln!(out, "# source={}", m.source);
        let _ = writeln!(out, "# k1={}", opt(m.k1));
        let _ = writeln!(out, "# k2={}", opt(m.k2));
        let _ = writeln!(out, "# cpp={}", opt(m.cpp));
        let _ = writeln!(out, "# sigma={}", opt(m.sigma));
        let _ = writeln!(out, "# burn_in={}", m.burn_in.map_or_else(|| "none".into(), |b| b.to_string()));
        let _ = writeln!(out, "# stride={}", m.stride.map_or_else(|| "none".into(), |s| s.to_string()));
        let _ = writeln!(out, "# seed={}", m.seed);
        let _ = writeln!(out, "# count={}", self.spectra.len());
        let _ = writeln!(out, "# fixed_trace={}", m.fixed_trace);
        let _ = writeln!(out, "# initial={}", m.initial.as_deref().unwrap_or("none"));
        let _ = writeln!(
            out,
            "# trajectories={}",
            m.trajectories.map_or_else(|| "none".into(), |t| t.to_string())
        );
        for s in &self.spectra {
            let mut first = true;
            for e in s {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{e:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses the text format; `origin` only labels error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut header = Header::default();
        let mut body = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if !body.is_empty() {
                    return Err(err(lineno, "header line after spectra".into()));
                }
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| err(lineno, format!("expected key=value, got `{rest}`")))?;
                header.set(k.trim(), v.trim()).map_err(|m| err(lineno, m))?;
            } else {
                let values: std::result::Result<Vec<f64>, _> =
                    line.split_whitespace().map(str::parse::<f64>).collect();
                let values = values.map_err(|e| err(lineno, format!("bad number: {e}")))?;
                body.push((lineno, values));
            }
        }
        let meta = header.finish().map_err(|m| err(1, m))?;
        let (n, count, metadata) = meta;
        let mut ens = SpectraEnsemble::new(n, metadata).map_err(|e| err(1, e.to_string()))?;
        for (lineno, values) in body {
            ens.push(values).map_err(|e| err(lineno, e.to_string()))?;
        }
        if ens.len() != count {
            return Err(err(
                1,
                format!("header declares {count} spectra but {} were found", ens.len()),
            ));
        }
        Ok(ens)
    }
}

#[derive(Default)]
struct Header {
    version: Option<u32>,
    n: Option<usize>,
    source: Option<Source>,
    k1: Option<Option<f64>>,
    k2: Option<Option<f64>>,
    cpp: Option<Option<f64>>,
    sigma: Option<Option<f64>>,
    burn_in: Option<Option<BurnIn>>,
    stride: Option<Option<usize>>,
    seed: Option<u64>,
    count: Option<usize>,
    fixed_trace: Option<bool>,
    initial: Option<Option<String>>,
    trajectories: Option<Option<usize>>,
}

fn parse_opt<T: FromStr>(v: &str) -> std::result::Result<Option<T>, String>
where
    T::Err: fmt::Display,
{
    if v == "none" {
        return Ok(None);
    }
    v.parse().map(Some).map_err(|e: T::Err| format!("bad value `{v}`: {e}"))
}

fn parse_req<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e: T::Err| format!("bad value `{v}`: {e}"))
}

impl Header {
    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "format_version" => self.version = Some(parse_req(v)?),
            "N" => self.n = Some(parse_req(v)?),
            "source" => self.source = Some(parse_req(v)?),
            "k1" => self.k1 = Some(parse_opt(v)?),
            "k2" => self.k2 = Some(parse_opt(v)?),
            "cpp" => self.cpp = Some(parse_opt(v)?),
            "sigma" => self.sigma = Some(parse_opt(v)?),
            "burn_in" => self.burn_in = Some(parse_opt(v)?),
            "stride" => self.stride = Some(parse_opt(v)?),
            "seed" => self.seed = Some(parse_req(v)?),
            "count" => self.count = Some(parse_req(v)?),
            "fixed_trace" => self.fixed_trace = Some(parse_req(v)?),
            "initial" => self.initial = Some(parse_opt(v)?),
            "trajectories" => self.trajectories = Some(parse_opt(v)?),
            other => return Err(format!("unknown header key `{other}`")),
        }
        Ok(())
    }

    fn finish(self) -> std::result::Result<(usize, usize, EnsembleMetadata), String> {
        match self.version {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(format!("unsupported format_version {v}")),
            None => return Err("missing format_version".into()),
        }
        let n = self.n.ok_or("missing N")?;
        let count = self.count.ok_or("missing count")?;
        Ok((
            n,
            count,
            EnsembleMetadata {
                source: self.source.ok_or("missing source")?,
                k1: self.k1.flatten(),
                k2: self.k2.flatten(),
                cpp: self.cpp.flatten(),
                sigma: self.sigma.flatten(),
                burn_in: self.burn_in.flatten(),
                stride: self.stride.flatten(),
                seed: self.seed.ok_or("missing seed")?,
                fixed_trace: self.fixed_trace.ok_or("missing fixed_trace")?,
                initial: self.initial.flatten(),
                trajectories: self.trajectories.flatten(),
            },
        ))
    }
}
