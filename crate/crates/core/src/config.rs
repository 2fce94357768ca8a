//! Run configuration: `key = value` lines, `#` comments, unknown keys rejected.
//!
//! ```text
//! # strong chaos, desk scale
//! N = 64
//! k1 = 3.0
//! k2 = 2.5
//! cpp = 0.05
//! initial = fixed
//! x0 = 1.5707963267948966
//! p0 = 0.7853981633974483
//! burn_in = auto
//! stride = 10
//! count = 2000
//! seed = 1
//! out = strong.txt
//! ```

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::{LatticeConfig, SystemParams};
use crate::ensemble::{BurnIn, InitialCondition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub params: SystemParams,
    pub initial: InitialCondition,
    /// Coherent-state width; `None` selects `sqrt(ħ/2)`.
    pub sigma: Option<f64>,
    pub trajectories: usize,
    pub burn_in: BurnIn,
    pub stride: usize,
    pub count: usize,
    pub seed: u64,
    /// Used by the matrix sampler only.
    pub fixed_trace: bool,
    /// Length of the entropy time series.
    pub steps: usize,
    pub out: Option<PathBuf>,
    pub entropy_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 64,
            params: SystemParams::STRONG_CHAOS,
            initial: InitialCondition::Fixed {
                x0: PI / 2.0,
                p0: PI / 4.0,
            },
            sigma: None,
            trajectories: 1,
            burn_in: BurnIn::Auto,
            stride: 10,
            count: 2000,
            seed: 0,
            fixed_trace: false,
            steps: 1000,
            out: None,
            entropy_out: None,
        }
    }
}

impl RunConfig {
    pub fn lattice(&self) -> Result<LatticeConfig> {
        LatticeConfig::new(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice()?;
        self.params.validate()?;
        if self.stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        if self.count == 0 {
            return Err(Error::invalid("count must be at least 1"));
        }
        if self.trajectories == 0 {
            return Err(Error::invalid("trajectories must be at least 1"));
        }
        if self.trajectories > self.count {
            return Err(Error::invalid("more trajectories than spectra requested"));
        }
        if matches!(self.initial, InitialCondition::Fixed { .. }) && self.trajectories > 1 {
            return Err(Error::invalid(
                "a fixed initial condition with several trajectories would repeat one trajectory",
            ));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::invalid(format!("sigma must be positive, got {s}")));
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses a configuration on top of the defaults.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut x0 = PI / 2.0;
        let mut p0 = PI / 4.0;
        let mut random = false;
        for (idx, raw) in text.lines().enumerate() {
            let err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: idx + 1,
                msg,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
                v.parse().map_err(|_| format!("cannot parse `{v}`"))
            }
            let r: std::result::Result<(), String> = (|| {
                match key {
                    "N" => cfg.n = num(value)?,
                    "k1" => cfg.params.k1 = num(value)?,
                    "k2" => cfg.params.k2 = num(value)?,
                    "cpp" => cfg.params.cpp = num(value)?,
                    "sigma" => cfg.sigma = Some(num(value)?),
                    "initial" => {
                        random = match value {
                            "fixed" => false,
                            "random" => true,
                            other => return Err(format!("initial must be `fixed` or `random`, got `{other}`")),
                        }
                    }
                    "x0" => x0 = num(value)?,
                    "p0" => p0 = num(value)?,
                    "trajectories" => cfg.trajectories = num(value)?,
                    "burn_in" => cfg.burn_in = value.parse()?,
                    "stride" => cfg.stride = num(value)?,
                    "count" => cfg.count = num(value)?,
                    "seed" => cfg.seed = num(value)?,
                    "fixed_trace" => cfg.fixed_trace = num(value)?,
                    "steps" => cfg.steps = num(value)?,
                    "out" => cfg.out = Some(PathBuf::from(value)),
                    "entropy_out" => cfg.entropy_out = Some(PathBuf::from(value)),
                    other => return Err(format!("unknown key `{other}`")),
                }
                Ok(())
            })();
            r.map_err(err)?;
        }
        cfg.initial = if random {
            InitialCondition::Random
        } else {
            InitialCondition::Fixed { x0, p0 }
        };
        Ok(cfg)
    }
}
