//! Run configuration: a flat `key = value` file overridden by command-line flags.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use chronos_core::oracle::{SuiteConfig, DEFAULT_EPSILONS};
use chronos_core::{
    gaussian_state, make_grid, GaussianStateSpec, Interval, MomentumGrid, TimeGrid, TimeQuadrature, WaveFunction,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// A `#`-prefixed JSON header line followed by one CSV row per matrix row.
    Csv,
    /// One JSON object holding the header fields and the flattened entries.
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub n: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub m: usize,
    pub p0: f64,
    pub sigma_p: f64,
    pub x0: f64,
    pub a: f64,
    pub b: f64,
    pub k: i64,
    pub k_min: i64,
    pub k_max: i64,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: [f64; 2],
    pub quadrature: TimeQuadrature,
    pub format: MatrixFormat,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p_min: 0.5,
            p_max: 12.0,
            n: 2048,
            t_min: -6.0,
            t_max: 2.0,
            m: 4096,
            p0: 4.0,
            sigma_p: 0.25,
            x0: -8.0,
            a: -3.0,
            b: -1.0,
            k: 512,
            k_min: -64,
            k_max: 64,
            trials: 100,
            seed: 7,
            epsilon: DEFAULT_EPSILONS,
            quadrature: TimeQuadrature::PhaseResolved,
            format: MatrixFormat::Csv,
            out_dir: PathBuf::from("."),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Validation(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "p_min" => self.p_min = parse(&key, value)?,
            "p_max" => self.p_max = parse(&key, value)?,
            "n" => self.n = parse(&key, value)?,
            "t_min" => self.t_min = parse(&key, value)?,
            "t_max" => self.t_max = parse(&key, value)?,
            "m" => self.m = parse(&key, value)?,
            "p0" => self.p0 = parse(&key, value)?,
            "sigma_p" => self.sigma_p = parse(&key, value)?,
            "x0" => self.x0 = parse(&key, value)?,
            "a" => self.a = parse(&key, value)?,
            "b" => self.b = parse(&key, value)?,
            "k" => self.k = parse(&key, value)?,
            "k_min" => self.k_min = parse(&key, value)?,
            "k_max" => self.k_max = parse(&key, value)?,
            "trials" => self.trials = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "epsilon" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                let [e1, e2] = parts.as_slice() else {
                    return Err(CliError::Validation(format!("epsilon needs two comma-separated values, got {value:?}")));
                };
                self.epsilon = [parse(&key, e1)?, parse(&key, e2)?];
            }
            "quadrature" => {
                self.quadrature = match value {
                    "phase" => TimeQuadrature::PhaseResolved,
                    "exact" => TimeQuadrature::Exact,
                    nodes => TimeQuadrature::Trapezoid(parse(&key, nodes).map_err(|_| {
                        CliError::Validation(format!("quadrature must be phase, exact or a node count, got {value:?}"))
                    })?),
                }
            }
            "format" => {
                self.format = match value {
                    "csv" => MatrixFormat::Csv,
                    "json" => MatrixFormat::Json,
                    _ => return Err(CliError::Validation(format!("format must be csv or json, got {value:?}"))),
                }
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(CliError::Validation(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_str(text: &str) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Validation(format!("line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim().replace('-', "_");
            if !seen.insert(key.clone()) {
                return Err(CliError::Validation(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
            cfg.set(&key, value)
                .map_err(|e| CliError::Validation(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(CliError::io("read config", path))?;
        Self::parse_str(&text)
    }

    pub fn grid(&self) -> CliResult<Arc<MomentumGrid>> {
        Ok(make_grid(self.p_min, self.p_max, self.n)?)
    }

    pub fn time_grid(&self) -> CliResult<Arc<TimeGrid>> {
        Ok(TimeGrid::new(self.t_min, self.t_max, self.m)?)
    }

    pub fn state_spec(&self) -> CliResult<GaussianStateSpec> {
        Ok(GaussianStateSpec::new(self.p0, self.sigma_p, self.x0)?)
    }

    pub fn state(&self, grid: &Arc<MomentumGrid>) -> CliResult<WaveFunction> {
        Ok(gaussian_state(&self.state_spec()?, grid)?)
    }

    pub fn interval(&self) -> CliResult<Interval> {
        Ok(Interval::new(self.a, self.b)?)
    }

    pub fn suite(&self) -> CliResult<SuiteConfig> {
        if self.trials == 0 {
            return Err(CliError::Validation("trials must be at least 1".into()));
        }
        Ok(SuiteConfig {
            p_min: self.p_min,
            p_max: self.p_max,
            n: self.n,
            t_min: self.t_min,
            t_max: self.t_max,
            m: self.m,
            state: self.state_spec()?,
            interval: self.interval()?,
            k: self.k,
            trials: self.trials,
            seed: self.seed,
            epsilons: self.epsilon,
            ..SuiteConfig::default()
        })
    }
}
