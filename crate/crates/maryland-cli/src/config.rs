//! Experiment configuration: a flat dotted key-value file plus command-line
//! overrides, resolved into concrete model parameters.
//!
//! ```text
//! model.lambda = 1.5
//! model.alpha = golden            # or a decimal in (0,1), or coeffs:1,50,100,1
//! model.theta = 0.2
//! model.energy = 0.0
//! model.energy_grid = -3:3:21
//! run.k = 10000
//! run.epsilon = auto              # auto → L(E)/601
//! output.dir = out
//! ```

use maryland::cocycle::lyapunov_closed_form;
use maryland::torus::{expand_cf, frequency_from_coeffs, Frequency};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// How the frequency was specified.
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaSpec {
    Named(String),
    Decimal(f64),
    Coeffs(Vec<u64>),
}

impl AlphaSpec {
    pub fn parse(s: &str) -> ConfigResult<Self> {
        let s = s.trim();
        if let Some(list) = s.strip_prefix("coeffs:") {
            let coeffs: Result<Vec<u64>, _> =
                list.split(',').map(|t| t.trim().parse::<u64>()).collect();
            return match coeffs {
                Ok(c) if !c.is_empty() => Ok(AlphaSpec::Coeffs(c)),
                _ => Err(ConfigError(format!("bad coefficient list '{list}'"))),
            };
        }
        if let Ok(x) = s.parse::<f64>() {
            return Ok(AlphaSpec::Decimal(x));
        }
        match s {
            "golden" | "sqrt2m1" => Ok(AlphaSpec::Named(s.to_string())),
            other => Err(ConfigError(format!(
                "unknown frequency '{other}' (expected golden, sqrt2m1, a decimal, or coeffs:…)"
            ))),
        }
    }

    pub fn resolve(&self) -> ConfigResult<Frequency> {
        let freq = match self {
            AlphaSpec::Named(name) => match name.as_str() {
                "golden" => Frequency::golden(),
                "sqrt2m1" => Frequency::sqrt2_minus_1(),
                other => return Err(ConfigError(format!("unknown frequency name '{other}'"))),
            },
            AlphaSpec::Decimal(x) => expand_cf(*x, 1_000_000_000_000)
                .map_err(|e| ConfigError(format!("frequency {x}: {e}")))?,
            AlphaSpec::Coeffs(c) => frequency_from_coeffs(c)
                .map_err(|e| ConfigError(format!("frequency coefficients: {e}")))?,
        };
        if freq.convergents().len() < 8 {
            return Err(ConfigError(format!(
                "frequency resolves to only {} convergents (need ≥ 8); supply more precision",
                freq.convergents().len()
            )));
        }
        Ok(freq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a run needs, before frequency resolution.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub lambda: f64,
    pub alpha: AlphaSpec,
    pub theta: f64,
    pub energy: f64,
    pub energy_window: (f64, f64),
    pub energy_grid: (f64, f64, usize),
    pub lambda_list: Vec<f64>,
    pub k: usize,
    pub k_list: Vec<i64>,
    pub n_box: usize,
    pub grid: usize,
    pub theta_grid: usize,
    pub birkhoff_grid: usize,
    pub epsilon: Option<f64>,
    pub k_range: (i64, i64),
    pub which_eigenvalue: usize,
    pub x1: i64,
    pub x2: i64,
    pub format: OutputFormat,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lambda: 1.5,
            alpha: AlphaSpec::Named("golden".into()),
            theta: 0.2,
            energy: 0.0,
            energy_window: (-0.05, 0.05),
            energy_grid: (-3.0, 3.0, 21),
            lambda_list: vec![0.5, 1.5, 3.0],
            k: 10_000,
            k_list: vec![25, 50, 100, 200, 400],
            n_box: 2000,
            grid: 4096,
            theta_grid: 4096,
            birkhoff_grid: 64,
            epsilon: None,
            k_range: (30, 400),
            which_eigenvalue: 0,
            x1: 0,
            x2: 50,
            format: OutputFormat::Csv,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_pair(s: &str, sep: char) -> Option<(f64, f64)> {
    let mut it = s.split(sep);
    let a = it.next()?.trim().parse().ok()?;
    let b = it.next()?.trim().parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

fn parse_range(s: &str) -> Option<(i64, i64)> {
    let mut it = s.split(':');
    let a = it.next()?.trim().parse().ok()?;
    let b = it.next()?.trim().parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

fn parse_grid(s: &str) -> Option<(f64, f64, usize)> {
    let mut it = s.split(':');
    let a = it.next()?.trim().parse().ok()?;
    let b = it.next()?.trim().parse().ok()?;
    let n = it.next()?.trim().parse().ok()?;
    if it.next().is_some() || n == 0 {
        return None;
    }
    Some((a, b, n))
}

impl ExperimentConfig {
    /// Parse a config file with line-precise error messages; keys not
    /// recognized are rejected so typos never pass silently.
    pub fn from_file(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("{}:{line_no}: expected 'key = value'", path.display()))
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|e| ConfigError(format!("{}:{line_no}: {e}", path.display())))?;
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, key: &str, value: &str) -> ConfigResult<()> {
        let bad = |what: &str| ConfigError(format!("bad {what} '{value}'"));
        match key {
            "model.lambda" => self.lambda = value.parse().map_err(|_| bad("coupling"))?,
            "model.alpha" => self.alpha = AlphaSpec::parse(value)?,
            "model.theta" => self.theta = value.parse().map_err(|_| bad("phase"))?,
            "model.energy" => self.energy = value.parse().map_err(|_| bad("energy"))?,
            "model.energy_window" => {
                self.energy_window = parse_pair(value, ',').ok_or_else(|| bad("energy window"))?
            }
            "model.energy_grid" => {
                self.energy_grid = parse_grid(value).ok_or_else(|| bad("energy grid"))?
            }
            "model.lambda_list" => {
                let list: Result<Vec<f64>, _> =
                    value.split(',').map(|t| t.trim().parse()).collect();
                self.lambda_list = list.map_err(|_| bad("coupling list"))?;
            }
            "run.k" => self.k = value.parse().map_err(|_| bad("k"))?,
            "run.k_list" => {
                let list: Result<Vec<i64>, _> =
                    value.split(',').map(|t| t.trim().parse()).collect();
                self.k_list = list.map_err(|_| bad("k list"))?;
            }
            "run.n_box" => self.n_box = value.parse().map_err(|_| bad("box size"))?,
            "run.grid" => self.grid = value.parse().map_err(|_| bad("grid"))?,
            "run.theta_grid" => self.theta_grid = value.parse().map_err(|_| bad("theta grid"))?,
            "run.birkhoff_grid" => {
                self.birkhoff_grid = value.parse().map_err(|_| bad("birkhoff grid"))?
            }
            "run.epsilon" => {
                self.epsilon = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("epsilon"))?)
                }
            }
            "run.k_range" => self.k_range = parse_range(value).ok_or_else(|| bad("k range"))?,
            "run.which_eigenvalue" => {
                self.which_eigenvalue = value.parse().map_err(|_| bad("eigenvalue index"))?
            }
            "run.x1" => self.x1 = value.parse().map_err(|_| bad("x1"))?,
            "run.x2" => self.x2 = value.parse().map_err(|_| bad("x2"))?,
            "output.format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad("output format (csv|json)")),
                }
            }
            "output.dir" => self.out_dir = PathBuf::from(value),
            other => return Err(ConfigError(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// ε to use at a given parameter point: the override if present, else
    /// L(E)/601 (strictly inside the admissible range (0, L/600)).
    pub fn epsilon_at(&self, energy: f64, lambda: f64) -> ConfigResult<f64> {
        let l = lyapunov_closed_form(energy, lambda).value;
        match self.epsilon {
            None => Ok(l / 601.0),
            Some(e) => {
                if e > 0.0 && e < l / 600.0 {
                    Ok(e)
                } else {
                    Err(ConfigError(format!(
                        "epsilon {e} outside (0, L/600) = (0, {:.6e}) at E = {energy}, λ = {lambda}",
                        l / 600.0
                    )))
                }
            }
        }
    }
}
