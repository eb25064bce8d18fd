//! Line-oriented `key = value` experiment configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use starflow_core::{DiffusionRule, Scheme};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    /// 1-based line of the offending entry; 0 for command-line overrides.
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    LinearOracle,
    #[default]
    Decay,
    Asymptotic,
    MaxPrinciple,
    PicardContraction,
    Commutator,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::LinearOracle,
        Preset::Decay,
        Preset::Asymptotic,
        Preset::MaxPrinciple,
        Preset::PicardContraction,
        Preset::Commutator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::LinearOracle => "linear_oracle",
            Preset::Decay => "decay",
            Preset::Asymptotic => "asymptotic",
            Preset::MaxPrinciple => "max_principle",
            Preset::PicardContraction => "picard_contraction",
            Preset::Commutator => "commutator",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxKind {
    Zero,
    #[default]
    PowerLaw,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialKind {
    #[default]
    GaussianBump,
    Profile,
}

/// Every field has a default; presets fill in what they need for the keys
/// the user did not set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub n_in: usize,
    pub m_out: usize,
    pub length: f64,
    pub cells: usize,
    pub flux: FluxKind,
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
    pub scheme: Scheme,
    pub diffusion: DiffusionRule,
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub picard_substeps: usize,
    pub initial: InitialKind,
    pub center: f64,
    pub width: f64,
    /// `None` normalises the bump to `mass`.
    pub amplitude: Option<f64>,
    /// Global edge index carrying the bump; `None` is the first outgoing edge.
    pub edge: Option<usize>,
    pub mass: f64,
    pub t0: f64,
    /// Extra snapshot times on top of those the preset needs.
    pub sample_times: Vec<f64>,
    pub output_dir: PathBuf,
    explicit: BTreeSet<&'static str>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Decay,
            n_in: 1,
            m_out: 2,
            length: 40.0,
            cells: 2000,
            flux: FluxKind::PowerLaw,
            q: 3.0,
            lower: -1.0,
            upper: 1.0,
            scheme: Scheme::Imex,
            diffusion: DiffusionRule::CrankNicolson,
            dt: 1e-2,
            t_end: 80.0,
            cfl_safety: 0.5,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            picard_substeps: 10,
            initial: InitialKind::GaussianBump,
            center: 1.0,
            width: 0.5,
            amplitude: None,
            edge: None,
            mass: 1.0,
            t0: 1.0,
            sample_times: Vec::new(),
            output_dir: PathBuf::from("starflow-out"),
            explicit: BTreeSet::new(),
        }
    }
}

const KEYS: [&str; 26] = [
    "preset",
    "n",
    "m",
    "L",
    "N",
    "flux",
    "q",
    "lower",
    "upper",
    "scheme",
    "diffusion",
    "dt",
    "t_end",
    "cfl_safety",
    "picard_tol",
    "picard_max_iter",
    "picard_substeps",
    "initial",
    "center",
    "width",
    "amplitude",
    "edge",
    "mass",
    "t0",
    "sample_times",
    "output_dir",
];

fn number<T: FromStr>(value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("malformed value '{value}'"))
}

fn positive(value: &str) -> Result<f64, String> {
    let v: f64 = number(value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got '{value}'"))
    }
}

impl ExperimentConfig {
    /// Whether `key` was given in the file or on the command line.
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Applies one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(format!("unknown key '{key}'"));
        };
        match key {
            "preset" => self.preset = value.parse()?,
            "n" => self.n_in = number(value)?,
            "m" => self.m_out = number(value)?,
            "L" => self.length = positive(value)?,
            "N" => self.cells = number(value)?,
            "flux" => {
                self.flux = match value {
                    "zero" => FluxKind::Zero,
                    "power_law" => FluxKind::PowerLaw,
                    "truncated" => FluxKind::Truncated,
                    _ => return Err(format!("unknown flux '{value}'")),
                }
            }
            "q" => {
                let q: f64 = number(value)?;
                if !(q > 1.0 && q.is_finite()) {
                    return Err("q must exceed 1".into());
                }
                self.q = q;
            }
            "lower" => self.lower = number(value)?,
            "upper" => self.upper = number(value)?,
            "scheme" => {
                self.scheme = match value {
                    "imex" => Scheme::Imex,
                    "picard" => Scheme::Picard,
                    _ => return Err(format!("unknown scheme '{value}'")),
                }
            }
            "diffusion" => {
                self.diffusion = match value {
                    "crank_nicolson" => DiffusionRule::CrankNicolson,
                    "backward_euler" => DiffusionRule::BackwardEuler,
                    _ => return Err(format!("unknown diffusion rule '{value}'")),
                }
            }
            "dt" => self.dt = positive(value)?,
            "t_end" => self.t_end = positive(value)?,
            "cfl_safety" => {
                let v: f64 = number(value)?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err("cfl_safety must lie in (0, 1]".into());
                }
                self.cfl_safety = v;
            }
            "picard_tol" => self.picard_tol = positive(value)?,
            "picard_max_iter" => self.picard_max_iter = number(value)?,
            "picard_substeps" => self.picard_substeps = number(value)?,
            "initial" => {
                self.initial = match value {
                    "gaussian_bump" => InitialKind::GaussianBump,
                    "profile" => InitialKind::Profile,
                    _ => return Err(format!("unknown initial data '{value}'")),
                }
            }
            "center" => self.center = number(value)?,
            "width" => self.width = positive(value)?,
            "amplitude" => {
                self.amplitude = if value == "auto" {
                    None
                } else {
                    Some(number(value)?)
                }
            }
            "edge" => {
                self.edge = if value == "auto" {
                    None
                } else {
                    Some(number(value)?)
                }
            }
            "mass" => self.mass = number(value)?,
            "t0" => self.t0 = positive(value)?,
            "sample_times" => {
                self.sample_times = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(number)
                    .collect::<Result<_, _>>()?;
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => unreachable!("key list and match arms disagree"),
        }
        self.explicit.insert(key);
        Ok(())
    }

    /// Cross-field checks that single assignments cannot make.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_in == 0 || self.m_out == 0 {
            return Err("n and m must be at least 1".into());
        }
        if self.cells < 4 {
            return Err("N must be at least 4".into());
        }
        if !(self.lower <= 0.0 && self.upper >= 0.0) {
            return Err("truncation bounds must satisfy lower <= 0 <= upper".into());
        }
        if let Some(edge) = self.edge {
            if edge >= self.n_in + self.m_out {
                return Err(format!("edge {edge} does not exist"));
            }
        }
        if self.picard_max_iter == 0 || self.picard_substeps == 0 {
            return Err("picard iteration counts must be positive".into());
        }
        if self.sample_times.iter().any(|t| !(*t >= 0.0)) {
            return Err("sample times must be non-negative".into());
        }
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, entry: &str) -> Result<(), ConfigError> {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| ConfigError::new(0, format!("expected key=value, got '{entry}'")))?;
        self.set(key.trim(), value.trim())
            .map_err(|m| ConfigError::new(0, m))?;
        self.validate().map_err(|m| ConfigError::new(0, m))
    }
}

/// Parses `key = value` lines; `#` starts a comment and blank lines are
/// skipped.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::new(line, format!("expected key = value, got '{content}'")))?;
        cfg.set(key.trim(), value.trim())
            .map_err(|m| ConfigError::new(line, m))?;
    }
    cfg.validate().map_err(|m| ConfigError::new(0, m))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.preset, Preset::Decay);
        assert_eq!((cfg.n_in, cfg.m_out), (1, 2));
        assert_eq!(cfg.q, 3.0);
        assert_eq!(cfg.length, 40.0);
        assert_eq!(cfg.cells, 2000);
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn reads_values_and_comments() {
        let cfg = parse_config("# header\nq = 2.5   # trailing\n\npreset=commutator\nsample_times = 1, 2.5,4\n").unwrap();
        assert_eq!(cfg.q, 2.5);
        assert_eq!(cfg.preset, Preset::Commutator);
        assert_eq!(cfg.sample_times, [1.0, 2.5, 4.0]);
        assert!(cfg.is_explicit("q"));
        assert!(!cfg.is_explicit("L"));
    }

    #[test]
    fn q_below_one_is_rejected_with_line() {
        let err = parse_config("n = 1\nq = 0.5\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.message, "q must exceed 1");
        assert_eq!(err.to_string(), "line 2: q must exceed 1");
    }

    #[test]
    fn unknown_and_malformed_entries() {
        assert_eq!(parse_config("colour = red").unwrap_err().line, 1);
        assert_eq!(parse_config("\n\nN = many").unwrap_err().line, 3);
        assert_eq!(parse_config("just words").unwrap_err().line, 1);
        assert!(parse_config("preset = sideways").is_err());
        assert!(parse_config("n = 0").is_err());
        assert!(parse_config("cfl_safety = 1.5").is_err());
    }

    #[test]
    fn overrides_apply_after_file() {
        let mut cfg = parse_config("q = 2.5").unwrap();
        cfg.apply_override("q=4").unwrap();
        assert_eq!(cfg.q, 4.0);
        assert!(cfg.apply_override("q").is_err());
        assert!(cfg.apply_override("edge=7").is_err());
    }
}
