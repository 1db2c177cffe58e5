//! Run configuration: a single JSON document naming the functions, the mode,
//! the degrees and what to write.

use std::path::{Path, PathBuf};

use hplab_core::analysis::{GridSpec, Thresholds};
use hplab_core::{parse_exact, FunctionSpec, Precision};
use serde::{Deserialize, Serialize};

use crate::presets::{preset, Degrees, Mark, Mode};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("give either a preset or explicit functions")]
    NoFunctions,
    #[error("explicit functions need a mode")]
    NoMode,
    #[error("mode {mode} takes {expected} function spec(s), got {got}")]
    Arity { mode: Mode, expected: usize, got: usize },
    #[error("two-point mode needs the expansion at zero first and at infinity second")]
    TwoPointOrder,
    #[error("invalid function {label:?}: {reason}")]
    Function { label: String, reason: String },
    #[error("no degrees to run")]
    NoDegrees,
    #[error("digits: {0}")]
    Digits(#[from] hplab_core::PrecisionError),
    #[error("workers must be at least 1")]
    Workers,
    #[error("invalid annotation {0:?}")]
    Annotation(String),
    #[error("invalid grid: {0}")]
    Grid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Run the spurious-structure detectors.
    #[serde(default = "yes")]
    pub detect: bool,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Evaluate the max-potential on this grid for every degree.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { detect: true, thresholds: Thresholds::default(), grid: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// One figure per family in addition to the overlay.
    #[serde(default = "yes")]
    pub per_family: bool,
    /// Fixed viewport; fitted to the points when absent.
    #[serde(default)]
    pub re: Option<(f64, f64)>,
    #[serde(default)]
    pub im: Option<(f64, f64)>,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self { enabled: true, per_family: true, re: None, im: None }
    }
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn default_output_digits() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// File name stem for artifacts; defaults to the preset name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Overrides the preset's functions when given.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Degrees>,
    /// Working precision for every degree. Falls back to the preset default,
    /// then to the per-degree policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Series cache directory; `out/cache` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "one")]
    pub workers: usize,
    /// Significant digits of decimal strings in CSV and JSON outputs.
    #[serde(default = "default_output_digits")]
    pub output_digits: usize,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub plots: PlotConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Mark>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn for_preset(name: &str) -> Self {
        Self {
            label: None,
            preset: Some(name.into()),
            mode: None,
            functions: Vec::new(),
            degrees: None,
            digits: None,
            out: default_out(),
            cache_dir: None,
            workers: 1,
            output_digits: default_output_digits(),
            analysis: AnalysisConfig::default(),
            plots: PlotConfig::default(),
            annotations: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fills in preset defaults and checks every invariant.
    pub fn resolve(&self) -> Result<ResolvedRun, ConfigError> {
        let p = match &self.preset {
            Some(name) => Some(preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?),
            None => None,
        };
        let mode = match (self.mode, p) {
            (Some(m), _) => m,
            (None, Some(p)) => p.mode,
            (None, None) if self.functions.is_empty() => return Err(ConfigError::NoFunctions),
            (None, None) => return Err(ConfigError::NoMode),
        };
        let functions = match (self.functions.is_empty(), p) {
            (false, _) => self.functions.clone(),
            (true, Some(p)) => p.functions.clone(),
            (true, None) => return Err(ConfigError::NoFunctions),
        };
        if functions.len() != mode.arity() {
            return Err(ConfigError::Arity { mode, expected: mode.arity(), got: functions.len() });
        }
        if mode == Mode::TwoPoint
            && (functions[0].expansion_point != hplab_core::ExpansionPoint::Zero
                || functions[1].expansion_point != hplab_core::ExpansionPoint::Infinity)
        {
            return Err(ConfigError::TwoPointOrder);
        }
        for f in &functions {
            check_function(f)?;
        }
        let degrees = match (&self.degrees, p) {
            (Some(d), _) => d.expand(),
            (None, Some(p)) => p.degrees.expand(),
            (None, None) => return Err(ConfigError::NoDegrees),
        };
        if degrees.is_empty() {
            return Err(ConfigError::NoDegrees);
        }
        let digits = self.digits.or(p.map(|p| p.digits));
        if let Some(d) = digits {
            Precision::new(d)?;
        }
        if self.workers == 0 {
            return Err(ConfigError::Workers);
        }
        let mut marks = p.map(|p| p.annotations.clone()).unwrap_or_default();
        marks.extend(self.annotations.iter().cloned());
        let mut annotations = Vec::new();
        for m in &marks {
            let z = parse_exact(&m.at, 128).map_err(|_| ConfigError::Annotation(m.at.clone()))?.to_c64();
            annotations.push(hplab_core::svg::Annotation { re: z.re, im: z.im, label: m.label.clone() });
        }
        if let Some(g) = &self.analysis.grid {
            if g.nx < 2 || g.ny < 2 || !(g.re.0 < g.re.1) || !(g.im.0 < g.im.1) || !(g.clearance >= 0.0) {
                return Err(ConfigError::Grid(format!("{g:?}")));
            }
        }
        let label = self
            .label
            .clone()
            .or_else(|| self.preset.clone())
            .unwrap_or_else(|| String::from("run"));
        Ok(ResolvedRun {
            label: sanitize(&label),
            mode,
            functions,
            degrees,
            digits,
            out: self.out.clone(),
            cache_dir: self.cache_dir.clone().unwrap_or_else(|| self.out.join("cache")),
            workers: self.workers,
            output_digits: self.output_digits.max(1),
            analysis: self.analysis.clone(),
            plots: self.plots.clone(),
            annotations,
        })
    }
}

/// Detector thresholds from a JSON file, or the defaults.
pub fn load_thresholds(path: Option<&Path>) -> Result<Thresholds, ConfigError> {
    match path {
        None => Ok(Thresholds::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.into(), source })?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn check_function(f: &FunctionSpec) -> Result<(), ConfigError> {
    let bad = |reason: String| ConfigError::Function { label: f.label.clone(), reason };
    f.validate().map_err(|e| bad(e.to_string()))?;
    for s in f.factors.iter().map(|x| &x.a).chain(&f.poly_offset).chain(std::iter::once(&f.scale)) {
        parse_exact(s, 128).map_err(|e| bad(e.to_string()))?;
    }
    Ok(())
}

/// Keeps `[A-Za-z0-9._-]`, replacing everything else with `_`.
pub fn sanitize(s: &str) -> String {
    let out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    if out.is_empty() {
        String::from("run")
    } else {
        out
    }
}

/// A validated configuration with every default applied.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub label: String,
    pub mode: Mode,
    pub functions: Vec<FunctionSpec>,
    pub degrees: Vec<usize>,
    pub digits: Option<u32>,
    pub out: PathBuf,
    pub cache_dir: PathBuf,
    pub workers: usize,
    pub output_digits: usize,
    pub analysis: AnalysisConfig,
    pub plots: PlotConfig,
    pub annotations: Vec<hplab_core::svg::Annotation>,
}

impl ResolvedRun {
    pub fn precision(&self, n: usize) -> Precision {
        match self.digits {
            Some(d) => Precision::new(d).expect("checked in resolve"),
            None => Precision::for_degree(n),
        }
    }
}
