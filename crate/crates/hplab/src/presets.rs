//! The built-in catalog of named function configurations.

use std::fmt;
use std::sync::OnceLock;

use hplab_core::{FunctionSpec, SystemKind};
use serde::{Deserialize, Serialize};

const CATALOG: &str = include_str!("../presets.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pade,
    HermitePade,
    TwoPoint,
}

impl Mode {
    pub fn kind(self) -> SystemKind {
        match self {
            Mode::Pade => SystemKind::Pade,
            Mode::HermitePade => SystemKind::HermitePade,
            Mode::TwoPoint => SystemKind::TwoPoint,
        }
    }

    /// Number of function specs the mode consumes.
    pub fn arity(self) -> usize {
        match self {
            Mode::Pade => 1,
            Mode::HermitePade | Mode::TwoPoint => 2,
        }
    }

    pub fn families(self) -> usize {
        self.kind().families()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Pade => "pade",
            Mode::HermitePade => "hermite_pade",
            Mode::TwoPoint => "two_point",
        })
    }
}

/// A list of degrees or an inclusive span `from..=to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degrees {
    List(Vec<usize>),
    Span { from: usize, to: usize },
}

impl Degrees {
    /// Sorted, deduplicated degrees.
    pub fn expand(&self) -> Vec<usize> {
        let mut v = match self {
            Degrees::List(l) => l.clone(),
            Degrees::Span { from, to } => (*from..=*to).collect(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Parses `5,10,20`, `30..40` or a mix such as `1..3,8`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some((a, b)) = part.split_once("..") {
                let a: usize = a.trim().parse().map_err(|_| format!("bad degree {a:?}"))?;
                let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad degree {b:?}"))?;
                if b < a {
                    return Err(format!("empty range {part}"));
                }
                out.extend(a..=b);
            } else {
                out.push(part.parse().map_err(|_| format!("bad degree {part:?}"))?);
            }
        }
        if out.is_empty() {
            return Err("no degrees given".into());
        }
        Ok(Degrees::List(out))
    }
}

/// One reference setting: precision and degrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRun {
    pub digits: u32,
    pub degrees: Degrees,
}

/// A point to mark on plots, given as an exact expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mark {
    pub at: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub mode: Mode,
    pub note: String,
    /// Default precision.
    pub digits: u32,
    pub degrees: Degrees,
    /// Every reference setting; the first is the default.
    pub reference_runs: Vec<ReferenceRun>,
    #[serde(default)]
    pub annotations: Vec<Mark>,
    /// `[f]` for Pade, `[f1, f2]` for Hermite-Pade, `[f at 0, f at infinity]`
    /// for two-point Pade.
    pub functions: Vec<FunctionSpec>,
}

#[derive(Deserialize)]
struct Catalog {
    presets: Vec<Preset>,
}

pub fn presets() -> &'static [Preset] {
    static CELL: OnceLock<Vec<Preset>> = OnceLock::new();
    CELL.get_or_init(|| {
        let c: Catalog = serde_json::from_str(CATALOG).expect("built-in preset catalog is valid");
        c.presets
    })
}

pub fn preset(name: &str) -> Option<&'static Preset> {
    presets().iter().find(|p| p.name == name)
}
