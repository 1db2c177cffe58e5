//! File formats, presets, caching and the run pipeline on top of
//! `hplab-core`.
//!
//! A run is described by a [`RunConfig`] (a preset name or explicit function
//! specs, a mode, degrees and output options). [`run`] computes every degree,
//! writes CSV/JSON/SVG artifacts and a `manifest.json` listing each file with
//! its SHA-256.

pub mod cache;
pub mod config;
pub mod io;
pub mod pipeline;
pub mod presets;

pub use config::{ConfigError, ResolvedRun, RunConfig};
pub use pipeline::{compute, prepare, run, ComputeOptions, DegreeResult, Inputs, Manifest, RunError, RunOutcome};
pub use presets::{preset, presets, Degrees, Mode, Preset};
