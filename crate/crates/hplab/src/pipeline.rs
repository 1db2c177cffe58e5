//! series -> system -> kernel -> order check -> roots -> analysis -> files,
//! for every requested degree.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use hplab_core::analysis::{classify_hermite_pade, classify_pade, potential_grid, structure_drift, FroissartReport, Thresholds};
use hplab_core::linear::ResidualSeries;
use hplab_core::svg::{plot_file_name, scatter, Layer, PlotSpec};
use hplab_core::{
    build_hp_system, build_pade_system, build_two_point_system, certify, find_roots, kernel_solve, residual_series,
    FunctionSpec, HpSolution, Magnitude, Precision, RootCloud, RootError, Series,
};
use serde::Serialize;

use crate::cache::{series_key, sha256_hex, SeriesCache};
use crate::config::{ResolvedRun, RunConfig};
use crate::io;
use crate::presets::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Series,
    System,
    Solve,
    OrderCheck,
    Analysis,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
}

impl Failure {
    fn at(stage: Stage, e: impl std::fmt::Display) -> Self {
        Self { stage, message: e.to_string() }
    }
}

/// Working-precision series and the doubled-precision copies used for the
/// independent order check.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub series: Vec<Series>,
    pub check: Vec<Series>,
}

pub fn series_len(mode: Mode, n: usize) -> usize {
    mode.kind().series_len(n)
}

/// Builds (or fetches) the inputs for one degree.
pub fn prepare(
    cache: &mut SeriesCache,
    mode: Mode,
    functions: &[FunctionSpec],
    n: usize,
    prec: Precision,
) -> Result<Inputs, Failure> {
    let len = series_len(mode, n);
    let mut series = Vec::new();
    let mut check = Vec::new();
    for f in functions {
        series.push(cache.get(f, len, prec).map_err(|e| Failure::at(Stage::Series, e))?);
        check.push(cache.get(f, len, prec.doubled()).map_err(|e| Failure::at(Stage::Series, e))?);
    }
    Ok(Inputs { series, check })
}

#[derive(Debug, Clone)]
pub struct DegreeResult {
    pub n: usize,
    pub precision: Precision,
    pub solution: HpSolution,
    pub residuals: Vec<ResidualSeries>,
    /// Largest relative forced remainder coefficient.
    pub order_check: Magnitude,
    /// One cloud per family; empty when roots were not requested.
    pub clouds: Vec<RootCloud>,
    pub report: Option<FroissartReport>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComputeOptions {
    pub roots: bool,
    pub detect: Option<Thresholds>,
}

/// Everything for one degree, in memory.
pub fn compute(mode: Mode, n: usize, prec: Precision, inputs: &Inputs, opts: ComputeOptions) -> Result<DegreeResult, Failure> {
    let s = &inputs.series;
    let sys = match mode {
        Mode::Pade => build_pade_system(&s[0], n),
        Mode::HermitePade => build_hp_system(&s[0], &s[1], n),
        Mode::TwoPoint => build_two_point_system(&s[0], &s[1], n),
    }
    .map_err(|e| Failure::at(Stage::System, e))?;
    let solution = kernel_solve(&sys).map_err(|e| Failure::at(Stage::Solve, e))?;
    drop(sys);
    let residuals = residual_series(&solution, &inputs.check).map_err(|e| Failure::at(Stage::OrderCheck, e))?;
    let order_check = residuals.iter().map(|r| r.max_required()).fold(Magnitude::ZERO, |a, b| if b > a { b } else { a });
    let mut clouds = Vec::new();
    if opts.roots {
        for (family, poly) in solution.polys.iter().enumerate() {
            let cloud = match find_roots(poly, prec) {
                Ok(c) => certify(poly, c),
                // an identically vanishing polynomial is reported, not rejected
                Err(RootError::AllZero) => RootCloud::empty(family, n, prec.digits()),
            };
            clouds.push(cloud.with_label(family, n));
        }
    }
    let report = match (opts.detect, opts.roots) {
        (Some(thr), true) => Some(detect(mode, n, &clouds, &thr)),
        _ => None,
    };
    Ok(DegreeResult { n, precision: prec, solution, residuals, order_check, clouds, report })
}

pub fn detect(mode: Mode, n: usize, clouds: &[RootCloud], thr: &Thresholds) -> FroissartReport {
    let pts: Vec<_> = clouds.iter().map(|c| c.points_c64()).collect();
    detect_points(mode, n, &pts, thr)
}

/// Detectors on plain points: Hermite-Pade clouds are classified jointly,
/// Pade and two-point Pade as zeros (family 0) against poles (family 1).
pub fn detect_points(mode: Mode, n: usize, pts: &[Vec<num_complex::Complex64>], thr: &Thresholds) -> FroissartReport {
    let get = |k: usize| pts.get(k).map(Vec::as_slice).unwrap_or(&[]);
    match mode {
        Mode::HermitePade => classify_hermite_pade(n, [get(0), get(1), get(2)], thr),
        Mode::Pade | Mode::TwoPoint => classify_pade(n, get(0), get(1), thr),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Serializes file creation and records a hash for every file written.
struct ArtifactWriter {
    root: PathBuf,
    lock: Mutex<()>,
}

impl ArtifactWriter {
    fn write(&self, name: &str, content: &str) -> Result<Artifact, Failure> {
        let _g = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.root.join(name);
        fs::write(&path, content).map_err(|e| Failure::at(Stage::Output, format!("{}: {e}", path.display())))?;
        Ok(Artifact { path: name.into(), sha256: sha256_hex(content.as_bytes()), bytes: content.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: usize,
    pub roots: usize,
    pub effective_degree: usize,
    pub converged: bool,
    pub uncertified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpuriousCounts {
    pub doublets: usize,
    pub singlets: usize,
    pub triplets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeRecord {
    pub n: usize,
    pub digits: u32,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_defect: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_norm: Option<Magnitude>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_check: Option<Magnitude>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<FamilySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spurious: Option<SpuriousCounts>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRecord {
    pub label: String,
    pub digits: u32,
    pub length: usize,
    pub key: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    /// The configuration as given, plus the resolved values below.
    pub config: RunConfig,
    pub label: String,
    pub mode: Mode,
    pub functions: Vec<FunctionSpec>,
    pub degrees: Vec<usize>,
    pub thresholds: Thresholds,
    pub series: Vec<SeriesRecord>,
    pub runs: Vec<DegreeRecord>,
    pub sweep_artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn failed(&self) -> usize {
        self.runs.iter().filter(|r| r.status == Status::Failed).count()
    }

    /// 0 when every degree succeeded, 2 when some failed.
    pub fn exit_code(&self) -> i32 {
        if self.failed() == 0 {
            0
        } else {
            2
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// A finished run: the manifest plus the in-memory results of every degree
/// that succeeded.
pub struct RunOutcome {
    pub manifest: Manifest,
    pub results: BTreeMap<usize, DegreeResult>,
}

pub const MANIFEST: &str = "manifest.json";

pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let r = config.resolve()?;
    let out_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Output { path, source }
    };
    fs::create_dir_all(&r.out).map_err(out_err(&r.out))?;
    let writer = ArtifactWriter { root: r.out.clone(), lock: Mutex::new(()) };

    // Series first, sequentially: the longest series per precision, so the
    // workers only slice and the results do not depend on scheduling.
    let mut cache = SeriesCache::new(Some(r.cache_dir.clone()));
    let mut longest: BTreeMap<u32, usize> = BTreeMap::new();
    for &n in &r.degrees {
        let e = longest.entry(r.precision(n).digits()).or_default();
        *e = (*e).max(n);
    }
    let mut records = Vec::new();
    let mut pools: BTreeMap<u32, Result<Inputs, Failure>> = BTreeMap::new();
    for (&digits, &nmax) in &longest {
        let prec = Precision::new(digits).expect("validated");
        let inputs = prepare(&mut cache, r.mode, &r.functions, nmax, prec);
        if inputs.is_ok() {
            for f in &r.functions {
                let length = series_len(r.mode, nmax);
                records.push(SeriesRecord { label: f.label.clone(), digits, length, key: series_key(f, length, digits) });
            }
        }
        pools.insert(digits, inputs);
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<(DegreeRecord, Option<DegreeResult>)>>> = Mutex::new((0..r.degrees.len()).map(|_| None).collect());
    let workers = r.workers.min(r.degrees.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= r.degrees.len() {
                    break;
                }
                let n = r.degrees[i];
                let done = run_degree(&r, n, &pools, &writer);
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(done);
            });
        }
    });

    let mut runs = Vec::new();
    let mut results = BTreeMap::new();
    for slot in slots.into_inner().unwrap_or_else(|e| e.into_inner()) {
        let (rec, res) = slot.expect("every degree is processed");
        if let Some(res) = res {
            results.insert(rec.n, res);
        }
        runs.push(rec);
    }

    let sweep_artifacts = write_sweep(&r, &results, &writer);
    let manifest = Manifest {
        tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        label: r.label.clone(),
        mode: r.mode,
        functions: r.functions.clone(),
        degrees: r.degrees.clone(),
        thresholds: r.analysis.thresholds,
        series: records,
        runs,
        sweep_artifacts,
    };
    let path = r.out.join(MANIFEST);
    fs::write(&path, io::pretty(&manifest)).map_err(out_err(&path))?;
    Ok(RunOutcome { manifest, results })
}

fn run_degree(
    r: &ResolvedRun,
    n: usize,
    pools: &BTreeMap<u32, Result<Inputs, Failure>>,
    writer: &ArtifactWriter,
) -> (DegreeRecord, Option<DegreeResult>) {
    let prec = r.precision(n);
    let mut rec = DegreeRecord {
        n,
        digits: prec.digits(),
        status: Status::Failed,
        failure: None,
        rank: None,
        kernel_defect: None,
        residual_norm: None,
        order_check: None,
        families: Vec::new(),
        spurious: None,
        artifacts: Vec::new(),
    };
    let inputs = match &pools[&prec.digits()] {
        Ok(pool) => {
            let len = series_len(r.mode, n);
            Inputs {
                series: pool.series.iter().map(|s| s.truncated(len)).collect(),
                check: pool.check.iter().map(|s| s.truncated(len)).collect(),
            }
        }
        Err(f) => {
            rec.failure = Some(f.clone());
            return (rec, None);
        }
    };
    let opts = ComputeOptions { roots: true, detect: r.analysis.detect.then_some(r.analysis.thresholds) };
    let res = match compute(r.mode, n, prec, &inputs, opts) {
        Ok(res) => res,
        Err(f) => {
            rec.failure = Some(f);
            return (rec, None);
        }
    };
    rec.rank = Some(res.solution.rank);
    rec.kernel_defect = Some(res.solution.kernel_defect);
    rec.residual_norm = Some(res.solution.residual_norm);
    rec.order_check = Some(res.order_check);
    rec.families = res
        .clouds
        .iter()
        .map(|c| FamilySummary {
            family: c.family,
            roots: c.len(),
            effective_degree: c.effective_degree,
            converged: c.converged,
            uncertified: c.uncertified.iter().filter(|u| **u).count(),
        })
        .collect();
    rec.spurious = res.report.as_ref().map(|rep| SpuriousCounts {
        doublets: rep.doublets.len(),
        singlets: rep.singlets.len(),
        triplets: rep.triplets.len(),
    });
    match write_degree(r, &res, writer) {
        Ok(arts) => {
            rec.artifacts = arts;
            rec.status = Status::Ok;
        }
        Err(f) => rec.failure = Some(f),
    }
    (rec, Some(res))
}

fn plot_spec(r: &ResolvedRun, layers: &[Layer], families: Vec<usize>, title: String) -> PlotSpec {
    let mut spec = match (r.plots.re, r.plots.im) {
        (Some(re), Some(im)) => PlotSpec::new(re, im, families),
        _ => PlotSpec::fit(layers, families),
    };
    spec.annotations = r.annotations.clone();
    spec.allow_empty = true;
    spec.title = title;
    spec
}

fn write_degree(r: &ResolvedRun, res: &DegreeResult, w: &ArtifactWriter) -> Result<Vec<Artifact>, Failure> {
    let (label, n, sig) = (&r.label, res.n, r.output_digits);
    let mut arts = vec![
        w.write(&format!("{label}_{n}_solution.json"), &io::solution_json(&res.solution, sig))?,
        w.write(&format!("{label}_{n}_roots.csv"), &io::clouds_csv(&res.clouds, sig))?,
        w.write(&format!("{label}_{n}_roots.json"), &io::clouds_json(&res.clouds, sig))?,
    ];
    if let Some(rep) = &res.report {
        arts.push(w.write(&format!("{label}_{n}_spurious.json"), &io::pretty(rep))?);
    }
    if let Some(grid) = &r.analysis.grid {
        let refs: Vec<&RootCloud> = res.clouds.iter().collect();
        let g = potential_grid(&refs, grid, n).map_err(|e| Failure::at(Stage::Analysis, e))?;
        arts.push(w.write(&format!("{label}_{n}_potential.csv"), &io::grid_csv(&g))?);
    }
    if r.plots.enabled {
        let layers: Vec<Layer> = res.clouds.iter().map(Layer::from_cloud).collect();
        let all: Vec<usize> = (0..r.mode.families()).collect();
        let mut sets = vec![all.clone()];
        if r.plots.per_family {
            sets.extend(all.iter().map(|&f| vec![f]));
        }
        // one viewport for the overlay and the single-family figures
        let base = plot_spec(r, &layers, all, format!("{label}, n = {n}"));
        for fams in sets {
            let mut spec = base.clone();
            spec.families = fams.clone();
            let svg = scatter(&layers, &spec).map_err(|e| Failure::at(Stage::Output, e))?;
            arts.push(w.write(&plot_file_name(label, n, &fams), &svg)?);
        }
    }
    Ok(arts)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    degrees: Vec<usize>,
    reports: Vec<&'a FroissartReport>,
    drift: Vec<hplab_core::analysis::StructureDrift>,
}

/// Multi-degree overlay and structure drift, when more than one degree ran.
fn write_sweep(r: &ResolvedRun, results: &BTreeMap<usize, DegreeResult>, w: &ArtifactWriter) -> Vec<Artifact> {
    let mut arts = Vec::new();
    if results.len() < 2 {
        return arts;
    }
    let (lo, hi) = (results.keys().next().unwrap(), results.keys().last().unwrap());
    let label = &r.label;
    if r.analysis.detect {
        let reports: Vec<&FroissartReport> = results.values().filter_map(|d| d.report.as_ref()).collect();
        let owned: Vec<FroissartReport> = reports.iter().map(|r| (*r).clone()).collect();
        let doc = SweepSummary { degrees: results.keys().copied().collect(), drift: structure_drift(&owned), reports };
        if let Ok(a) = w.write(&format!("{label}_{lo}-{hi}_spurious.json"), &io::pretty(&doc)) {
            arts.push(a);
        }
    }
    if r.plots.enabled {
        let layers: Vec<Layer> = results.values().flat_map(|d| d.clouds.iter().map(Layer::from_cloud)).collect();
        let all: Vec<usize> = (0..r.mode.families()).collect();
        let spec = plot_spec(r, &layers, all.clone(), format!("{label}, n = {lo}..{hi}"));
        if let Ok(svg) = scatter(&layers, &spec) {
            let name = plot_file_name(label, *lo, &all).replacen(&format!("_{lo}_"), &format!("_{lo}-{hi}_"), 1);
            if let Ok(a) = w.write(&name, &svg) {
                arts.push(a);
            }
        }
    }
    arts
}
