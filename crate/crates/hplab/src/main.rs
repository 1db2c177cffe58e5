use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hplab::io::{group_rows, read_clouds_csv};
use hplab::pipeline::detect_points;
use hplab::{presets, run, Degrees, Mode, RunConfig};
use hplab_core::svg::{scatter, Layer, PlotSpec};

#[derive(Parser)]
#[command(name = "hplab", version, about = "Pade and Hermite-Pade polynomials at high precision")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a config file (or a preset with its defaults).
    Run {
        /// JSON run configuration.
        config: Option<PathBuf>,
        /// Use a built-in preset instead of a config file.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        #[arg(long)]
        digits: Option<u32>,
        /// e.g. `40`, `5,10,20` or `30..40`.
        #[arg(long)]
        degrees: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        no_plots: bool,
    },
    /// List the built-in presets.
    Presets {
        /// Print the full catalog as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Plot a stored root CSV.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Families to draw, e.g. `0,2`; all by default.
        #[arg(long, value_delimiter = ',')]
        families: Vec<usize>,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Re-run the spurious-structure detectors on a stored root CSV.
    Detect {
        csv: PathBuf,
        /// Defaults to hermite_pade for three families, pade otherwise.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// JSON file with detector thresholds.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown mode {s:?}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { config, preset, digits, degrees, out, workers, no_plots } => {
            cmd_run(config, preset, digits, degrees, out, workers, no_plots)
        }
        Cmd::Presets { json } => cmd_presets(json),
        Cmd::Plot { csv, out, families, title } => cmd_plot(csv, out, families, title),
        Cmd::Detect { csv, mode, thresholds, out } => cmd_detect(csv, mode, thresholds, out),
    };
    ExitCode::from(code as u8)
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    1
}

fn cmd_run(
    config: Option<PathBuf>,
    preset: Option<String>,
    digits: Option<u32>,
    degrees: Option<String>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    no_plots: bool,
) -> i32 {
    let mut cfg = match (config, preset) {
        (Some(path), _) => match RunConfig::load(&path) {
            Ok(c) => c,
            Err(e) => return fail(e),
        },
        (None, Some(name)) => RunConfig::for_preset(&name),
        (None, None) => return fail("give a config file or --preset"),
    };
    if let Some(d) = digits {
        cfg.digits = Some(d);
    }
    if let Some(s) = degrees {
        match Degrees::parse(&s) {
            Ok(d) => cfg.degrees = Some(d),
            Err(e) => return fail(e),
        }
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if no_plots {
        cfg.plots.enabled = false;
    }
    match run(&cfg) {
        Ok(outcome) => {
            for r in &outcome.manifest.runs {
                match &r.failure {
                    None => eprintln!("n={:<4} ok   order check {}", r.n, r.order_check.map(|m| m.to_string()).unwrap_or_default()),
                    Some(f) => eprintln!("n={:<4} FAIL {:?}: {}", r.n, f.stage, f.message),
                }
            }
            eprintln!("manifest: {}", cfg.out.join(hplab::pipeline::MANIFEST).display());
            outcome.manifest.exit_code()
        }
        Err(e) => {
            let code = e.exit_code();
            fail(e);
            code
        }
    }
}

fn cmd_presets(json: bool) -> i32 {
    if json {
        println!("{}", serde_json::to_string_pretty(presets()).expect("presets serialize"));
        return 0;
    }
    for p in presets() {
        println!("{:<18} {:<13} {:>5} digits  {:?}", p.name, p.mode.to_string(), p.digits, p.degrees.expand());
    }
    0
}

fn read_rows(csv: &PathBuf) -> Result<std::collections::BTreeMap<(usize, usize), Vec<num_complex::Complex64>>, String> {
    let text = std::fs::read_to_string(csv).map_err(|e| format!("{}: {e}", csv.display()))?;
    let rows = read_clouds_csv(&text).map_err(|e| e.to_string())?;
    group_rows(&rows).map_err(|e| e.to_string())
}

fn cmd_plot(csv: PathBuf, out: PathBuf, families: Vec<usize>, title: String) -> i32 {
    let groups = match read_rows(&csv) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let layers: Vec<Layer> = groups.iter().map(|(&(_, family), pts)| Layer { family, points: pts.clone() }).collect();
    let fams = if families.is_empty() {
        let mut f: Vec<usize> = layers.iter().map(|l| l.family).collect();
        f.sort_unstable();
        f.dedup();
        f
    } else {
        families
    };
    let mut spec = PlotSpec::fit(&layers, fams);
    spec.title = title;
    spec.allow_empty = true;
    match scatter(&layers, &spec) {
        Ok(svg) => match std::fs::write(&out, svg) {
            Ok(()) => 0,
            Err(e) => fail(format!("{}: {e}", out.display())),
        },
        Err(e) => fail(e),
    }
}

fn cmd_detect(csv: PathBuf, mode: Option<Mode>, thresholds: Option<PathBuf>, out: Option<PathBuf>) -> i32 {
    let groups = match read_rows(&csv) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let thr = match hplab::config::load_thresholds(thresholds.as_deref()) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let mut by_n: std::collections::BTreeMap<usize, Vec<Vec<num_complex::Complex64>>> = Default::default();
    for (&(n, family), pts) in &groups {
        let v = by_n.entry(n).or_default();
        if v.len() <= family {
            v.resize(family + 1, Vec::new());
        }
        v[family] = pts.clone();
    }
    let reports: Vec<_> = by_n
        .iter()
        .map(|(&n, clouds)| {
            let m = mode.unwrap_or(if clouds.len() == 3 { Mode::HermitePade } else { Mode::Pade });
            detect_points(m, n, clouds, &thr)
        })
        .collect();
    let text = hplab::io::pretty(&reports);
    match out {
        Some(p) => match std::fs::write(&p, text) {
            Ok(()) => 0,
            Err(e) => fail(format!("{}: {e}", p.display())),
        },
        None => {
            print!("{text}");
            0
        }
    }
}
