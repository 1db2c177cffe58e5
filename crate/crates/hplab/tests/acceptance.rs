//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a hard criterion fails. Runs for several minutes in the
//! test profile.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use hplab::cache::{sha256_hex, SeriesCache};
use hplab::{compute, prepare, preset, presets, ComputeOptions, DegreeResult, Degrees, Mode, RunConfig};
use hplab_core::analysis::{
    classify_hermite_pade, density_near, detect_doublets, hausdorff, kalyagin_point, Thresholds,
};
use hplab_core::linear::remainder_series;
use hplab_core::{
    build_function_series, parse_exact, BigComplex, Factor, FunctionSpec, Precision, Rational, RootCloud,
};
use num_complex::Complex64;

const C1_DEGREES: [usize; 4] = [5, 10, 20, 40];
const DIGITS_PER_DEGREE: u32 = 30;
const IM_TOL: f64 = 1e-5;
const KAL_GAP: (f64, f64) = (0.0, 0.07);
const KAL_WINDOW: (f64, f64) = (0.07, 0.20);
const SHADOW_RADIUS: f64 = 0.05;
const CHEBOTAREV_RADIUS: f64 = 0.1;
const CHEBOTAREV_MAX_DENSITY: f64 = 0.05;
const HAUSDORFF_TOL: f64 = 0.15;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn digits_for(n: usize) -> Precision {
    Precision::new((DIGITS_PER_DEGREE * n as u32).max(64)).unwrap()
}

struct Lab {
    cache: SeriesCache,
}

impl Lab {
    fn solve(
        &mut self,
        mode: Mode,
        functions: &[FunctionSpec],
        n: usize,
        prec: Precision,
        roots: bool,
    ) -> Result<DegreeResult, String> {
        let inputs = prepare(&mut self.cache, mode, functions, n, prec).map_err(|e| format!("{:?}: {}", e.stage, e.message))?;
        compute(mode, n, prec, &inputs, ComputeOptions { roots, detect: None })
            .map_err(|e| format!("{:?}: {}", e.stage, e.message))
    }

    fn preset(&mut self, name: &str, n: usize, prec: Precision, roots: bool) -> Result<DegreeResult, String> {
        let p = preset(name).ok_or_else(|| format!("no preset {name}"))?;
        self.solve(p.mode, &p.functions, n, prec, roots)
    }
}

fn pts(c: &RootCloud) -> Vec<Complex64> {
    c.points_c64()
}

fn union(r: &DegreeResult) -> Vec<Complex64> {
    r.clouds.iter().flat_map(pts).collect()
}

/// `|x - y| <= 10^{exp10}` evaluated in the working precision.
fn close(x: &BigComplex, y: &BigComplex, exp10: f64, bits: usize) -> bool {
    let d = x.sub(y, bits).log2_abs();
    d == f64::NEG_INFINITY || d <= exp10 * std::f64::consts::LOG2_10
}

/// Every point of `a` has a partner in `b` within `10^{exp10}`, counts equal.
fn same_set(a: &[BigComplex], b: &[BigComplex], exp10: f64, bits: usize) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| close(x, y, exp10, bits)))
}

fn c1_order_of_contact(lab: &mut Lab) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for p in presets() {
        for &n in &C1_DEGREES {
            let prec = digits_for(n);
            cases += 1;
            match lab.solve(p.mode, &p.functions, n, prec, false) {
                // compute fails at the OrderCheck stage when a forced coefficient
                // exceeds the tolerance, so Ok means verified
                Ok(r) => worst = worst.max(r.order_check.log10() - prec.half_tolerance_log10()),
                Err(e) => failures.push(format!("{} n={n}: {e}", p.name)),
            }
        }
    }
    let detail = format!(
        "{cases} cases, worst forced coefficient 10^{worst:.0} below tolerance 10^(-digits/2)"
    );
    if failures.is_empty() {
        Outcome::new(true, detail)
    } else {
        Outcome::new(false, format!("{detail}; failed: {}", failures.join("; ")))
    }
}

fn c2_kalyagin(lab: &mut Lab) -> Outcome {
    // two routes to the rescaled limit: the formula at a = 1/3 on [0, 1]
    // stretched by 3, and the fraction worked out by hand
    let formula = 3.0 * kalyagin_point(1.0 / 3.0).unwrap();
    let target = 8.0 / 63.0;
    if (formula - target).abs() > 1e-15 {
        return Outcome::new(false, format!("limit routes disagree: {formula} vs {target}"));
    }
    let leftmost = |lab: &mut Lab, n: usize| -> Result<(f64, Vec<Complex64>), String> {
        let r = lab.preset("kalyagin_markov", n, digits_for(n), true)?;
        let q2 = pts(&r.clouds[2]);
        let lo = q2.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        Ok((lo, q2))
    };
    let (l60, q2) = match leftmost(lab, 60) {
        Ok(v) => v,
        Err(e) => return Outcome::new(false, format!("n=60: {e}")),
    };
    let max_im = q2.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let in_gap = q2.iter().filter(|z| z.re > KAL_GAP.0 && z.re < KAL_GAP.1).count();
    let mut pass = max_im <= IM_TOL && in_gap == 0 && l60 > KAL_WINDOW.0 && l60 < KAL_WINDOW.1;
    let mut detail = format!("n=60: max|Im| {max_im:.1e}, {in_gap} zeros in (0, 0.07), leftmost {l60:.5}");
    match (leftmost(lab, 45), leftmost(lab, 90)) {
        (Ok((l45, _)), Ok((l90, _))) => {
            let (d45, d90) = ((l45 - target).abs(), (l90 - target).abs());
            pass &= d90 < d45;
            detail += &format!("; |x-8/63| n=45 {d45:.5}, n=90 {d90:.5}");
        }
        (a, b) => {
            pass = false;
            detail += &format!("; n=45/90: {:?} {:?}", a.err(), b.err());
        }
    }
    Outcome::new(pass, detail)
}

fn c3_markov(lab: &mut Lab) -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=20 {
        let prec = digits_for(n);
        let r = match lab.preset("markov_sqrt", n, prec, true) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("n={n}: {e}"));
                continue;
            }
        };
        let poles = &r.clouds[1];
        let q = prec.quarter_tolerance_log10();
        let real = poles.points.iter().all(|z| z.to_c64().im.abs() <= 10f64.powf(q));
        let inside = poles.points_c64().iter().all(|z| z.re > -1.0 && z.re < 0.0);
        let simple = poles
            .points
            .iter()
            .enumerate()
            .all(|(i, x)| poles.points[i + 1..].iter().all(|y| !close(x, y, q, prec.bits())));
        if poles.len() != n || !real || !inside || !simple {
            bad.push(format!("n={n}: count {} real {real} inside {inside} simple {simple}", poles.len()));
        }
        if n == 1 {
            // hand solve: (z + 1/4) f - (z + 3/4) = O(1/z^2) for f = sqrt(1 + 1/z)
            let bits = prec.bits();
            let quarter = BigComplex::from_f64(-0.25, 0.0, bits);
            let tol = -(prec.digits() as f64) + 5.0;
            if !close(&poles.points[0], &quarter, tol, bits) {
                bad.push(format!("n=1 pole {} is not -1/4", poles.points[0].to_c64()));
            }
            let (p, q) = (&r.solution.polys[0], &r.solution.polys[1]);
            let ratio = |a: &BigComplex, b: &BigComplex| a.div(b, bits);
            let want = [(ratio(&p[0], &p[1]), 0.75), (ratio(&q[0], &q[1]), 0.25), (ratio(&p[1], &q[1]), -1.0)];
            for (got, v) in want {
                if !close(&got, &BigComplex::from_f64(v, 0.0, bits), tol, bits) {
                    bad.push(format!("n=1 coefficient ratio {} != {v}", got.to_c64()));
                }
            }
        }
    }
    if bad.is_empty() {
        Outcome::new(true, "n=1..20: poles simple, real, in (-1, 0); n=1 pole = -1/4, coefficients match hand solve")
    } else {
        Outcome::new(false, bad.join("; "))
    }
}

fn c4_froissart_cap(lab: &mut Lab) -> Outcome {
    let prec = Precision::new(1200).unwrap();
    let thr = Thresholds::default();
    let mut counts = Vec::new();
    let mut errors = Vec::new();
    for n in 25..=40 {
        match lab.preset("pade10", n, prec, true) {
            Ok(r) => {
                let rep = detect_doublets(n, &pts(&r.clouds[0]), &pts(&r.clouds[1]), &thr);
                counts.push((n, rep.doublets.len()));
            }
            Err(e) => errors.push(format!("n={n}: {e}")),
        }
    }
    let max = counts.iter().map(|c| c.1).max().unwrap_or(0);
    let list: Vec<String> = counts.iter().map(|(n, d)| format!("{n}:{d}")).collect();
    Outcome::new(
        errors.is_empty() && max <= 1,
        format!("doublets per n [{}]{}", list.join(" "), if errors.is_empty() { String::new() } else { format!("; {}", errors.join("; ")) }),
    )
}

fn c5_pole_shadow(lab: &mut Lab, name: &str) -> Outcome {
    let p = preset(name).unwrap();
    let mark = p.annotations.iter().find(|m| m.label == "a").expect("pole annotation");
    let a = parse_exact(&mark.at, 128).unwrap().to_c64();
    let thr = Thresholds::default();
    let mut bad = Vec::new();
    for n in 30..=40 {
        let r = match lab.preset(name, n, digits_for(n), true) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("n={n}: {e}"));
                continue;
            }
        };
        let clouds: Vec<Vec<Complex64>> = r.clouds.iter().map(pts).collect();
        let rep = classify_hermite_pade(n, [&clouds[0], &clouds[1], &clouds[2]], &thr);
        let near: Vec<usize> = (0..clouds[2].len()).filter(|&i| (clouds[2][i] - a).norm() <= SHADOW_RADIUS).collect();
        let paired = |i: usize| {
            rep.doublets.iter().any(|d| (d.first.family, d.first.index) == (2, i) || (d.second.family, d.second.index) == (2, i))
                || rep.triplets.iter().any(|t| t.members.iter().any(|m| (m.family, m.index) == (2, i)))
        };
        if near.len() != 1 || paired(near[0]) {
            bad.push(format!("n={n}: {} zeros near a, flagged {}", near.len(), near.iter().any(|&i| paired(i))));
        }
    }
    if bad.is_empty() {
        Outcome::new(true, format!("{name}: n=30..40 one Q2 zero within {SHADOW_RADIUS} of a = {a}, never in a doublet or triplet"))
    } else {
        Outcome::new(false, format!("{name}: {}", bad.join("; ")))
    }
}

fn c6_two_point(lab: &mut Lab) -> Outcome {
    let prec = digits_for(40);
    let mut pass = true;
    let mut detail = String::new();
    match lab.preset("bus210a", 40, prec, true) {
        Ok(r) => {
            let poles = pts(&r.clouds[1]);
            let max_im = poles.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            let inside = poles.iter().all(|z| z.re > 0.5 && z.re < 2.0);
            let lo = poles.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let hi = poles.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            pass &= max_im <= IM_TOL && inside && !poles.is_empty();
            detail += &format!("same branch: {} poles, max|Im| {max_im:.1e}, Re in [{lo:.4}, {hi:.4}]", poles.len());
        }
        Err(e) => {
            pass = false;
            detail += &format!("same branch: {e}");
        }
    }
    match lab.preset("bus210b", 40, prec, true) {
        Ok(r) => {
            let poles = pts(&r.clouds[1]);
            let dens = density_near(&poles, Complex64::new(1.0, 0.0), CHEBOTAREV_RADIUS).unwrap_or(f64::NAN);
            pass &= dens <= CHEBOTAREV_MAX_DENSITY;
            detail += &format!("; different branch: density near 1 = {dens:.3}");
        }
        Err(e) => {
            pass = false;
            detail += &format!("; different branch: {e}");
        }
    }
    Outcome::new(pass, detail)
}

fn c7_scale_covariance(lab: &mut Lab) -> Result<String, String> {
    let mut notes = Vec::new();
    for (name, n, c) in [("ang1", 10, "2-3i"), ("nik_1_6", 8, "-7/3"), ("markov_sqrt", 9, "1/5+i")] {
        let p = preset(name).unwrap();
        let prec = digits_for(n);
        let mut scaled = p.functions.clone();
        scaled[0] = scaled[0].scaled(c);
        let a = lab.solve(p.mode, &p.functions, n, prec, true)?;
        let b = lab.solve(p.mode, &scaled, n, prec, true)?;
        for (x, y) in a.clouds.iter().zip(&b.clouds) {
            if !same_set(&x.points, &y.points, prec.quarter_tolerance_log10(), prec.bits()) {
                return Err(format!("{name} family {} moved under f1 -> ({c}) f1", x.family));
            }
        }
        notes.push(name);
    }
    Ok(format!("scale covariance ({})", notes.join(", ")))
}

fn c7_conjugate_symmetry(lab: &mut Lab) -> Result<String, String> {
    for (name, n) in [("ang1", 12), ("nik1", 12), ("markov_sqrt", 11), ("bus210a", 12)] {
        let prec = digits_for(n);
        let r = lab.preset(name, n, prec, true)?;
        for c in &r.clouds {
            let conj: Vec<BigComplex> = c.points.iter().map(BigComplex::conj).collect();
            if !same_set(&c.points, &conj, prec.quarter_tolerance_log10(), prec.bits()) {
                return Err(format!("{name} family {} is not closed under conjugation", c.family));
            }
        }
    }
    Ok("conjugate symmetry (ang1, nik1, markov_sqrt, bus210a)".into())
}

fn c7_rational_exactness(lab: &mut Lab) -> Result<String, String> {
    let m1 = Rational::integer(-1);
    let one = Rational::integer(1);
    let simple = FunctionSpec::at_infinity("z/(z-a)", vec![Factor::new("1/2+1/4i", m1)]);
    let mobius = FunctionSpec::at_infinity("(z-b)/(z-a)", vec![Factor::new("-3/2+i", one), Factor::new("1/2+1/4i", m1)]);
    for spec in [simple, mobius] {
        for n in [1, 2, 4] {
            let prec = Precision::new(120).unwrap();
            let r = lab.solve(Mode::Pade, std::slice::from_ref(&spec), n, prec, false)?;
            // far past the forced coefficients the remainder must still vanish
            let long = build_function_series(&spec, 6 * n + 12, prec.doubled()).map_err(|e| e.to_string())?;
            let rem = remainder_series(&r.solution, &[long]).map_err(|e| e.to_string())?;
            let tol = prec.half_tolerance_log10();
            for s in &rem {
                for t in 0..s.coeffs.len() {
                    if !s.relative(t).at_most_pow10(tol) {
                        return Err(format!("{} n={n}: remainder coefficient {t} is {}", spec.label, s.relative(t)));
                    }
                }
            }
        }
    }
    Ok("rational exactness (z/(z-a), (z-b)/(z-a), n = 1, 2, 4, whole remainder)".into())
}

fn c7_root_count(lab: &mut Lab) -> Result<String, String> {
    let mut checked = 0;
    for (name, n) in [("ang1", 10), ("nik1", 9), ("pade10", 12), ("dumas", 8), ("bus205c", 10), ("ang3_h0_5", 7)] {
        let prec = digits_for(n);
        let r = lab.preset(name, n, prec, true)?;
        for (c, poly) in r.clouds.iter().zip(&r.solution.polys) {
            // degree after dropping leading coefficients below 10^{-d/2} of the largest
            let logs: Vec<f64> = poly.iter().map(|x| x.log2_abs()).collect();
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let floor = max + prec.half_tolerance_log10() * std::f64::consts::LOG2_10;
            let degree = logs.iter().rposition(|l| *l > floor).unwrap_or(0);
            if c.len() != c.effective_degree || c.effective_degree != degree {
                return Err(format!(
                    "{name} family {}: {} roots, effective degree {}, coefficient degree {degree}",
                    c.family,
                    c.len(),
                    c.effective_degree
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("root count = effective degree ({checked} polynomials)"))
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn c7_determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = RunConfig::for_preset("ang1");
    cfg.degrees = Some(Degrees::parse("6..8").unwrap());
    cfg.digits = Some(200);
    cfg.out = tmp.path().join("out");
    cfg.cache_dir = Some(tmp.path().join("cache"));
    let mut snapshots = Vec::new();
    // cold cache, warm cache, then warm with more workers
    for workers in [1, 1, 3] {
        cfg.workers = workers;
        let outcome = hplab::run(&cfg).map_err(|e| e.to_string())?;
        if outcome.manifest.failed() > 0 {
            return Err("a degree failed".into());
        }
        for a in outcome.manifest.runs.iter().flat_map(|r| &r.artifacts).chain(&outcome.manifest.sweep_artifacts) {
            let bytes = std::fs::read(cfg.out.join(&a.path)).map_err(|e| e.to_string())?;
            if sha256_hex(&bytes) != a.sha256 {
                return Err(format!("manifest hash of {} does not match the file", a.path));
            }
        }
        snapshots.push(tree(&cfg.out));
    }
    let files = snapshots[0].len();
    if snapshots[0] != snapshots[1] {
        return Err("cold and warm reruns differ".into());
    }
    // the manifest echoes the config, so its worker count is the one
    // expected difference
    let manifest = |s: &mut BTreeMap<String, Vec<u8>>| -> serde_json::Value {
        let mut m: serde_json::Value = serde_json::from_slice(&s.remove(hplab::pipeline::MANIFEST).unwrap()).unwrap();
        m["config"]["workers"] = serde_json::Value::Null;
        m
    };
    let (mut a, mut b) = (snapshots[1].clone(), snapshots[2].clone());
    if manifest(&mut a) != manifest(&mut b) || a != b {
        return Err("reruns with more workers differ".into());
    }
    Ok(format!("byte-identical reruns ({files} files, cold/warm cache, 1 and 3 workers)"))
}

fn c7_invariants(lab: &mut Lab) -> Outcome {
    let parts = [
        c7_scale_covariance(lab),
        c7_conjugate_symmetry(lab),
        c7_rational_exactness(lab),
        c7_root_count(lab),
        c7_determinism(),
    ];
    let pass = parts.iter().all(Result::is_ok);
    let detail: Vec<String> = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect();
    Outcome::new(pass, detail.join("; "))
}

fn c8_angelesco_nikishin(lab: &mut Lab) -> Outcome {
    let thr = Thresholds::default();
    let mut line = String::new();
    let mut pass = false;
    for n in [40, 41] {
        let prec = digits_for(n);
        let (a, b) = match (lab.preset("ang1", n, prec, true), lab.preset("nik1", n, prec, true)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => return Outcome::new(false, format!("n={n}: {:?} {:?}", a.err(), b.err())),
        };
        let h = hausdorff(&union(&a), &union(&b));
        // the same comparison with Froissart structures removed
        let clean = |r: &DegreeResult| -> Vec<Complex64> {
            let clouds: Vec<Vec<Complex64>> = r.clouds.iter().map(pts).collect();
            let rep = classify_hermite_pade(n, [&clouds[0], &clouds[1], &clouds[2]], &thr);
            let mut out = Vec::new();
            for (f, c) in clouds.iter().enumerate() {
                out.extend(c.iter().enumerate().filter(|(i, _)| !rep.contains(f, *i)).map(|(_, z)| *z));
            }
            out
        };
        let hc = hausdorff(&clean(&a), &clean(&b));
        if n == 40 {
            pass = h < HAUSDORFF_TOL;
            line += &format!("n=40 distance {h:.4} (tolerance {HAUSDORFF_TOL}), without flagged points {hc:.4}");
        } else {
            line += &format!("; n=41 distance {h:.4}, without flagged points {hc:.4}");
        }
    }
    Outcome::new(pass, line)
}

fn main() -> ExitCode {
    let mut lab = Lab { cache: SeriesCache::new(None) };
    type Check = fn(&mut Lab) -> Outcome;
    let checks: [(&str, &str, bool, Check); 9] = [
        ("1", "order of contact", true, c1_order_of_contact),
        ("2", "pushing of the Markov pair", true, c2_kalyagin),
        ("3", "Markov Pade poles", true, c3_markov),
        ("4", "at most one Froissart doublet", true, c4_froissart_cap),
        ("5", "pole shadow (a = i sqrt(3) 1.6)", true, |l| c5_pole_shadow(l, "nik_1_6")),
        ("5", "pole shadow (a = 1.6i)", true, |l| c5_pole_shadow(l, "nik_1_6_text")),
        ("6", "two-point segment and Chebotarev gap", true, c6_two_point),
        ("7", "invariants", true, c7_invariants),
        ("8", "Angelesco/Nikishin cloud distance (exploratory)", false, c8_angelesco_nikishin),
    ];
    let mut hard_failures = 0;
    for (id, name, hard, check) in checks {
        let t = Instant::now();
        let o = check(&mut lab);
        let verdict = match (o.pass, hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (recorded, not gating)",
        };
        if !o.pass && hard {
            hard_failures += 1;
        }
        println!("{verdict} criterion {id} {name} [{:.0}s]: {}", t.elapsed().as_secs_f64(), o.detail);
    }
    if hard_failures > 0 {
        println!("{hard_failures} gating criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
