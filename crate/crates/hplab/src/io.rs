//! File formats: solutions and root clouds as decimal-string JSON and CSV,
//! potential grids as CSV.

use std::collections::BTreeMap;

use hplab_core::analysis::GridValue;
use hplab_core::astro_float::Consts;
use hplab_core::num::bf_to_decimal;
use hplab_core::{BigComplex, HpSolution, Magnitude, RootCloud, SystemKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad value {value:?} in row {row}")]
    Value { row: usize, value: String },
}

pub fn consts() -> Consts {
    Consts::new().expect("constant cache allocates")
}

fn dec(c: &BigComplex, sig: usize, cc: &mut Consts) -> (String, String) {
    (bf_to_decimal(&c.re, sig, cc), bf_to_decimal(&c.im, sig, cc))
}

pub fn kind_name(kind: SystemKind) -> &'static str {
    match kind {
        SystemKind::Pade => "pade",
        SystemKind::HermitePade => "hermite_pade",
        SystemKind::TwoPoint => "two_point",
    }
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    kind: &'a str,
    n: usize,
    digits: u32,
    normalization: &'a str,
    rank: usize,
    kernel_defect: usize,
    residual_norm: Magnitude,
    /// `polys[family][k]` is the coefficient of `z^k` as `[re, im]`.
    polys: Vec<Vec<(String, String)>>,
}

pub fn solution_json(sol: &HpSolution, sig: usize) -> String {
    let mut cc = consts();
    let doc = SolutionDoc {
        kind: kind_name(sol.kind),
        n: sol.n,
        digits: sol.precision.digits(),
        normalization: "max_coefficient",
        rank: sol.rank,
        kernel_defect: sol.kernel_defect,
        residual_norm: sol.residual_norm,
        polys: sol.polys.iter().map(|p| p.iter().map(|c| dec(c, sig, &mut cc)).collect()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("solutions serialize");
    s.push('\n');
    s
}

/// One CSV row: `family,n,re,im,residual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudRow {
    pub family: usize,
    pub n: usize,
    pub re: String,
    pub im: String,
    pub residual: String,
}

pub fn clouds_csv(clouds: &[RootCloud], sig: usize) -> String {
    let mut cc = consts();
    let mut w = csv::Writer::from_writer(Vec::new());
    // the header is written even when every cloud is empty
    w.write_record(["family", "n", "re", "im", "residual"]).expect("in-memory write");
    for c in clouds {
        for (z, r) in c.points.iter().zip(&c.residuals) {
            let (re, im) = dec(z, sig, &mut cc);
            w.write_record([c.family.to_string(), c.n.to_string(), re, im, r.to_string()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn read_clouds_csv(text: &str) -> Result<Vec<CloudRow>, FormatError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Points grouped by `(n, family)`, parsed to `f64`.
pub fn group_rows(rows: &[CloudRow]) -> Result<BTreeMap<(usize, usize), Vec<Complex64>>, FormatError> {
    let mut out: BTreeMap<(usize, usize), Vec<Complex64>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let re: f64 = r.re.parse().map_err(|_| FormatError::Value { row: i + 1, value: r.re.clone() })?;
        let im: f64 = r.im.parse().map_err(|_| FormatError::Value { row: i + 1, value: r.im.clone() })?;
        out.entry((r.n, r.family)).or_default().push(Complex64::new(re, im));
    }
    Ok(out)
}

#[derive(Serialize)]
struct PointDoc {
    re: String,
    im: String,
    residual: Magnitude,
    uncertified: bool,
}

#[derive(Serialize)]
struct CloudDoc {
    family: usize,
    n: usize,
    digits: u32,
    effective_degree: usize,
    converged: bool,
    iterations: usize,
    certified: bool,
    points: Vec<PointDoc>,
}

pub fn clouds_json(clouds: &[RootCloud], sig: usize) -> String {
    let mut cc = consts();
    let docs: Vec<CloudDoc> = clouds
        .iter()
        .map(|c| CloudDoc {
            family: c.family,
            n: c.n,
            digits: c.digits,
            effective_degree: c.effective_degree,
            converged: c.converged,
            iterations: c.iterations,
            certified: c.certified(),
            points: c
                .points
                .iter()
                .zip(&c.residuals)
                .zip(&c.uncertified)
                .map(|((z, r), u)| {
                    let (re, im) = dec(z, sig, &mut cc);
                    PointDoc { re, im, residual: *r, uncertified: *u }
                })
                .collect(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&docs).expect("clouds serialize");
    s.push('\n');
    s
}

pub fn grid_csv(grid: &[GridValue]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "value"]).expect("in-memory write");
    for g in grid {
        w.write_record([g.x.to_string(), g.y.to_string(), g.value.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}
