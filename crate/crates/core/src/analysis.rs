//! Observables on root clouds, in `f64`: spurious structures, the pushing
//! point, nearest points and densities, counting-measure discrepancy and the
//! max-potential grid.
//!
//! Thresholds are relative to the median nearest-neighbour distance of the
//! clouds involved, so every detector is invariant under translation,
//! rotation and scaling of the plane.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::roots::RootCloud;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("parameter {0} outside (0, 1)")]
    Domain(f64),
    #[error("no points left after filtering")]
    Empty,
    #[error("cloud has {0} points, at least {1} needed")]
    TooFewPoints(usize, usize),
    #[error("degenerate cloud: median nearest-neighbour distance is zero")]
    Degenerate,
    #[error("grid point {x}+{y}i lies within {clearance} of a root")]
    Clearance { x: f64, y: f64, clearance: f64 },
    #[error("invalid grid: {0}")]
    Grid(&'static str),
}

/// Detector parameters, echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// A point is a spurious candidate when its nearest-neighbour distance
    /// exceeds `isolation_factor` times its family median.
    pub isolation_factor: f64,
    /// Pairing radius `eps_pair = pair_factor * d_med(union)`.
    pub pair_factor: f64,
    /// A singlet has no point of another family within
    /// `singlet_factor * d_med(own family)`.
    pub singlet_factor: f64,
    /// Clouds smaller than this yield no candidates.
    pub min_points: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { isolation_factor: 3.0, pair_factor: 0.5, singlet_factor: 3.0, min_points: 8 }
    }
}

/// `(1 - a)^3 / (9 (a^2 - a + 1))`, the left end of the pushed support for
/// the Markov pair on `[-a, 0]`, `[0, 1]`.
pub fn kalyagin_point(a: f64) -> Result<f64, AnalysisError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(AnalysisError::Domain(a));
    }
    Ok((1.0 - a).powi(3) / (9.0 * (a * a - a + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushingGap {
    pub leftmost: f64,
    /// No point of the whole cloud (any imaginary part) has its real part
    /// in `(lo, leftmost)`.
    pub gap_verified: bool,
}

/// Leftmost real part among points with `|Im| <= im_tol`, `Re` in `(lo, hi)`.
pub fn pushing_gap(points: &[Complex64], lo: f64, hi: f64, im_tol: f64) -> Result<PushingGap, AnalysisError> {
    let leftmost = points
        .iter()
        .filter(|z| z.im.abs() <= im_tol && z.re > lo && z.re < hi)
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if leftmost == f64::INFINITY {
        return Err(AnalysisError::Empty);
    }
    let gap_verified = !points.iter().any(|z| z.re > lo && z.re < leftmost);
    Ok(PushingGap { leftmost, gap_verified })
}

/// Distance from each point to its nearest other point.
pub fn nearest_neighbour_distances(points: &[Complex64]) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(i, z)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, w)| (z - w).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.is_empty() {
        f64::NAN
    } else if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// Median nearest-neighbour distance.
pub fn median_spacing(points: &[Complex64]) -> f64 {
    median(&nearest_neighbour_distances(points))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub isolation: f64,
}

impl Candidate {
    pub fn point(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Points whose nearest-neighbour distance exceeds
/// `isolation_factor * d_med`.
pub fn spurious_candidates(points: &[Complex64], thr: &Thresholds) -> Result<Vec<Candidate>, AnalysisError> {
    if points.len() < thr.min_points {
        return Err(AnalysisError::TooFewPoints(points.len(), thr.min_points));
    }
    let nn = nearest_neighbour_distances(points);
    let dmed = median(&nn);
    if !(dmed > 0.0) {
        return Err(AnalysisError::Degenerate);
    }
    Ok(nn
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > thr.isolation_factor * dmed)
        .map(|(index, d)| Candidate { index, re: points[index].re, im: points[index].im, isolation: *d })
        .collect())
}

/// Candidates, or none for clouds too small or degenerate to judge.
fn candidates_or_none(points: &[Complex64], thr: &Thresholds) -> Vec<Candidate> {
    spurious_candidates(points, thr).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub family: usize,
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

impl Member {
    fn of(family: usize, c: &Candidate) -> Self {
        Self { family, index: c.index, re: c.re, im: c.im }
    }

    pub fn point(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Doublet {
    pub first: Member,
    pub second: Member,
    pub separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singlet {
    pub member: Member,
    /// Distance to the nearest point of any other family.
    pub isolation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub members: [Member; 3],
    pub max_separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FroissartReport {
    pub n: usize,
    pub doublets: Vec<Doublet>,
    pub singlets: Vec<Singlet>,
    pub triplets: Vec<Triplet>,
    pub thresholds_used: Thresholds,
    /// Pairing radius actually applied.
    pub eps_pair: f64,
}

impl FroissartReport {
    fn empty(n: usize, thr: &Thresholds) -> Self {
        Self { n, doublets: Vec::new(), singlets: Vec::new(), triplets: Vec::new(), thresholds_used: *thr, eps_pair: 0.0 }
    }

    /// Every point taking part in some structure.
    pub fn members(&self) -> Vec<Member> {
        let mut v = Vec::new();
        for d in &self.doublets {
            v.push(d.first);
            v.push(d.second);
        }
        for t in &self.triplets {
            v.extend_from_slice(&t.members);
        }
        for s in &self.singlets {
            v.push(s.member);
        }
        v
    }

    pub fn contains(&self, family: usize, index: usize) -> bool {
        self.members().iter().any(|m| m.family == family && m.index == index)
    }
}

fn union(clouds: &[&[Complex64]]) -> Vec<Complex64> {
    clouds.iter().flat_map(|c| c.iter().copied()).collect()
}

/// Greedy minimum-distance matching of candidates from two families.
fn pair_up(
    fa: usize,
    a: &[Candidate],
    fb: usize,
    b: &[Candidate],
    eps: f64,
    used: &mut Vec<(usize, usize)>,
) -> Vec<Doublet> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let d = (x.point() - y.point()).norm();
            if d < eps {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut out = Vec::new();
    for (d, i, j) in pairs {
        let (ka, kb) = ((fa, a[i].index), (fb, b[j].index));
        if used.contains(&ka) || used.contains(&kb) {
            continue;
        }
        used.push(ka);
        used.push(kb);
        out.push(Doublet { first: Member::of(fa, &a[i]), second: Member::of(fb, &b[j]), separation: d });
    }
    out
}

/// Zero-pole doublets of a Padé approximant: spurious candidates of the two
/// clouds closer than `eps_pair = pair_factor * d_med(zeros + poles)`.
pub fn detect_doublets(n: usize, zeros: &[Complex64], poles: &[Complex64], thr: &Thresholds) -> FroissartReport {
    let mut report = FroissartReport::empty(n, thr);
    let dmed = median_spacing(&union(&[zeros, poles]));
    if !(dmed > 0.0) {
        return report;
    }
    report.eps_pair = thr.pair_factor * dmed;
    let cz = candidates_or_none(zeros, thr);
    let cp = candidates_or_none(poles, thr);
    report.doublets = pair_up(0, &cz, 1, &cp, report.eps_pair, &mut Vec::new());
    report
}

/// Triples of spurious candidates, one per family, pairwise closer than
/// `eps_pair` (median spacing of the union of the three clouds).
pub fn detect_triplets(n: usize, clouds: [&[Complex64]; 3], thr: &Thresholds) -> FroissartReport {
    let mut report = FroissartReport::empty(n, thr);
    let dmed = median_spacing(&union(&clouds));
    if !(dmed > 0.0) {
        return report;
    }
    let eps = thr.pair_factor * dmed;
    report.eps_pair = eps;
    let cands: Vec<Vec<Candidate>> = clouds.iter().map(|c| candidates_or_none(c, thr)).collect();
    report.triplets = match_triplets(&cands, eps);
    report
}

fn match_triplets(cands: &[Vec<Candidate>], eps: f64) -> Vec<Triplet> {
    let mut triples: Vec<(f64, usize, usize, usize)> = Vec::new();
    for (i, a) in cands[0].iter().enumerate() {
        for (j, b) in cands[1].iter().enumerate() {
            let dab = (a.point() - b.point()).norm();
            if dab >= eps {
                continue;
            }
            for (k, c) in cands[2].iter().enumerate() {
                let dac = (a.point() - c.point()).norm();
                let dbc = (b.point() - c.point()).norm();
                if dac < eps && dbc < eps {
                    triples.push((dab.max(dac).max(dbc), i, j, k));
                }
            }
        }
    }
    triples.sort_by(|p, q| p.0.total_cmp(&q.0).then((p.1, p.2, p.3).cmp(&(q.1, q.2, q.3))));
    let mut used = [Vec::new(), Vec::new(), Vec::new()];
    let mut out = Vec::new();
    for (d, i, j, k) in triples {
        if used[0].contains(&i) || used[1].contains(&j) || used[2].contains(&k) {
            continue;
        }
        used[0].push(i);
        used[1].push(j);
        used[2].push(k);
        out.push(Triplet {
            members: [Member::of(0, &cands[0][i]), Member::of(1, &cands[1][j]), Member::of(2, &cands[2][k])],
            max_separation: d,
        });
    }
    out
}

/// Spurious candidates with no point of another family within
/// `singlet_factor * d_med` of their own family; triplet members excluded.
pub fn detect_singlets(n: usize, clouds: [&[Complex64]; 3], thr: &Thresholds) -> FroissartReport {
    let trip = detect_triplets(n, clouds, thr);
    let mut report = FroissartReport::empty(n, thr);
    report.eps_pair = trip.eps_pair;
    let taken: Vec<(usize, usize)> = trip.members().iter().map(|m| (m.family, m.index)).collect();
    report.singlets = singlets_excluding(&clouds, thr, &taken);
    report
}

fn singlets_excluding(clouds: &[&[Complex64]], thr: &Thresholds, taken: &[(usize, usize)]) -> Vec<Singlet> {
    let mut out = Vec::new();
    for (f, cloud) in clouds.iter().enumerate() {
        let dmed = median_spacing(cloud);
        for c in candidates_or_none(cloud, thr) {
            if taken.contains(&(f, c.index)) {
                continue;
            }
            let cross = clouds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, o)| o.iter())
                .map(|w| (c.point() - w).norm())
                .fold(f64::INFINITY, f64::min);
            if cross > thr.singlet_factor * dmed {
                out.push(Singlet { member: Member::of(f, &c), isolation: cross });
            }
        }
    }
    out
}

/// Full classification of a three-family Hermite-Padé run: triplets first,
/// then cross-family doublets among the remaining candidates, then singlets.
/// No point belongs to two structures.
pub fn classify_hermite_pade(n: usize, clouds: [&[Complex64]; 3], thr: &Thresholds) -> FroissartReport {
    let mut report = detect_triplets(n, clouds, thr);
    if report.eps_pair == 0.0 {
        return report;
    }
    let cands: Vec<Vec<Candidate>> = clouds.iter().map(|c| candidates_or_none(c, thr)).collect();
    let mut used: Vec<(usize, usize)> = report.members().iter().map(|m| (m.family, m.index)).collect();
    for (fa, fb) in [(0, 1), (0, 2), (1, 2)] {
        let d = pair_up(fa, &cands[fa], fb, &cands[fb], report.eps_pair, &mut used);
        report.doublets.extend(d);
    }
    report.singlets = singlets_excluding(&clouds, thr, &used);
    report
}

/// Padé classification: doublets, then unpaired candidates isolated from the
/// other family as singlets.
pub fn classify_pade(n: usize, zeros: &[Complex64], poles: &[Complex64], thr: &Thresholds) -> FroissartReport {
    let mut report = detect_doublets(n, zeros, poles, thr);
    let used: Vec<(usize, usize)> = report.members().iter().map(|m| (m.family, m.index)).collect();
    report.singlets = singlets_excluding(&[zeros, poles], thr, &used);
    report
}

/// How far matched structures move between consecutive degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureDrift {
    pub n: usize,
    pub next_n: usize,
    /// For each structure at `n`, the distance to the nearest structure at
    /// `next_n` (infinite when there is none).
    pub distances: Vec<f64>,
}

fn centroids(r: &FroissartReport) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = r.doublets.iter().map(|d| (d.first.point() + d.second.point()) / 2.0).collect();
    v.extend(r.triplets.iter().map(|t| t.members.iter().map(|m| m.point()).sum::<Complex64>() / 3.0));
    v.extend(r.singlets.iter().map(|s| s.member.point()));
    v
}

/// Sweep statistic over reports given in any order.
pub fn structure_drift(reports: &[FroissartReport]) -> Vec<StructureDrift> {
    let mut sorted: Vec<&FroissartReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.n);
    sorted
        .windows(2)
        .map(|w| {
            let next = centroids(w[1]);
            let distances = centroids(w[0])
                .iter()
                .map(|c| next.iter().map(|d| (c - d).norm()).fold(f64::INFINITY, f64::min))
                .collect();
            StructureDrift { n: w[0].n, next_n: w[1].n, distances }
        })
        .collect()
}

/// Nearest point to `target` and its distance.
pub fn nearest_to(points: &[Complex64], target: Complex64) -> Result<(Complex64, f64), AnalysisError> {
    points
        .iter()
        .map(|z| (*z, (z - target).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(AnalysisError::Empty)
}

/// Fraction of points with `|z - target| <= radius`.
pub fn density_near(points: &[Complex64], target: Complex64, radius: f64) -> Result<f64, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let k = points.iter().filter(|z| (*z - target).norm() <= radius).count();
    Ok(k as f64 / points.len() as f64)
}

/// Zero-counting measure `chi(Q) / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingMeasure {
    pub points: Vec<Complex64>,
    pub weight: f64,
}

impl CountingMeasure {
    pub fn new(points: Vec<Complex64>, n: usize) -> Self {
        Self { points, weight: 1.0 / n.max(1) as f64 }
    }

    pub fn from_cloud(cloud: &RootCloud) -> Self {
        Self::new(cloud.points_c64(), cloud.n)
    }

    pub fn total_mass(&self) -> f64 {
        self.points.len() as f64 * self.weight
    }
}

fn directed_hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between point sets (0 for two empty sets,
/// infinite when exactly one is empty).
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed_hausdorff(a, b).max(directed_hausdorff(b, a)),
    }
}

/// Hausdorff distance of the supports plus the difference of total masses.
pub fn measure_discrepancy(m1: &CountingMeasure, m2: &CountingMeasure) -> f64 {
    hausdorff(&m1.points, &m2.points) + (m1.total_mass() - m2.total_mass()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Minimal allowed distance between a grid point and any root.
    pub clearance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridValue {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// `max_j log|Q_j(z)| / n` over the given clouds on a rectangular grid, with
/// `log|Q_j(z)| = log|lead_j| + sum_k log|z - z_k|`.
pub fn potential_grid(clouds: &[&RootCloud], grid: &GridSpec, n: usize) -> Result<Vec<GridValue>, AnalysisError> {
    if clouds.is_empty() || clouds.iter().all(|c| c.is_empty()) {
        return Err(AnalysisError::Empty);
    }
    if grid.nx < 2 || grid.ny < 2 || !(grid.re.1 > grid.re.0) || !(grid.im.1 > grid.im.0) {
        return Err(AnalysisError::Grid("need at least 2x2 points over a non-empty rectangle"));
    }
    let pts: Vec<Vec<Complex64>> = clouds.iter().map(|c| c.points_c64()).collect();
    let scale = 1.0 / n.max(1) as f64;
    let mut out = Vec::with_capacity(grid.nx * grid.ny);
    for iy in 0..grid.ny {
        let y = grid.im.0 + (grid.im.1 - grid.im.0) * iy as f64 / (grid.ny - 1) as f64;
        for ix in 0..grid.nx {
            let x = grid.re.0 + (grid.re.1 - grid.re.0) * ix as f64 / (grid.nx - 1) as f64;
            let z = Complex64::new(x, y);
            let mut best = f64::NEG_INFINITY;
            for (cloud, p) in clouds.iter().zip(&pts) {
                let mut s = cloud.leading_log2 * core::f64::consts::LN_2;
                for r in p {
                    let d = (z - r).norm();
                    if d < grid.clearance {
                        return Err(AnalysisError::Clearance { x, y, clearance: grid.clearance });
                    }
                    s += d.ln();
                }
                best = best.max(s);
            }
            out.push(GridValue { x, y, value: best * scale });
        }
    }
    Ok(out)
}

/// Grid of `n` evenly spaced points on a segment, for tests and examples.
pub fn segment(a: Complex64, b: Complex64, n: usize) -> Vec<Complex64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * (k as f64 / (n - 1) as f64)).collect()
}
