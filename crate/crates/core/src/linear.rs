//! Order-condition systems and their kernel.
//!
//! Unknowns are the coefficients of the polynomials `Q_0, Q_1[, Q_2]`, laid
//! out family-major (`Q_0` degrees `0..=n`, then `Q_1`, ...). Each row kills
//! one power `z^j` of `Q_0 f_0 + Q_1 f_1 + ...` with `f_0 = 1`.
//!
//! * Hermite-Padé: rows `z^n .. z^{-(2n+1)}` at infinity, entry
//!   `c^{(i)}_{k-j}` (zero for negative index).
//! * Padé: rows `z^n .. z^{-n}` at infinity, two families.
//! * Two-point: rows `z^0 .. z^n` at zero, then `z^n .. z^1` at infinity.
//!   The approximant is `-Q_0 / Q_1`, so the poles are the zeros of `Q_1`.

use alloc::vec;
use alloc::vec::Vec;


use crate::num::BigComplex;
use crate::precision::{Magnitude, Precision, PrecisionError};
use crate::series::Series;
use crate::spec::ExpansionPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Pade,
    HermitePade,
    TwoPoint,
}

impl SystemKind {
    pub fn families(self) -> usize {
        match self {
            SystemKind::HermitePade => 3,
            _ => 2,
        }
    }

    /// Number of order conditions for degree `n`.
    pub fn rows(self, n: usize) -> usize {
        match self {
            SystemKind::HermitePade => 3 * n + 2,
            _ => 2 * n + 1,
        }
    }

    /// Series length needed per input function.
    pub fn series_len(self, n: usize) -> usize {
        match self {
            SystemKind::HermitePade => 3 * n + 2,
            SystemKind::Pade => 2 * n + 1,
            SystemKind::TwoPoint => n + 1,
        }
    }
}

/// The power `z^exponent` a row removes, and where the expansion is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowLabel {
    pub point: ExpansionPoint,
    pub exponent: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColLabel {
    pub family: usize,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct OrderSystem {
    pub kind: SystemKind,
    pub n: usize,
    pub precision: Precision,
    pub matrix: Vec<Vec<BigComplex>>,
    pub row_labels: Vec<RowLabel>,
    pub col_labels: Vec<ColLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Largest coefficient over all families set to exactly 1.
    MaxCoefficient,
}

#[derive(Debug, Clone)]
pub struct HpSolution {
    pub kind: SystemKind,
    pub n: usize,
    pub precision: Precision,
    /// One coefficient vector (ascending degree, length `n + 1`) per family.
    pub polys: Vec<Vec<BigComplex>>,
    pub normalization: Normalization,
    pub rank: usize,
    /// Kernel dimension minus one.
    pub kernel_defect: usize,
    /// `|M q|_inf / (|M|_inf |q|_inf)` on the unreduced matrix.
    pub residual_norm: Magnitude,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinearError {
    #[error(transparent)]
    Precision(#[from] PrecisionError),
    #[error("series too short: need {needed} coefficients, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("expected {expected} series, got {got}")]
    SeriesCount { expected: usize, got: usize },
    #[error("order-condition matrix is zero")]
    ZeroMatrix,
    #[error("kernel residual {residual} exceeds tolerance; retry with about {suggested_digits} digits")]
    CatastrophicResidual { residual: Magnitude, suggested_digits: u32 },
    #[error("order condition fails at z^{exponent} ({point:?}): relative remainder {magnitude}")]
    OrderFailure { point: ExpansionPoint, exponent: i64, magnitude: Magnitude },
}

fn need(s: &Series, len: usize) -> Result<(), LinearError> {
    if s.len() < len {
        return Err(LinearError::SeriesTooShort { needed: len, got: s.len() });
    }
    Ok(())
}

fn coeff(s: Option<&Series>, m: i64, p: usize) -> BigComplex {
    match s {
        // f_0 = 1
        None => {
            if m == 0 {
                BigComplex::one(p)
            } else {
                BigComplex::zero()
            }
        }
        Some(s) => {
            if m < 0 {
                BigComplex::zero()
            } else {
                s.coeffs[m as usize].clone()
            }
        }
    }
}

fn cols(families: usize, n: usize) -> Vec<ColLabel> {
    (0..families).flat_map(|family| (0..=n).map(move |degree| ColLabel { family, degree })).collect()
}

fn at_infinity(fams: &[Option<&Series>], n: usize, js: impl Iterator<Item = i64>, p: usize) -> (Vec<Vec<BigComplex>>, Vec<RowLabel>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for j in js {
        let mut row = Vec::with_capacity(fams.len() * (n + 1));
        for f in fams {
            for k in 0..=n as i64 {
                row.push(coeff(*f, k - j, p));
            }
        }
        rows.push(row);
        labels.push(RowLabel { point: ExpansionPoint::Infinity, exponent: j });
    }
    (rows, labels)
}

/// Type-I Hermite-Padé system for `(1, f_1, f_2)` at infinity.
pub fn build_hp_system(f1: &Series, f2: &Series, n: usize) -> Result<OrderSystem, LinearError> {
    f1.precision.ensure_same(f2.precision)?;
    let len = SystemKind::HermitePade.series_len(n);
    need(f1, len)?;
    need(f2, len)?;
    let p = f1.precision.bits();
    let n_i = n as i64;
    let (matrix, row_labels) = at_infinity(&[None, Some(f1), Some(f2)], n, (-(2 * n_i + 1)..=n_i).rev(), p);
    Ok(OrderSystem { kind: SystemKind::HermitePade, n, precision: f1.precision, matrix, row_labels, col_labels: cols(3, n) })
}

/// Diagonal Padé system for `(1, f)` at infinity.
pub fn build_pade_system(f: &Series, n: usize) -> Result<OrderSystem, LinearError> {
    need(f, SystemKind::Pade.series_len(n))?;
    let p = f.precision.bits();
    let n_i = n as i64;
    let (matrix, row_labels) = at_infinity(&[None, Some(f)], n, (-n_i..=n_i).rev(), p);
    Ok(OrderSystem { kind: SystemKind::Pade, n, precision: f.precision, matrix, row_labels, col_labels: cols(2, n) })
}

/// Two-point Padé system: `n + 1` conditions at zero, `n` at infinity.
pub fn build_two_point_system(at_zero: &Series, at_inf: &Series, n: usize) -> Result<OrderSystem, LinearError> {
    at_zero.precision.ensure_same(at_inf.precision)?;
    let len = SystemKind::TwoPoint.series_len(n);
    need(at_zero, len)?;
    need(at_inf, len)?;
    let p = at_zero.precision.bits();
    let n_i = n as i64;
    let mut matrix = Vec::with_capacity(2 * n + 1);
    let mut row_labels = Vec::with_capacity(2 * n + 1);
    for j in 0..=n_i {
        let mut row = Vec::with_capacity(2 * (n + 1));
        for k in 0..=n_i {
            row.push(if k == j { BigComplex::one(p) } else { BigComplex::zero() });
        }
        for k in 0..=n_i {
            row.push(coeff(Some(at_zero), j - k, p));
        }
        matrix.push(row);
        row_labels.push(RowLabel { point: ExpansionPoint::Zero, exponent: j });
    }
    let (rows, labels) = at_infinity(&[None, Some(at_inf)], n, (1..=n_i).rev(), p);
    matrix.extend(rows);
    row_labels.extend(labels);
    Ok(OrderSystem { kind: SystemKind::TwoPoint, n, precision: at_zero.precision, matrix, row_labels, col_labels: cols(2, n) })
}

/// `log2` of a sum of magnitudes given by their `log2`.
pub(crate) fn log2_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.filter(|t| *t > f64::NEG_INFINITY).collect();
    let Some(max) = v.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    let s: f64 = v.iter().map(|t| (t - max).exp2()).sum();
    max + s.log2()
}

/// Kernel vector by Gaussian elimination with partial pivoting.
///
/// A column is pivotless when its best candidate is at most
/// `10^{-digits/2}` times the original scale of that candidate's row. The
/// last pivotless column is set to 1, the others to 0.
pub fn kernel_solve(sys: &OrderSystem) -> Result<HpSolution, LinearError> {
    let p = sys.precision.bits();
    let nrows = sys.matrix.len();
    let ncols = sys.col_labels.len();
    let row_scale: Vec<f64> =
        sys.matrix.iter().map(|r| r.iter().map(|x| x.log2_abs()).fold(f64::NEG_INFINITY, f64::max)).collect();
    if row_scale.iter().all(|s| *s == f64::NEG_INFINITY) {
        return Err(LinearError::ZeroMatrix);
    }
    let tol = sys.precision.half_tolerance_log10() * core::f64::consts::LOG2_10;

    let mut a: Vec<Vec<BigComplex>> = sys.matrix.clone();
    let mut scale = row_scale.clone();
    // pivots[c] = row holding the pivot for column c
    let mut pivots: Vec<Option<usize>> = vec![None; ncols];
    let mut next = 0usize;
    for col in 0..ncols {
        if next == nrows {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for r in next..nrows {
            let m = a[r][col].log2_abs();
            if m > best.map_or(f64::NEG_INFINITY, |b| b.1) {
                best = Some((r, m));
            }
        }
        let Some((br, bm)) = best else { continue };
        if bm <= tol + scale[br] {
            continue;
        }
        a.swap(next, br);
        scale.swap(next, br);
        let (top, rest) = a.split_at_mut(next + 1);
        let prow = &top[next];
        let inv = prow[col].recip(p);
        for row in rest.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].mul(&inv, p);
            row[col] = BigComplex::zero();
            for c in col + 1..ncols {
                if prow[c].is_zero() {
                    continue;
                }
                row[c] = row[c].sub_mul(&factor, &prow[c], p);
            }
        }
        pivots[col] = Some(next);
        next += 1;
    }
    let rank = next;
    let free = (0..ncols).rev().find(|c| pivots[*c].is_none()).expect("more columns than rows");

    let mut q = vec![BigComplex::zero(); ncols];
    q[free] = BigComplex::one(p);
    for col in (0..ncols).rev() {
        let Some(r) = pivots[col] else { continue };
        let mut acc = BigComplex::zero();
        for c in col + 1..ncols {
            if a[r][c].is_zero() || q[c].is_zero() {
                continue;
            }
            acc = acc.add(&a[r][c].mul(&q[c], p), p);
        }
        q[col] = acc.neg().div(&a[r][col], p);
    }

    // normalize so the largest coefficient is exactly 1
    let mut imax = 0;
    let mut lmax = f64::NEG_INFINITY;
    for (i, x) in q.iter().enumerate() {
        let l = x.log2_abs();
        if l > lmax {
            lmax = l;
            imax = i;
        }
    }
    let pivot = q[imax].clone();
    for (i, x) in q.iter_mut().enumerate() {
        *x = if i == imax { BigComplex::one(p) } else { x.div(&pivot, p) };
    }

    let residual_norm = relative_residual(&sys.matrix, &q, p);
    if !residual_norm.at_most_pow10(sys.precision.half_tolerance_log10()) {
        return Err(LinearError::CatastrophicResidual {
            residual: residual_norm,
            suggested_digits: sys.precision.digits().saturating_mul(2),
        });
    }

    let per = sys.n + 1;
    let polys = q.chunks(per).map(|c| c.to_vec()).collect();
    Ok(HpSolution {
        kind: sys.kind,
        n: sys.n,
        precision: sys.precision,
        polys,
        normalization: Normalization::MaxCoefficient,
        rank,
        kernel_defect: ncols - 1 - rank,
        residual_norm,
    })
}

fn relative_residual(m: &[Vec<BigComplex>], q: &[BigComplex], p: usize) -> Magnitude {
    let mut worst = f64::NEG_INFINITY;
    let mut norm_m = f64::NEG_INFINITY;
    for row in m {
        norm_m = norm_m.max(log2_sum(row.iter().map(|x| x.log2_abs())));
        let mut acc = BigComplex::zero();
        for (x, y) in row.iter().zip(q) {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            acc = acc.add(&x.mul(y, p), p);
        }
        worst = worst.max(acc.log2_abs());
    }
    let norm_q = q.iter().map(|x| x.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    if worst == f64::NEG_INFINITY {
        return Magnitude::ZERO;
    }
    Magnitude::from_log2(worst - norm_m - norm_q)
}

/// Remainder `sum_i Q_i f_i` expanded at one point.
#[derive(Debug, Clone)]
pub struct ResidualSeries {
    pub point: ExpansionPoint,
    /// `exponents[t]` is the power of `z` multiplying `coeffs[t]`.
    pub exponents: Vec<i64>,
    pub coeffs: Vec<BigComplex>,
    /// `log2` of `sum |q_k c_m|` for each coefficient, the size of the
    /// terms that must cancel.
    pub term_scale_log2: Vec<f64>,
    /// Leading coefficients that the order conditions force to vanish.
    pub required: usize,
}

impl ResidualSeries {
    /// Relative size `|r_t| / sum |q c|` of coefficient `t`.
    pub fn relative(&self, t: usize) -> Magnitude {
        let r = self.coeffs[t].log2_abs();
        if r == f64::NEG_INFINITY {
            return Magnitude::ZERO;
        }
        Magnitude::from_log2(r - self.term_scale_log2[t])
    }

    /// Largest relative coefficient among the required ones.
    pub fn max_required(&self) -> Magnitude {
        (0..self.required).map(|t| self.relative(t)).fold(Magnitude::ZERO, |a, b| if b > a { b } else { a })
    }
}

fn remainder_at(
    polys: &[Vec<BigComplex>],
    fams: &[Option<&Series>],
    point: ExpansionPoint,
    exponents: Vec<i64>,
    required: usize,
    p: usize,
) -> ResidualSeries {
    let mut coeffs = Vec::with_capacity(exponents.len());
    let mut scales = Vec::with_capacity(exponents.len());
    for &j in &exponents {
        let mut acc = BigComplex::zero();
        let mut mags = Vec::new();
        for (poly, f) in polys.iter().zip(fams) {
            for (k, qk) in poly.iter().enumerate() {
                if qk.is_zero() {
                    continue;
                }
                let m = match point {
                    ExpansionPoint::Infinity => k as i64 - j,
                    ExpansionPoint::Zero => j - k as i64,
                };
                let c = coeff(*f, m, p);
                if c.is_zero() {
                    continue;
                }
                let t = qk.mul(&c, p);
                mags.push(t.log2_abs());
                acc = acc.add(&t, p);
            }
        }
        scales.push(log2_sum(mags.into_iter()));
        coeffs.push(acc);
    }
    ResidualSeries { point, exponents, coeffs, term_scale_log2: scales, required }
}

/// Remainder series of a solution without checking the order conditions.
/// `series` are the non-trivial functions: `[f]`, `[f_1, f_2]`, or
/// `[f at zero, f at infinity]`; all coefficients present are used.
pub fn remainder_series(sol: &HpSolution, series: &[Series]) -> Result<Vec<ResidualSeries>, LinearError> {
    let expected = sol.kind.families() - 1 + usize::from(sol.kind == SystemKind::TwoPoint);
    if series.len() != expected {
        return Err(LinearError::SeriesCount { expected, got: series.len() });
    }
    let n = sol.n as i64;
    let p = series.iter().map(|s| s.precision.bits()).max().unwrap_or(sol.precision.bits());
    match sol.kind {
        SystemKind::HermitePade | SystemKind::Pade => {
            let len = series.iter().map(|s| s.len()).min().unwrap();
            need(&series[0], sol.kind.series_len(sol.n))?;
            need(series.last().unwrap(), sol.kind.series_len(sol.n))?;
            let fams: Vec<Option<&Series>> = core::iter::once(None).chain(series.iter().map(Some)).collect();
            let exps: Vec<i64> = (0..len as i64).map(|t| n - t).collect();
            Ok(vec![remainder_at(&sol.polys, &fams, ExpansionPoint::Infinity, exps, sol.kind.rows(sol.n), p)])
        }
        SystemKind::TwoPoint => {
            let (s0, si) = (&series[0], &series[1]);
            need(s0, sol.n + 1)?;
            need(si, sol.n + 1)?;
            let at0 = remainder_at(
                &sol.polys,
                &[None, Some(s0)],
                ExpansionPoint::Zero,
                (0..s0.len() as i64).collect(),
                sol.n + 1,
                p,
            );
            // z^n .. z^1 are required; later powers are informative only
            let ati = remainder_at(
                &sol.polys,
                &[None, Some(si)],
                ExpansionPoint::Infinity,
                (0..si.len() as i64).map(|t| n - t).collect(),
                sol.n,
                p,
            );
            Ok(vec![at0, ati])
        }
    }
}

/// Independent order-of-contact check: recomputes the remainder from the
/// given series (normally built at doubled precision) and requires every
/// forced coefficient to be at most `10^{-digits/2}` relative to the terms
/// that cancel in it.
pub fn residual_series(sol: &HpSolution, series: &[Series]) -> Result<Vec<ResidualSeries>, LinearError> {
    let out = remainder_series(sol, series)?;
    let tol = sol.precision.half_tolerance_log10();
    for r in &out {
        for t in 0..r.required {
            let m = r.relative(t);
            if !m.at_most_pow10(tol) {
                return Err(LinearError::OrderFailure { point: r.point, exponent: r.exponents[t], magnitude: m });
            }
        }
    }
    Ok(out)
}
