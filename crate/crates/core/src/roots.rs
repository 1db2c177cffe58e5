//! All roots of a polynomial with arbitrary-precision complex coefficients.
//!
//! Aberth-Ehrlich simultaneous iteration, Jacobi style (every update in a
//! sweep uses the previous iterate), started on the Fujiwara circle. Most
//! iterations run on a reduced mantissa; the iterate is then lifted through a
//! ladder of widths (x4 per rung) up to the working precision, where the
//! final corrections are checked against `10^{-digits/2}` times the radius.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LOG2_10, PI};

use num_complex::Complex64;

use crate::linear::log2_sum;
use crate::num::{bf_pow2, BigComplex};
use crate::precision::{Magnitude, Precision};

/// Fixed angular offset of the initial guesses, in radians.
pub const INITIAL_ANGLE: f64 = 0.3941;

/// Narrowest mantissa of the ladder, in bits.
const BASE_BITS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RootError {
    #[error("all coefficients are zero")]
    AllZero,
}

#[derive(Debug, Clone)]
pub struct RootCloud {
    pub family: usize,
    pub n: usize,
    pub digits: u32,
    /// Sorted by real part, then imaginary part.
    pub points: Vec<BigComplex>,
    /// `|p(z)| / sum_k |a_k| |z|^k` at each point.
    pub residuals: Vec<Magnitude>,
    /// Residual above `10^{-digits/4}`.
    pub uncertified: Vec<bool>,
    pub effective_degree: usize,
    pub converged: bool,
    pub iterations: usize,
    /// `log2 |a_d|` of the deflated leading coefficient, so that
    /// `log|p(z)| = lead + sum log|z - z_k|`.
    pub leading_log2: f64,
}

impl RootCloud {
    pub fn empty(family: usize, n: usize, digits: u32) -> Self {
        Self {
            family,
            n,
            digits,
            points: Vec::new(),
            residuals: Vec::new(),
            uncertified: Vec::new(),
            effective_degree: 0,
            converged: true,
            iterations: 0,
            leading_log2: 0.0,
        }
    }

    pub fn with_label(mut self, family: usize, n: usize) -> Self {
        self.family = family;
        self.n = n;
        self
    }

    pub fn points_c64(&self) -> Vec<Complex64> {
        self.points.iter().map(|z| z.to_c64()).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn certified(&self) -> bool {
        !self.uncertified.iter().any(|f| *f)
    }
}

fn horner(a: &[BigComplex], z: &BigComplex, p: usize) -> (BigComplex, BigComplex) {
    let d = a.len() - 1;
    let mut v = a[d].clone();
    let mut dv = BigComplex::zero();
    for k in (0..d).rev() {
        dv = dv.mul(z, p).add(&v, p);
        v = v.mul(z, p).add(&a[k], p);
    }
    (v, dv)
}

/// `log2` of the Fujiwara bound `2 max_k |a_{d-k}/a_d|^{1/k}` (with the
/// constant term halved).
fn fujiwara_log2(b: &[BigComplex]) -> f64 {
    let d = b.len() - 1;
    let lead = b[d].log2_abs();
    let mut best = f64::NEG_INFINITY;
    for k in 1..=d {
        let l = b[d - k].log2_abs();
        if l == f64::NEG_INFINITY {
            continue;
        }
        let l = if k == d { l - 1.0 } else { l };
        best = best.max((l - lead) / k as f64);
    }
    1.0 + best
}

/// Mantissa widths from `BASE_BITS` up to `full`, growing by 4x.
fn ladder(full: usize) -> Vec<usize> {
    let mut v = vec![full];
    let mut b = full;
    while b / 4 > BASE_BITS {
        b /= 4;
        v.push(b);
    }
    if full > BASE_BITS {
        v.push(BASE_BITS);
    }
    v.reverse();
    v
}

/// Roots of `sum_k coeffs[k] z^k`.
///
/// Leading and trailing coefficients below `10^{-digits/2}` times the
/// largest one are deflated; each trailing one contributes a root at 0.
/// Never fails on non-convergence: unfinished roots are returned and
/// flagged by [`certify`].
pub fn find_roots(coeffs: &[BigComplex], prec: Precision) -> Result<RootCloud, RootError> {
    let full = prec.bits();
    let logs: Vec<f64> = coeffs.iter().map(|c| c.log2_abs()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(RootError::AllZero);
    }
    let tiny = max + prec.half_tolerance_log10() * LOG2_10;
    let hi = logs.iter().rposition(|l| *l > tiny).unwrap();
    let lo = logs.iter().position(|l| *l > tiny).unwrap();
    let b: Vec<BigComplex> = coeffs[lo..=hi].iter().map(|c| c.round(full)).collect();
    let d = b.len() - 1;

    let mut cloud = RootCloud::empty(0, coeffs.len().saturating_sub(1), prec.digits());
    cloud.leading_log2 = logs[hi];
    let mut roots: Vec<BigComplex> = vec![BigComplex::zero(); lo];
    if d > 0 {
        let (found, iters, ok) = aberth(&b, prec);
        cloud.iterations = iters;
        cloud.converged = ok;
        roots.extend(found);
    }
    roots.sort_by(|x, y| {
        let (a, b) = (x.to_c64(), y.to_c64());
        a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
    });
    cloud.effective_degree = roots.len();
    cloud.points = roots;
    Ok(certify(coeffs, cloud))
}

fn aberth(b: &[BigComplex], prec: Precision) -> (Vec<BigComplex>, usize, bool) {
    let d = b.len() - 1;
    let log2r = fujiwara_log2(b);
    let cap = 500 * d;
    let mut total = 0usize;

    let p0 = ladder(prec.bits())[0];
    let radius = bf_pow2(log2r, p0);
    let mut z: Vec<BigComplex> = (0..d)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / d as f64 + INITIAL_ANGLE;
            BigComplex::from_f64(t.cos(), t.sin(), p0).mul_real(&radius, p0)
        })
        .collect();

    let rungs = ladder(prec.bits());
    let last = rungs.len() - 1;
    let mut all_done = false;
    for (stage, &p) in rungs.iter().enumerate() {
        let a: Vec<BigComplex> = b.iter().map(|c| c.round(p)).collect();
        z = z.iter().map(|x| x.round(p)).collect();
        // corrections below this are converged at the current rung
        let tol = if stage == last {
            log2r + prec.half_tolerance_log10() * LOG2_10
        } else {
            log2r - p as f64 / 2.0
        };
        let patience = if stage == 0 { 20 + d } else { 12 };
        let mut frozen = vec![false; d];
        let mut best = f64::INFINITY;
        let mut since_best = 0usize;
        all_done = false;
        while total < cap {
            total += 1;
            let mut updates: Vec<Option<BigComplex>> = vec![None; d];
            let mut worst = f64::NEG_INFINITY;
            for i in 0..d {
                if frozen[i] {
                    continue;
                }
                let (v, dv) = horner(&a, &z[i], p);
                if v.is_zero() {
                    frozen[i] = true;
                    continue;
                }
                let newton = v.div(&dv, p);
                let mut s = BigComplex::zero();
                for j in 0..d {
                    if j == i {
                        continue;
                    }
                    let diff = z[i].sub(&z[j], p);
                    if diff.is_zero() {
                        continue;
                    }
                    s = s.add(&diff.recip(p), p);
                }
                let denom = BigComplex::one(p).sub(&newton.mul(&s, p), p);
                let w = if denom.is_zero() { newton } else { newton.div(&denom, p) };
                let lw = w.log2_abs();
                worst = worst.max(lw);
                if lw <= tol {
                    frozen[i] = true;
                }
                updates[i] = Some(w);
            }
            for (zi, w) in z.iter_mut().zip(updates) {
                if let Some(w) = w {
                    *zi = zi.sub(&w, p);
                }
            }
            if frozen.iter().all(|f| *f) {
                all_done = true;
                break;
            }
            if worst < best - 1.0 {
                best = worst;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    break;
                }
            }
        }
    }
    (z, total, all_done)
}

/// Recomputes every residual at doubled precision and flags those above
/// `10^{-digits/4}`. The reference scale is `sum |a_k| |z|^k`, or the
/// largest coefficient at `z = 0`.
pub fn certify(coeffs: &[BigComplex], mut cloud: RootCloud) -> RootCloud {
    let p = Precision::new(cloud.digits).map(|x| x.doubled()).unwrap_or(Precision::for_degree(0)).bits();
    let threshold = -(cloud.digits as f64) / 4.0;
    let max = coeffs.iter().map(|c| c.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    let mut residuals = Vec::with_capacity(cloud.points.len());
    let mut flags = Vec::with_capacity(cloud.points.len());
    for z in &cloud.points {
        let r = if coeffs.is_empty() {
            Magnitude::ZERO
        } else {
            let (v, _) = horner(coeffs, z, p);
            let lz = z.log2_abs();
            let scale = if lz == f64::NEG_INFINITY {
                max
            } else {
                log2_sum(coeffs.iter().enumerate().map(|(k, c)| c.log2_abs() + k as f64 * lz))
            };
            let lv = v.log2_abs();
            if lv == f64::NEG_INFINITY {
                Magnitude::ZERO
            } else {
                Magnitude::from_log2(lv - scale)
            }
        };
        flags.push(!r.at_most_pow10(threshold));
        residuals.push(r);
    }
    cloud.residuals = residuals;
    cloud.uncertified = flags;
    cloud
}
