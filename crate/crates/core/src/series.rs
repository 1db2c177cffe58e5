//! Truncated power series in the local coordinate `w` with arbitrary-precision
//! complex coefficients.
//!
//! Every coefficient is produced by a fixed-order recurrence or sum, so the
//! first `k` coefficients of a series are bit-identical whatever the requested
//! length. Callers may compute the longest series once and slice it.

use alloc::vec;
use alloc::vec::Vec;

use crate::exact::{parse_exact, ExactError, Rational};
use crate::num::BigComplex;
use crate::precision::{Magnitude, Precision, PrecisionError};
use crate::spec::{FunctionSpec, SpecError};

#[derive(Debug, Clone)]
pub enum SeriesOrigin {
    Spec(FunctionSpec),
    Derived,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub precision: Precision,
    /// `coeffs[k]` multiplies `w^k`.
    pub coeffs: Vec<BigComplex>,
    pub origin: SeriesOrigin,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error(transparent)]
    Precision(#[from] PrecisionError),
    #[error("shift by {shift} needs coefficient {index} to vanish, but its magnitude is {magnitude}")]
    ShiftValuation { shift: i32, index: usize, magnitude: Magnitude },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

impl Series {
    pub fn derived(precision: Precision, coeffs: Vec<BigComplex>) -> Self {
        Self { precision, coeffs, origin: SeriesOrigin::Derived }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// First `len` coefficients (or all, if shorter).
    pub fn truncated(&self, len: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(len);
        out
    }

    /// `[1, 0, 0, ...]` of the given length.
    pub fn one(precision: Precision, len: usize) -> Self {
        let mut coeffs = vec![BigComplex::zero(); len];
        if len > 0 {
            coeffs[0] = BigComplex::one(precision.bits());
        }
        Self::derived(precision, coeffs)
    }

    pub fn scale(&self, c: &BigComplex) -> Self {
        let p = self.precision.bits();
        Self::derived(self.precision, self.coeffs.iter().map(|x| x.mul(c, p)).collect())
    }

    pub fn bits_eq(&self, other: &Self) -> bool {
        self.precision == other.precision
            && self.len() == other.len()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a.bit_eq(b))
    }
}

/// Coefficients `c_0..c_N` of `(1 - a w)^alpha` on the branch equal to 1 at
/// `w = 0`, via `c_{k+1} = c_k (-a) (alpha - k) / (k + 1)`.
pub fn binomial_factor_series(a: &BigComplex, alpha: Rational, n: usize, prec: Precision) -> Series {
    let p = prec.bits();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(BigComplex::one(p));
    let minus_a = a.neg();
    let (num, den) = (alpha.numer() as i128, alpha.denom() as i128);
    for k in 0..n {
        let prev: &BigComplex = &coeffs[k];
        // (alpha - k) / (k + 1) = (num - k den) / (den (k + 1))
        let top = num - (k as i128) * den;
        let next = if prev.is_zero() || top == 0 || a.is_zero() {
            BigComplex::zero()
        } else {
            let bottom = den * (k as i128 + 1);
            let t = prev.mul(&minus_a, p);
            let t = t.mul_real(&big_int(top, p), p);
            t.div_real(&big_int(bottom, p), p)
        };
        coeffs.push(next);
    }
    Series::derived(prec, coeffs)
}

fn big_int(v: i128, p: usize) -> astro_float::BigFloat {
    match i64::try_from(v) {
        Ok(x) => astro_float::BigFloat::from_i64(x, p),
        Err(_) => {
            // only reachable for absurd exponents; exact through two words
            let hi = (v >> 62) as i64;
            let lo = (v & ((1i128 << 62) - 1)) as i64;
            let base = astro_float::BigFloat::from_i64(1i64 << 62, p);
            astro_float::BigFloat::from_i64(hi, p)
                .mul(&base, p, crate::num::RM)
                .add(&astro_float::BigFloat::from_i64(lo, p), p, crate::num::RM)
        }
    }
}

/// Cauchy product truncated to the shorter length.
pub fn series_mul(s1: &Series, s2: &Series) -> Result<Series, SeriesError> {
    s1.precision.ensure_same(s2.precision)?;
    let p = s1.precision.bits();
    let len = s1.len().min(s2.len());
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = BigComplex::zero();
        for j in 0..=k {
            let (x, y) = (&s1.coeffs[j], &s2.coeffs[k - j]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            acc = acc.add(&x.mul(y, p), p);
        }
        out.push(acc);
    }
    Ok(Series::derived(s1.precision, out))
}

/// `s^k` by repeated squaring; `k = 0` gives the constant 1.
pub fn series_pow(s: &Series, k: u32) -> Result<Series, SeriesError> {
    let mut base = s.clone();
    let mut e = k;
    let mut acc: Option<Series> = None;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => series_mul(&a, &base)?,
            });
        }
        e >>= 1;
        if e > 0 {
            base = series_mul(&base, &base)?;
        }
    }
    Ok(acc.unwrap_or_else(|| Series::one(s.precision, s.len())))
}

/// Coefficientwise sum truncated to the shorter length.
pub fn series_add(s1: &Series, s2: &Series) -> Result<Series, SeriesError> {
    s1.precision.ensure_same(s2.precision)?;
    let p = s1.precision.bits();
    let coeffs = s1.coeffs.iter().zip(&s2.coeffs).map(|(a, b)| a.add(b, p)).collect();
    Ok(Series::derived(s1.precision, coeffs))
}

/// Multiplies by `w^m` keeping the length. For `m < 0` the leading `-m`
/// coefficients must be below `10^{-digits/2}`; the tail is zero-padded.
pub fn series_shift(s: &Series, m: i32) -> Result<Series, SeriesError> {
    let len = s.len();
    if m >= 0 {
        let m = m as usize;
        let mut coeffs = vec![BigComplex::zero(); m.min(len)];
        coeffs.extend(s.coeffs.iter().take(len.saturating_sub(m)).cloned());
        return Ok(Series::derived(s.precision, coeffs));
    }
    let drop = m.unsigned_abs() as usize;
    let tol = s.precision.half_tolerance_log10();
    for (index, c) in s.coeffs.iter().enumerate().take(drop) {
        let magnitude = c.magnitude();
        if !magnitude.at_most_pow10(tol) {
            return Err(SeriesError::ShiftValuation { shift: m, index, magnitude });
        }
    }
    let mut coeffs: Vec<BigComplex> = s.coeffs.iter().skip(drop).cloned().collect();
    coeffs.resize(len, BigComplex::zero());
    Ok(Series::derived(s.precision, coeffs))
}

/// Coefficients `c_0..c_N` of the function described by `spec`.
pub fn build_function_series(spec: &FunctionSpec, n: usize, prec: Precision) -> Result<Series, SeriesError> {
    spec.validate()?;
    let p = prec.bits();
    let len = n + 1;
    let extra = if spec.w_power < 0 { spec.w_power.unsigned_abs() as usize } else { 0 };
    let ext = len + extra;

    let mut bracket = Series::one(prec, ext);
    for f in &spec.factors {
        let a = parse_exact(&f.a, p)?;
        let fs = binomial_factor_series(&a, f.alpha, ext - 1, prec);
        bracket = series_mul(&bracket, &fs)?;
    }
    if !spec.poly_offset.is_empty() {
        let mut poly = vec![BigComplex::zero(); ext];
        for (k, c) in spec.poly_offset.iter().enumerate().take(ext) {
            poly[k] = parse_exact(c, p)?;
        }
        bracket = series_add(&bracket, &Series::derived(prec, poly))?;
    }
    let shifted = series_shift(&bracket, spec.w_power)?.truncated(len);
    let powered = series_pow(&shifted, spec.power)?;

    let mut factor = parse_exact(&spec.scale, p)?;
    if spec.sign < 0 {
        factor = factor.neg();
    }
    let mut out = if factor.bit_eq(&BigComplex::one(p)) { powered } else { powered.scale(&factor) };
    out.origin = SeriesOrigin::Spec(spec.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Factor;
    use num_complex::Complex64;

    fn prec() -> Precision {
        Precision::new(80).unwrap()
    }

    fn c64(s: &Series) -> Vec<Complex64> {
        s.coeffs.iter().map(|c| c.to_c64()).collect()
    }

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn from_f64(v: &[f64]) -> Series {
        let p = prec().bits();
        Series::derived(prec(), v.iter().map(|&x| BigComplex::from_f64(x, 0.0, p)).collect())
    }

    #[test]
    fn binomial_examples() {
        let p = prec().bits();
        let zero = binomial_factor_series(&BigComplex::zero(), Rational::new(1, 2).unwrap(), 3, prec());
        assert_eq!(c64(&zero), real(&[1.0, 0.0, 0.0, 0.0]));
        let lin = binomial_factor_series(&BigComplex::from_i64(2, p), Rational::integer(1), 3, prec());
        assert_eq!(c64(&lin), real(&[1.0, -2.0, 0.0, 0.0]));
        let half = binomial_factor_series(&BigComplex::one(p), Rational::new(1, 2).unwrap(), 3, prec());
        assert_eq!(c64(&half), real(&[1.0, -0.5, -0.125, -0.0625]));
    }

    #[test]
    fn square_root_series_squares_back() {
        // independent check: the truncated square of sqrt(1 - w) is 1 - w
        let p = prec().bits();
        let a = BigComplex::from_f64(0.3, -1.7, p);
        let s = binomial_factor_series(&a, Rational::new(1, 2).unwrap(), 30, prec());
        let sq = series_mul(&s, &s).unwrap();
        let lin = binomial_factor_series(&a, Rational::integer(1), 30, prec());
        for (x, y) in sq.coeffs.iter().zip(&lin.coeffs) {
            assert!(x.sub(y, p).log2_abs() < -(p as f64) + 20.0);
        }
    }

    #[test]
    fn reciprocal_series_is_geometric() {
        let p = prec().bits();
        let a = BigComplex::from_f64(0.5, 0.0, p);
        let s = binomial_factor_series(&a, Rational::integer(-1), 6, prec());
        let expect: Vec<f64> = (0..7).map(|k| 0.5f64.powi(k)).collect();
        assert_eq!(c64(&s), real(&expect));
    }

    #[test]
    fn mul_pow_shift_examples() {
        let one = from_f64(&[1.0, 0.0, 0.0, 0.0]);
        let c = from_f64(&[3.0, -1.0, 2.5, 7.0]);
        assert!(series_mul(&one, &c).unwrap().bits_eq(&c));
        let s = from_f64(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(c64(&series_pow(&s, 2).unwrap()), real(&[1.0, 2.0, 1.0, 0.0]));
        let t = from_f64(&[0.0, 0.0, 1.0, 5.0]);
        assert_eq!(c64(&series_shift(&t, -2).unwrap()), real(&[1.0, 5.0, 0.0, 0.0]));
        assert_eq!(c64(&series_shift(&s, 1).unwrap()), real(&[0.0, 1.0, 1.0, 0.0]));
        match series_shift(&s, -1) {
            Err(SeriesError::ShiftValuation { index: 0, magnitude, .. }) => {
                assert!((magnitude.log10()).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let other = Series::derived(Precision::new(100).unwrap(), c.coeffs.clone());
        assert!(matches!(series_mul(&c, &other), Err(SeriesError::Precision(_))));
    }

    #[test]
    fn quadratic_factor_order_one() {
        // z / sqrt((z-a)(z-b)) = (1 - a w)^{-1/2} (1 - b w)^{-1/2}: c_1 = (a+b)/2
        let spec = FunctionSpec::at_infinity(
            "f1",
            alloc::vec![
                Factor::new("-1+0.6i", Rational::new(-1, 2).unwrap()),
                Factor::new("1+0.6i", Rational::new(-1, 2).unwrap()),
            ],
        );
        let s = build_function_series(&spec, 4, prec()).unwrap();
        let c = c64(&s);
        assert_eq!(c[0], Complex64::new(1.0, 0.0));
        assert!((c[1] - Complex64::new(0.0, 0.6)).norm() < 1e-15);
    }

    #[test]
    fn quartic_root_bracket_cancels() {
        // sqrt(prod (1 - e_j w)) - 1 + (sum e_j / 2) w starts at w^2
        let es = ["-1.2+0.8i", "0.9+1.5i", "0.5-1.2i", "-0.3-0.9i"];
        let spec = FunctionSpec {
            w_power: -2,
            factors: es.iter().map(|e| Factor::new(e, Rational::new(1, 2).unwrap())).collect(),
            poly_offset: alloc::vec!["-1".into(), "(-1.2+0.8i+0.9+1.5i+0.5-1.2i-0.3-0.9i)/2".into()],
            ..FunctionSpec::at_infinity("dumas", alloc::vec![])
        };
        let s = build_function_series(&spec, 6, prec()).unwrap();
        // independent order-2 coefficient: sum_j e_j^2 (-1/8) + sum_{j<k} e_j e_k / 4
        let e: Vec<Complex64> = es.iter().map(|x| crate::exact::parse_exact(x, 200).unwrap().to_c64()).collect();
        let mut c2 = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            c2 -= e[j] * e[j] / 8.0;
            for k in j + 1..4 {
                c2 += e[j] * e[k] / 4.0;
            }
        }
        assert!((s.coeffs[0].to_c64() - c2).norm() < 1e-14);
        assert_eq!(s.len(), 7);
    }

    #[test]
    fn nonvanishing_bracket_is_rejected() {
        let spec = FunctionSpec {
            w_power: -1,
            ..FunctionSpec::at_infinity("bad", alloc::vec![Factor::new("2", Rational::new(1, 2).unwrap())])
        };
        assert!(matches!(build_function_series(&spec, 3, prec()), Err(SeriesError::ShiftValuation { .. })));
    }

    #[test]
    fn sign_scale_and_power() {
        let base = FunctionSpec::at_infinity("f", alloc::vec![Factor::new("1", Rational::new(1, 2).unwrap())]);
        let s = build_function_series(&base, 5, prec()).unwrap();
        let sq = build_function_series(&FunctionSpec { power: 2, ..base.clone() }, 5, prec()).unwrap();
        assert!(sq.bits_eq(&series_mul(&s, &s).unwrap()));
        let neg = build_function_series(&FunctionSpec { sign: -1, ..base.clone() }, 5, prec()).unwrap();
        let scaled = build_function_series(&base.scaled("2i"), 5, prec()).unwrap();
        for k in 0..6 {
            let x = s.coeffs[k].to_c64();
            assert_eq!(neg.coeffs[k].to_c64(), -x);
            assert!((scaled.coeffs[k].to_c64() - x * Complex64::new(0.0, 2.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn prefixes_are_bit_identical() {
        let spec = FunctionSpec::at_infinity(
            "g",
            alloc::vec![
                Factor::new("-1.2+0.8i", Rational::new(-1, 3).unwrap()),
                Factor::new("0.9+1.5i", Rational::new(-1, 3).unwrap()),
            ],
        );
        let long = build_function_series(&spec, 20, prec()).unwrap();
        let short = build_function_series(&spec, 7, prec()).unwrap();
        assert!(long.truncated(8).bits_eq(&short));
    }
}
