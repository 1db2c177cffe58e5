//! Arbitrary-precision complex numbers on top of `astro-float`.
//!
//! Every arithmetic method takes the target mantissa width `p` in bits.
//! Operations with a purely real operand skip the imaginary products, so
//! real-coefficient problems cost roughly what real arithmetic would.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign, Word};
use num_complex::Complex64;

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

/// Zero with an empty mantissa.
pub fn bf_zero() -> BigFloat {
    BigFloat::from_word(0, 64)
}

pub fn bf_from_i64(v: i64, p: usize) -> BigFloat {
    BigFloat::from_i64(v, p)
}

pub fn bf_from_f64(v: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(v, p)
}

pub fn bf_is_zero(x: &BigFloat) -> bool {
    x.is_zero()
}

/// `log2 |x|`, `-inf` for zero. Accurate to about 1e-15 relative on the log.
pub fn bf_log2_abs(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        Some((m, _, _, e, _)) => {
            if x.is_zero() || m.is_empty() {
                return f64::NEG_INFINITY;
            }
            let top = m[m.len() - 1] as f64;
            let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
            let frac = (top + next / 18446744073709551616.0) / 18446744073709551616.0;
            frac.log2() + e as f64
        }
        None => f64::NAN,
    }
}

/// Nearest `f64`, saturating to 0 / inf outside the `f64` exponent range.
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        Some((m, _, s, e, _)) => {
            if x.is_zero() || m.is_empty() {
                return 0.0;
            }
            let top = m[m.len() - 1] as f64;
            let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
            let frac = (top + next / 18446744073709551616.0) / 18446744073709551616.0;
            let v = if e > 1100 {
                f64::INFINITY
            } else if e < -1100 {
                0.0
            } else {
                libm_ldexp(frac, e)
            };
            if s == Sign::Neg {
                -v
            } else {
                v
            }
        }
        None => f64::NAN,
    }
}

fn libm_ldexp(x: f64, e: i32) -> f64 {
    // split to stay inside the f64 exponent range for intermediate factors
    let half = e / 2;
    x * 2f64.powi(half) * 2f64.powi(e - half)
}

/// `2^log2` as a `BigFloat`, for radii that may exceed the `f64` range.
pub fn bf_pow2(log2: f64, p: usize) -> BigFloat {
    let ip = log2.floor();
    let frac = 2f64.powf(log2 - ip);
    let mut v = BigFloat::from_f64(frac, p);
    if let Some(e) = v.exponent() {
        v.set_exponent(e + ip as i32);
    }
    v
}

#[derive(Clone)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.to_c64();
        write!(f, "BigComplex({:e}, {:e})", c.re, c.im)
    }
}

impl BigComplex {
    pub fn zero() -> Self {
        Self { re: bf_zero(), im: bf_zero() }
    }

    pub fn one(p: usize) -> Self {
        Self::from_real(BigFloat::from_word(1, p))
    }

    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: BigFloat) -> Self {
        Self { re, im: bf_zero() }
    }

    pub fn from_i64(v: i64, p: usize) -> Self {
        Self::from_real(bf_from_i64(v, p))
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Self {
        let re = if re == 0.0 { bf_zero() } else { bf_from_f64(re, p) };
        let im = if im == 0.0 { bf_zero() } else { bf_from_f64(im, p) };
        Self { re, im }
    }

    pub fn i(p: usize) -> Self {
        Self { re: bf_zero(), im: BigFloat::from_word(1, p) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.im.is_nan() || self.re.is_inf() || self.im.is_inf())
    }

    pub fn neg(&self) -> Self {
        Self { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn add(&self, o: &Self, p: usize) -> Self {
        Self { re: add_bf(&self.re, &o.re, p), im: add_bf(&self.im, &o.im, p) }
    }

    pub fn sub(&self, o: &Self, p: usize) -> Self {
        Self { re: sub_bf(&self.re, &o.re, p), im: sub_bf(&self.im, &o.im, p) }
    }

    pub fn mul(&self, o: &Self, p: usize) -> Self {
        let (a, b, c, d) = (&self.re, &self.im, &o.re, &o.im);
        match (b.is_zero(), d.is_zero()) {
            (true, true) => Self::from_real(mul_bf(a, c, p)),
            (true, false) => Self { re: mul_bf(a, c, p), im: mul_bf(a, d, p) },
            (false, true) => Self { re: mul_bf(a, c, p), im: mul_bf(b, c, p) },
            (false, false) => {
                let re = mul_bf(a, c, p).sub(&mul_bf(b, d, p), p, RM);
                let im = mul_bf(a, d, p).add(&mul_bf(b, c, p), p, RM);
                Self { re, im }
            }
        }
    }

    /// `self - f * g`, the elimination kernel.
    pub fn sub_mul(&self, f: &Self, g: &Self, p: usize) -> Self {
        self.sub(&f.mul(g, p), p)
    }

    pub fn mul_real(&self, r: &BigFloat, p: usize) -> Self {
        Self { re: mul_bf(&self.re, r, p), im: mul_bf(&self.im, r, p) }
    }

    pub fn mul_i64(&self, k: i64, p: usize) -> Self {
        self.mul_real(&bf_from_i64(k, p), p)
    }

    pub fn div_real(&self, r: &BigFloat, p: usize) -> Self {
        Self { re: div_bf(&self.re, r, p), im: div_bf(&self.im, r, p) }
    }

    pub fn norm_sqr(&self, p: usize) -> BigFloat {
        add_bf(&mul_bf(&self.re, &self.re, p), &mul_bf(&self.im, &self.im, p), p)
    }

    pub fn abs(&self, p: usize) -> BigFloat {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr(p).sqrt(p, RM)
    }

    pub fn recip(&self, p: usize) -> Self {
        if self.im.is_zero() {
            return Self::from_real(BigFloat::from_word(1, p).div(&self.re, p, RM));
        }
        let den = self.norm_sqr(p);
        Self { re: div_bf(&self.re, &den, p), im: div_bf(&self.im, &den, p).neg() }
    }

    pub fn div(&self, o: &Self, p: usize) -> Self {
        if o.im.is_zero() {
            return self.div_real(&o.re, p);
        }
        let (a, b, c, d) = (&self.re, &self.im, &o.re, &o.im);
        let den = o.norm_sqr(p);
        let re = add_bf(&mul_bf(a, c, p), &mul_bf(b, d, p), p);
        let im = sub_bf(&mul_bf(b, c, p), &mul_bf(a, d, p), p);
        Self { re: div_bf(&re, &den, p), im: div_bf(&im, &den, p) }
    }

    /// Integer power by repeated squaring (negative exponents invert).
    pub fn powi(&self, k: i64, p: usize) -> Self {
        let mut base = if k < 0 { self.recip(p) } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc: Option<Self> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base, p),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, p);
            }
        }
        acc.unwrap_or_else(|| Self::one(p))
    }

    /// Principal `q`-th root, by Newton iteration from an `f64` seed.
    pub fn principal_root(&self, q: u32, p: usize) -> Self {
        assert!(q >= 1);
        if q == 1 || self.is_zero() {
            return self.round(p);
        }
        if self.im.is_zero() && self.re.is_positive() {
            if q == 2 {
                return Self::from_real(self.re.sqrt(p, RM));
            }
        }
        let log2r = self.log2_abs() / q as f64;
        let c = self.to_c64_scaled();
        let theta = c.im.atan2(c.re) / q as f64;
        let seed_re = theta.cos();
        let seed_im = theta.sin();
        let radius = bf_pow2(log2r, p);
        let mut y = Self::from_f64(seed_re, seed_im, 64).mul_real(&radius, p);
        let qb = bf_from_i64(q as i64, p);
        let qm1 = bf_from_i64(q as i64 - 1, p);
        for _ in 0..200 {
            // y <- ((q-1) y + z / y^{q-1}) / q
            let ypow = y.powi(q as i64 - 1, p);
            let next = y.mul_real(&qm1, p).add(&self.div(&ypow, p), p).div_real(&qb, p);
            let delta = next.sub(&y, p);
            y = next;
            if delta.is_zero() || delta.log2_abs() < y.log2_abs() - p as f64 + 8.0 {
                break;
            }
        }
        y
    }

    pub fn round(&self, p: usize) -> Self {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        if !re.is_zero() {
            let _ = re.set_precision(p, RM);
        }
        if !im.is_zero() {
            let _ = im.set_precision(p, RM);
        }
        Self { re, im }
    }

    /// `log2 |z|` (approximate), `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        let a = bf_log2_abs(&self.re);
        let b = bf_log2_abs(&self.im);
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if hi == f64::NEG_INFINITY {
            return hi;
        }
        hi + 0.5 * (1.0 + 2f64.powf(2.0 * (lo - hi))).log2()
    }

    pub fn magnitude(&self) -> crate::Magnitude {
        crate::Magnitude::from_log2(self.log2_abs())
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(bf_to_f64(&self.re), bf_to_f64(&self.im))
    }

    /// Direction of `self` as an `f64` complex with modulus about 1.
    fn to_c64_scaled(&self) -> Complex64 {
        let l = self.log2_abs();
        let s = if l.is_finite() { -l.floor() as i32 } else { 0 };
        let scale = |x: &BigFloat| {
            if x.is_zero() {
                0.0
            } else {
                let mut y = x.clone();
                if let Some(e) = y.exponent() {
                    y.set_exponent(e + s);
                }
                bf_to_f64(&y)
            }
        };
        Complex64::new(scale(&self.re), scale(&self.im))
    }

    /// Bit-level equality of value (mantissa, sign, exponent), ignoring the
    /// inexact flag.
    pub fn bit_eq(&self, o: &Self) -> bool {
        bf_bit_eq(&self.re, &o.re) && bf_bit_eq(&self.im, &o.im)
    }
}

fn add_bf(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return b.clone();
    }
    a.add(b, p, RM)
}

fn sub_bf(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return b.neg();
    }
    a.sub(b, p, RM)
}

fn mul_bf(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    if a.is_zero() || b.is_zero() {
        return bf_zero();
    }
    a.mul(b, p, RM)
}

fn div_bf(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    if a.is_zero() {
        return bf_zero();
    }
    a.div(b, p, RM)
}

pub fn bf_bit_eq(a: &BigFloat, b: &BigFloat) -> bool {
    if a.is_zero() && b.is_zero() {
        return true;
    }
    match (a.as_raw_parts(), b.as_raw_parts()) {
        (Some((ma, _, sa, ea, _)), Some((mb, _, sb, eb, _))) => ma == mb && sa == sb && ea == eb,
        _ => false,
    }
}

/// Lossless text encoding `sign:exponent:hexwords` (most significant word
/// first), used by on-disk caches that must round-trip bit for bit.
pub fn bf_encode(x: &BigFloat) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    if x.is_zero() {
        out.push('0');
        return out;
    }
    let (m, _, s, e, _) = x.as_raw_parts().expect("finite value");
    let _ = write!(out, "{}:{}:", if s == Sign::Neg { '-' } else { '+' }, e);
    for w in m.iter().rev() {
        let _ = write!(out, "{:016x}", w);
    }
    out
}

pub fn bf_decode(s: &str) -> Option<BigFloat> {
    if s == "0" {
        return Some(bf_zero());
    }
    let mut parts = s.splitn(3, ':');
    let sign = match parts.next()? {
        "+" => Sign::Pos,
        "-" => Sign::Neg,
        _ => return None,
    };
    let e: i32 = parts.next()?.parse().ok()?;
    let hex = parts.next()?;
    if hex.len() % 16 != 0 || hex.is_empty() {
        return None;
    }
    let mut words: Vec<Word> = Vec::with_capacity(hex.len() / 16);
    for chunk in hex.as_bytes().chunks(16).rev() {
        let t = core::str::from_utf8(chunk).ok()?;
        words.push(Word::from_str_radix(t, 16).ok()?);
    }
    let v = BigFloat::from_raw_parts(&words, words.len() * 64, sign, e, false);
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

/// Decimal scientific notation with `sig` significant digits, e.g.
/// `-1.2345e-17`. Rounds half away from zero on the decimal expansion.
pub fn bf_to_decimal(x: &BigFloat, sig: usize, cc: &mut Consts) -> String {
    if x.is_zero() {
        return String::from("0");
    }
    let raw = x.format(Radix::Dec, RM, cc).unwrap_or_else(|_| String::from("NaN"));
    round_decimal_string(&raw, sig.max(1))
}

fn round_decimal_string(raw: &str, sig: usize) -> String {
    use core::fmt::Write;
    let (neg, body) = match raw.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, raw),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    // digits of the mantissa and the position of the decimal point
    let point = mant.find('.').unwrap_or(mant.len());
    let mut digits: Vec<u8> = mant.bytes().filter(|b| b.is_ascii_digit()).map(|b| b - b'0').collect();
    let mut exp10 = exp + point as i64 - 1;
    let lead = digits.iter().position(|&d| d != 0);
    let Some(lead) = lead else {
        return String::from("0");
    };
    digits.drain(..lead);
    exp10 -= lead as i64;
    if digits.len() > sig {
        let round_up = digits[sig] >= 5;
        digits.truncate(sig);
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    digits.insert(0, 1);
                    digits.truncate(sig);
                    exp10 += 1;
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    }
    while digits.len() > 1 && *digits.last().unwrap() == 0 {
        digits.pop();
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + digits[0]) as char);
    if digits.len() > 1 {
        out.push('.');
        for d in &digits[1..] {
            out.push((b'0' + d) as char);
        }
    }
    let _ = write!(out, "e{}", exp10);
    out
}

/// Parses a decimal literal (`1.6`, `-2.5e-300`) at `p` bits.
pub fn bf_parse_decimal(s: &str, p: usize, cc: &mut Consts) -> Option<BigFloat> {
    let v = BigFloat::parse(s, Radix::Dec, p, RM, cc);
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}
