//! Working precision and magnitudes too small for `f64`.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use alloc::string::{String, ToString};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Smallest accepted working precision, in decimal digits.
pub const MIN_DIGITS: u32 = 64;

const LOG2_10: f64 = core::f64::consts::LOG2_10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrecisionError {
    #[error("working precision must be at least {MIN_DIGITS} decimal digits, got {0}")]
    TooLow(u32),
    #[error("precision mismatch: {0} vs {1} decimal digits")]
    Mismatch(u32, u32),
}

/// Working precision of all arbitrary-precision arithmetic, in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Precision {
    decimal_digits: u32,
}

impl Precision {
    pub fn new(decimal_digits: u32) -> Result<Self, PrecisionError> {
        if decimal_digits < MIN_DIGITS {
            return Err(PrecisionError::TooLow(decimal_digits));
        }
        Ok(Self { decimal_digits })
    }

    /// Default policy for a degree-`n` run: `max(256, 30 n)` digits.
    pub fn for_degree(n: usize) -> Self {
        let digits = (30 * n).max(256).min(u32::MAX as usize) as u32;
        Self { decimal_digits: digits }
    }

    pub fn digits(self) -> u32 {
        self.decimal_digits
    }

    /// Mantissa width in bits, with 32 guard bits on top of the decimal digits.
    pub fn bits(self) -> usize {
        (self.decimal_digits as f64 * LOG2_10).ceil() as usize + 32
    }

    pub fn doubled(self) -> Self {
        Self { decimal_digits: self.decimal_digits.saturating_mul(2) }
    }

    /// `log10` of the zero threshold `10^{-digits/2}` used for valuations,
    /// pivots, residuals and deflation.
    pub fn half_tolerance_log10(self) -> f64 {
        -(self.decimal_digits as f64) / 2.0
    }

    /// `log10` of the root certification threshold `10^{-digits/4}`.
    pub fn quarter_tolerance_log10(self) -> f64 {
        -(self.decimal_digits as f64) / 4.0
    }

    pub fn ensure_same(self, other: Precision) -> Result<(), PrecisionError> {
        if self != other {
            return Err(PrecisionError::Mismatch(self.decimal_digits, other.decimal_digits));
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for Precision {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let digits = u32::deserialize(d)?;
        Precision::new(digits).map_err(serde::de::Error::custom)
    }
}

/// A non-negative magnitude stored as its base-10 logarithm, so that values
/// like `1e-2500` survive. Zero is `log10 = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnitude {
    log10: f64,
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude { log10: f64::NEG_INFINITY };

    pub fn from_log10(log10: f64) -> Self {
        Self { log10 }
    }

    pub fn from_log2(log2: f64) -> Self {
        Self { log10: log2 / LOG2_10 }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { log10: x.abs().log10() }
    }

    pub fn log10(self) -> f64 {
        self.log10
    }

    pub fn is_zero(self) -> bool {
        self.log10 == f64::NEG_INFINITY
    }

    /// True when `self <= 10^exp10`.
    pub fn at_most_pow10(self, exp10: f64) -> bool {
        self.log10 <= exp10
    }

    /// Value as `f64`; underflows to 0 below about `1e-308`.
    pub fn to_f64(self) -> f64 {
        10f64.powf(self.log10)
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log10.partial_cmp(&other.log10)
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        if !self.log10.is_finite() {
            return f.write_str("inf");
        }
        let mut exp = self.log10.floor();
        let mut mant = 10f64.powf(self.log10 - exp);
        // keep 6 significant digits and renormalize 9.9999995 -> 1.0e+1
        mant = (mant * 1e5).round() / 1e5;
        if mant >= 10.0 {
            mant /= 10.0;
            exp += 1.0;
        }
        write!(f, "{:.5}e{}", mant, exp as i64)
    }
}

impl FromStr for Magnitude {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" || s == "0.0" {
            return Ok(Magnitude::ZERO);
        }
        if s == "inf" {
            return Ok(Magnitude::from_log10(f64::INFINITY));
        }
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(pos) => (&s[..pos], &s[pos + 1..]),
            None => (s, "0"),
        };
        let mant: f64 = mant.parse().map_err(|_| "bad magnitude mantissa".to_string())?;
        let exp: i64 = exp.parse().map_err(|_| "bad magnitude exponent".to_string())?;
        if mant == 0.0 {
            return Ok(Magnitude::ZERO);
        }
        Ok(Magnitude::from_log10(mant.abs().log10() + exp as f64))
    }
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Magnitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
