//! Symbolic description of the branch-product functions
//! `g(w) = sign * scale * (w^m (prod_j (1 - a_j w)^{alpha_j} + P(w)))^k`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::exact::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionPoint {
    /// Local coordinate `w = 1/z`.
    Infinity,
    /// Local coordinate `w = z`.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    /// Exact complex constant, see [`crate::exact`] for the grammar.
    pub a: String,
    pub alpha: Rational,
}

impl Factor {
    pub fn new(a: &str, alpha: Rational) -> Self {
        Self { a: a.into(), alpha }
    }
}

fn default_sign() -> i8 {
    1
}

fn is_default_sign(s: &i8) -> bool {
    *s == 1
}

fn default_scale() -> String {
    String::from("1")
}

fn is_default_scale(s: &str) -> bool {
    s == "1"
}

fn default_power() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub expansion_point: ExpansionPoint,
    #[serde(default)]
    pub w_power: i32,
    #[serde(default)]
    pub factors: Vec<Factor>,
    /// Coefficients of `P(w)` in ascending order, as exact strings.
    #[serde(default)]
    pub poly_offset: Vec<String>,
    #[serde(default = "default_power")]
    pub power: u32,
    /// `+1` or `-1`; selects the opposite branch of the whole product.
    #[serde(default = "default_sign", skip_serializing_if = "is_default_sign")]
    pub sign: i8,
    /// Exact constant multiplying the whole function.
    #[serde(default = "default_scale", skip_serializing_if = "is_default_scale")]
    pub scale: String,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("power must be a positive integer")]
    ZeroPower,
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),
}

impl FunctionSpec {
    pub fn at_infinity(label: &str, factors: Vec<Factor>) -> Self {
        Self {
            expansion_point: ExpansionPoint::Infinity,
            w_power: 0,
            factors,
            poly_offset: Vec::new(),
            power: 1,
            sign: 1,
            scale: default_scale(),
            label: label.into(),
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.power == 0 {
            return Err(SpecError::ZeroPower);
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(SpecError::BadSign(self.sign));
        }
        Ok(())
    }

    /// The same function multiplied by the exact constant `c`.
    pub fn scaled(&self, c: &str) -> Self {
        let mut out = self.clone();
        out.scale = if is_default_scale(&self.scale) {
            String::from(c)
        } else {
            alloc::format!("({})*({})", self.scale, c)
        };
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_omitted_and_restored() {
        let s = FunctionSpec::at_infinity("f", alloc::vec![Factor::new("1", Rational::new(1, 3).unwrap())]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"expansion_point":"infinity","w_power":0,"factors":[{"a":"1","alpha":"1/3"}],"poly_offset":[],"power":1,"label":"f"}"#
        );
        let back: FunctionSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let neg: FunctionSpec =
            serde_json::from_str(r#"{"expansion_point":"zero","factors":[{"a":"2","alpha":-1}],"sign":-1}"#).unwrap();
        assert_eq!(neg.sign, -1);
        assert_eq!(neg.power, 1);
        assert_eq!(neg.factors[0].alpha, Rational::integer(-1));
    }
}
