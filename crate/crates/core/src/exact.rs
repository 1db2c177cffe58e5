//! Exact inputs: branch points given as strings and rational exponents.
//!
//! Branch-point grammar (whitespace ignored):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | atom
//! atom    := number ['i'] | 'i' | '(' expr ')' | 'sqrt(' expr ')'
//!          | 'pow(' expr ',' rational ')'
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! `sqrt` and `pow` take the principal branch. The expression is evaluated
//! with 64 guard bits and rounded once to the requested width.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use astro_float::Consts;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::num::{bf_parse_decimal, BigComplex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("cannot parse `{input}` at offset {offset}: {reason}")]
    Syntax { input: String, offset: usize, reason: &'static str },
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("invalid rational `{0}`")]
    BadRational(String),
}

/// Parses an exact complex literal and rounds it to `bits` of mantissa.
pub fn parse_exact(input: &str, bits: usize) -> Result<BigComplex, ExactError> {
    let toks: Vec<(usize, u8)> =
        input.bytes().enumerate().filter(|(_, b)| !b.is_ascii_whitespace()).collect();
    let mut cc = Consts::new().expect("constant cache");
    let mut parser = Parser { input, toks, pos: 0, p: bits + 64, cc: &mut cc };
    let v = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(v.round(bits))
}

struct Parser<'a> {
    input: &'a str,
    toks: Vec<(usize, u8)>,
    pos: usize,
    p: usize,
    cc: &'a mut Consts,
}

impl Parser<'_> {
    fn err(&self, reason: &'static str) -> ExactError {
        let offset = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.input.len());
        ExactError::Syntax { input: self.input.to_string(), offset, reason }
    }

    fn peek(&self) -> Option<u8> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, reason: &'static str) -> Result<(), ExactError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(reason))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        let kb = kw.as_bytes();
        if self.pos + kb.len() > self.toks.len() {
            return false;
        }
        if self.toks[self.pos..self.pos + kb.len()].iter().map(|t| t.1).eq(kb.iter().copied()) {
            self.pos += kb.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<BigComplex, ExactError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc = acc.add(&t, self.p);
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc = acc.sub(&t, self.p);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<BigComplex, ExactError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let t = self.unary()?;
                acc = acc.mul(&t, self.p);
            } else if self.eat(b'/') {
                let t = self.unary()?;
                if t.is_zero() {
                    return Err(ExactError::DivisionByZero(self.input.to_string()));
                }
                acc = acc.div(&t, self.p);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<BigComplex, ExactError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<BigComplex, ExactError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')', "expected `)`")?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                if self.eat(b'i') {
                    Ok(BigComplex::new(crate::num::bf_zero(), v.re))
                } else {
                    Ok(v)
                }
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(BigComplex::i(self.p))
            }
            _ => {
                if self.keyword("sqrt(") {
                    let v = self.expr()?;
                    self.expect(b')', "expected `)` after sqrt argument")?;
                    Ok(v.principal_root(2, self.p))
                } else if self.keyword("pow(") {
                    let v = self.expr()?;
                    self.expect(b',', "expected `,` in pow")?;
                    let start = self.pos;
                    while let Some(c) = self.peek() {
                        if c == b')' {
                            break;
                        }
                        self.pos += 1;
                    }
                    let text: String = self.toks[start..self.pos].iter().map(|t| t.1 as char).collect();
                    let r: Rational = text.parse().map_err(|_| self.err("bad rational exponent"))?;
                    self.expect(b')', "expected `)` after pow exponent")?;
                    pow_rational(&v, r, self.p).ok_or(ExactError::DivisionByZero(self.input.to_string()))
                } else {
                    Err(self.err("expected number, `i`, `(`, sqrt or pow"))
                }
            }
        }
    }

    fn number(&mut self) -> Result<BigComplex, ExactError> {
        let start = self.pos;
        let digits = |s: &mut Self| {
            let b = s.pos;
            while matches!(s.peek(), Some(c) if c.is_ascii_digit()) {
                s.pos += 1;
            }
            s.pos > b
        };
        let int = digits(self);
        let mut frac = false;
        if self.eat(b'.') {
            frac = digits(self);
        }
        if !int && !frac {
            return Err(self.err("expected digits"));
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if !self.eat(b'+') {
                self.eat(b'-');
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        let text: String = self.toks[start..self.pos].iter().map(|t| t.1 as char).collect();
        let v = bf_parse_decimal(&text, self.p, self.cc).ok_or_else(|| self.err("bad number"))?;
        Ok(BigComplex::from_real(v))
    }
}

/// Principal `z^{p/q}`; `None` for a zero base with negative exponent.
pub fn pow_rational(z: &BigComplex, r: Rational, p: usize) -> Option<BigComplex> {
    if z.is_zero() {
        return if r.num > 0 {
            Some(BigComplex::zero())
        } else if r.num == 0 {
            Some(BigComplex::one(p))
        } else {
            None
        };
    }
    let root = z.principal_root(r.den as u32, p);
    Some(root.powi(r.num, p))
}

/// Reduced fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let (mut n, mut d) = (num / g.max(1), den / g.max(1));
        if d < 0 {
            n = -n;
            d = -d;
        }
        Some(Self { num: n, den: d })
    }

    pub fn integer(n: i64) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn numer(self) -> i64 {
        self.num
    }

    pub fn denom(self) -> i64 {
        self.den
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExactError::BadRational(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: i64 = n.parse().map_err(|_| bad())?;
        let d: i64 = d.parse().map_err(|_| bad())?;
        Rational::new(n, d).ok_or_else(bad)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Rational;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational like \"1/3\" or an integer")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::integer(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Rational, E> {
                i64::try_from(v).map(Rational::integer).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
