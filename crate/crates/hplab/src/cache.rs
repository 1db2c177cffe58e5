//! Series cache. Each (spec, digits) pair keeps its longest series on disk,
//! stored bit-exactly, and shorter requests are served by slicing. Series
//! coefficients do not depend on the requested length, so a slice is
//! identical to a fresh computation.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use hplab_core::num::{bf_decode, bf_encode};
use hplab_core::series::SeriesOrigin;
use hplab_core::{build_function_series, BigComplex, FunctionSpec, Precision, Series, SeriesError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const FORMAT: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Canonical JSON of a spec: field order fixed by the type, defaults omitted.
pub fn canonical_spec(spec: &FunctionSpec) -> String {
    serde_json::to_string(spec).expect("specs always serialize")
}

/// Identity of one requested series: spec, length and precision.
pub fn series_key(spec: &FunctionSpec, len: usize, digits: u32) -> String {
    sha256_hex(format!("{}\n{}\n{}", canonical_spec(spec), len, digits).as_bytes())
}

fn file_key(spec: &FunctionSpec, digits: u32) -> String {
    sha256_hex(format!("{}\n{}", canonical_spec(spec), digits).as_bytes())
}

#[derive(Serialize, Deserialize)]
struct Stored {
    format: u32,
    spec: FunctionSpec,
    digits: u32,
    len: usize,
    coeffs: Vec<(String, String)>,
}

#[derive(Debug, Default)]
pub struct SeriesCache {
    dir: Option<PathBuf>,
    mem: HashMap<(String, u32), Series>,
    hits: usize,
    misses: usize,
}

impl SeriesCache {
    /// `None` keeps everything in memory.
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir, ..Self::default() }
    }

    /// (served from memory or disk, computed)
    pub fn stats(&self) -> (usize, usize) {
        (self.hits, self.misses)
    }

    /// The first `len` coefficients of `spec` at precision `prec`.
    pub fn get(&mut self, spec: &FunctionSpec, len: usize, prec: Precision) -> Result<Series, SeriesError> {
        let len = len.max(1);
        let mk = (canonical_spec(spec), prec.digits());
        if let Some(s) = self.mem.get(&mk) {
            if s.len() >= len {
                self.hits += 1;
                return Ok(s.truncated(len));
            }
        }
        if let Some(s) = self.load(spec, prec) {
            if s.len() >= len {
                self.hits += 1;
                let out = s.truncated(len);
                self.mem.insert(mk, s);
                return Ok(out);
            }
        }
        self.misses += 1;
        let s = build_function_series(spec, len - 1, prec)?;
        // the cache is an optimization; a failed write only costs a recompute
        let _ = self.store(spec, &s);
        self.mem.insert(mk, s.clone());
        Ok(s)
    }

    fn path(&self, spec: &FunctionSpec, digits: u32) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.json", file_key(spec, digits))))
    }

    fn load(&self, spec: &FunctionSpec, prec: Precision) -> Option<Series> {
        let path = self.path(spec, prec.digits())?;
        let text = fs::read_to_string(path).ok()?;
        decode(&text, spec, prec)
    }

    fn store(&self, spec: &FunctionSpec, s: &Series) -> std::io::Result<()> {
        let Some(path) = self.path(spec, s.precision.digits()) else {
            return Ok(());
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let text = encode(spec, s);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text)?;
        fs::rename(tmp, path)
    }
}

fn encode(spec: &FunctionSpec, s: &Series) -> String {
    let stored = Stored {
        format: FORMAT,
        spec: spec.clone(),
        digits: s.precision.digits(),
        len: s.len(),
        coeffs: s.coeffs.iter().map(|c| (bf_encode(&c.re), bf_encode(&c.im))).collect(),
    };
    serde_json::to_string(&stored).expect("cache entries serialize")
}

fn decode(text: &str, spec: &FunctionSpec, prec: Precision) -> Option<Series> {
    let st: Stored = serde_json::from_str(text).ok()?;
    if st.format != FORMAT || &st.spec != spec || st.digits != prec.digits() || st.coeffs.len() != st.len {
        return None;
    }
    let mut coeffs = Vec::with_capacity(st.len);
    for (re, im) in &st.coeffs {
        coeffs.push(BigComplex::new(bf_decode(re)?, bf_decode(im)?));
    }
    Some(Series { precision: prec, coeffs, origin: SeriesOrigin::Spec(spec.clone()) })
}
