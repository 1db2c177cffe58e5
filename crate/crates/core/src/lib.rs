//! Arbitrary-precision construction of Padé, two-point Padé and type-I
//! Hermite–Padé polynomials for algebraic functions, together with
//! simultaneous root finding and the point-cloud observables used to study
//! their zeros (spurious structures, support pushing, counting measures).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, caching and
//! the command line live in the `hplab` companion crate.
//!
//! Pipeline in one picture:
//!
//! ```text
//! FunctionSpec --build_function_series--> Series
//! Series(es)   --build_*_system---------> OrderSystem
//! OrderSystem  --kernel_solve-----------> HpSolution  --residual_series--> order check
//! HpSolution   --find_roots / certify---> RootCloud   --analysis---------> reports
//! RootCloud    --svg::scatter-----------> figure
//! ```
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod exact;
pub mod linear;
pub mod num;
pub mod precision;
pub mod roots;
pub mod series;
pub mod spec;
pub mod svg;

pub use exact::{parse_exact, Rational};
pub use linear::{
    build_hp_system, build_pade_system, build_two_point_system, kernel_solve, residual_series,
    HpSolution, LinearError, OrderSystem, SystemKind,
};
pub use num::BigComplex;
pub use precision::{Magnitude, Precision, PrecisionError};
pub use roots::{certify, find_roots, RootCloud, RootError};
pub use series::{
    binomial_factor_series, build_function_series, series_add, series_mul, series_pow,
    series_shift, Series, SeriesError,
};
pub use spec::{ExpansionPoint, Factor, FunctionSpec};

/// The bignum backend, re-exported so callers can hold a `Consts` cache for
/// decimal conversion.
pub use astro_float;
