//! # gcfx
//!
//! Exact arithmetic toolkit for generalized continued fractions
//!
//! ```text
//! b0 + a1/(b1 + a2/(b2 + a3/(b3 + ...)))
//! ```
//!
//! with positive integer partial coefficients.
//!
//! The crate is organized around a handful of modules:
//!
//! - [`cfcore`]: convergent recurrences over arbitrary precision integers,
//!   the determinant identity and guaranteed rational enclosures of the limit.
//! - [`transforms`]: equivalence transformations, automatic conversion of
//!   rational coefficients to integers, linear fractional maps and transport of
//!   irrationality measures through them.
//! - [`bounds`]: upper bounds for the asymptotic irrationality exponent from
//!   declared coefficient growth (bounded, polynomial, exponential), and an
//!   empirical estimator of the `log Π_n / log B_n` ratio.
//! - [`constructions`]: continued fractions with partial numerators in `{1, 2}`
//!   that realize a prescribed irrationality exponent.
//! - [`catalog`]: named families (Thue–Morse, Fibonacci word, `e^(x/y)`,
//!   Rogers–Ramanujan, Tasoev, Bundschuh, Tribonacci, ...).
//! - [`cli`]: the `gcfx` command line front end.
//! - [`verify`]: batch runner over the invariants above, one worker per check.
//!
//! Big integers are always kept exact. Floating point only appears in reported
//! exponents and log-domain growth tracking.

pub mod bounds;
pub mod catalog;
pub mod cfcore;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod interval;
pub mod numeric;
pub mod transforms;
pub mod verify;

pub use error::{CfError, Result};
