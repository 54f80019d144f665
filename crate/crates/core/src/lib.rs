//! Counting definable sets in families of finite structures.
//!
//! The crate is organized bottom-up:
//!
//! - [`logic`]: signatures, formulas and the formula parser.
//! - [`structures`]: finite structures and indexed families, including the
//!   built-in two-to-three bipartite family.
//! - [`counting`]: evaluation, exact counting and fiber spectra.
//! - [`polynomials`]: exact rational polynomials, interpolation and tail
//!   asymptotics.
//! - [`analysis`]: counting-polynomial discovery and class certification
//!   across a family.

pub mod analysis;
pub mod counting;
pub mod logic;
pub mod polynomials;
pub mod structures;
