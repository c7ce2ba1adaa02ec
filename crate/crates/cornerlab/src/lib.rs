//! A laboratory for corner percolation on the square lattice.
//!
//! The model keeps, in every column and row, every second edge of the grid,
//! so each vertex sees exactly one of four corner shapes. All components are
//! finite cycles; their geometry is driven by two derived simple random
//! walks. This crate provides:
//!
//! - configuration windows, walks and the two-way height function
//!   ([`lattice`]);
//! - cycle tracing, marginal excursions, levels and passages ([`contour`]);
//! - conditioned excursion sampling and exact hitting probabilities
//!   ([`excursion`]);
//! - two independent cycle constructions from a compatible excursion pair
//!   ([`builder`]);
//! - the exact expected-length recursion and exponent extraction
//!   ([`series`]);
//! - Monte Carlo estimators for the tail, length and scaling exponents
//!   ([`mc`]);
//! - the xor-based variant models on the square and triangular lattices
//!   ([`xor`]);
//! - deterministic SVG rendering and report output ([`render`], [`report`],
//!   [`cli`]).
//!
//! Start from the `examples/` directory; each example exercises one
//! capability end to end. The `cornerlab` binary wraps the same entry
//! points behind a small CLI.

pub mod builder;
pub mod cli;
pub mod contour;
pub mod error;
pub mod excursion;
pub mod lattice;
pub mod mc;
pub mod render;
pub mod report;
pub mod rng;
pub mod series;
pub mod xor;

pub use error::{Error, Result};
