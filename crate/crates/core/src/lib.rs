//! Characterize a squeezed-light source from a phase-scanned homodyne trace.
//!
//! The ratio of the intervals between successive QNL crossings depends only on
//! the squeezing parameter `r`, not on loss or dark noise. From `r` follow the
//! minimum-uncertainty state, the total efficiency (once per quadrature, which
//! doubles as a consistency check) and the OPA escape efficiency.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod efficiency;
pub mod error;
pub mod ratio;
pub mod smooth;
pub mod synth;
pub mod trace;
pub mod variance;

pub use error::{Error, Result};
