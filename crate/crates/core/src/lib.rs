//! Pseudospherical surfaces on time scales.
//!
//! The crate covers three settings that share one set of formulas:
//! smooth surfaces described by their fundamental forms ([`forms`]), discrete
//! Chebyshev nets built quad by quad from Cauchy data ([`discrete`]), and
//! nets parametrized over arbitrary products of time scales ([`surface`]),
//! where partial delta derivatives ([`timescale`]) interpolate between the two.

// Negated comparisons are how NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geom;
pub mod timescale;
pub mod forms;
pub mod discrete;
pub mod surface;
pub mod samples;
pub mod io;
