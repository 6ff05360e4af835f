// Negated comparisons (`!(x > 0.0)`) are used deliberately throughout: they
// reject NaN along with the out-of-domain sign, which `x <= 0.0` would let
// through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation and analysis toolkit for SLE_κ(ρ) processes across all parameter
//! phases, including the light-cone regime where the force-point weight lies
//! below the continuation threshold and the driving pair requires
//! principal-value compensation.
//!
//! Layering, bottom to top:
//!
//! * [`bessel`] — squared Bessel / Bessel process samplers and the
//!   principal-value functional of 1/X.
//! * [`loewner`] — chordal Loewner solver (vertical-slit discretization),
//!   trace extraction, forward point maps.
//! * [`sle`] — phase classification, derived constants, and driving-function
//!   samplers for SLE_κ(ρ) built on the Bessel machinery.
//! * [`imaginary_geometry`] — boundary-data bookkeeping for GFF flow lines:
//!   coordinate changes, force-point weights, interaction rules.
//! * [`lightcone`] — angle-switching light-cone approximations, pocket
//!   decomposition, pocket ordering, exploration path.
//! * [`analysis`] — box-counting dimension, Hausdorff distance, boundary
//!   coverage, transience and range-equivalence statistics.

pub mod analysis;
pub mod bessel;
pub mod error;
pub mod imaginary_geometry;
pub mod lightcone;
pub mod loewner;
pub mod rng;
pub mod sle;

pub use error::{Error, Result};
