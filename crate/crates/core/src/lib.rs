//! Hensel lifting of polynomial factorizations and roots over local rings
//! whose multiplication need not be commutative.
//!
//! The supported rings are truncated series `A/m^N` with a principal maximal
//! ideal `m = (g)`: commutative power series `k[[t]]`, Volterra operators
//! `k[[∂⁻¹]]` over a differential field, and twisted series `k[[τ; σ]]`.
//! Polynomials over `A` use a central indeterminate `x`.

pub mod cli;
mod dense;
pub mod error;
pub mod field;
pub mod hensel;
pub mod localring;
pub mod ncpoly;
pub mod oracle;
pub mod parse;
pub mod respoly;
mod text;

pub use error::{Error, Result};
pub use field::{FieldContext, FieldElement};
pub use hensel::{LiftOutcome, LiftStatus, ObstructionKind, ObstructionReport, Outcome};
pub use localring::{LocalElement, LocalRing, LocalRingContext, RingKind};
pub use ncpoly::LocalPoly;
pub use respoly::ResiduePoly;
