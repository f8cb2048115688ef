//! Exact computations in universal (Cohn) localizations of additive
//! categories.
//!
//! The base category is `Free(R)`: finitely generated free modules over a
//! coefficient ring, with matrices as morphisms. Localized morphisms are
//! carried as triples `g ∘ s⁻¹ ∘ i` whose middle map owns a triangular
//! certificate placing its cone in the localizing class. On top of that sit
//! the bounded homotopy category (cones, shifts, null-homotopy decisions),
//! witness-based equality checking, a decidable fraction-ring oracle for
//! commutative coefficients, and the stupid weight structure with its heart
//! computations.

pub mod addcat;
pub mod coeff;
pub mod complexes;
pub mod equality;
pub mod localization;
pub mod sample;
pub mod triangular;
pub mod weights;

pub use addcat::{FreeObject, MatMorphism};
pub use coeff::{Ring, RingElement};
pub use complexes::{BoundedComplex, ChainMap, Homotopy};
pub use localization::LocTriple;
pub use triangular::{SSet, TriangularCert};

use thiserror::Error;

/// Errors shared by the engine modules.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Coeff(#[from] coeff::CoeffError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(EngineError::Shape(msg.into()))
}
