//! Exact arithmetic and linear solving over the coefficient rings.
//!
//! Everything downstream (matrices, complexes, triples, witnesses) is generic
//! over [`Ring`]: a closed enumeration of coefficient rings with capability
//! flags. Supported base rings are the integers, the rationals, univariate
//! polynomials over the rationals, and the free noncommutative algebra over
//! the rationals on named generators. The field of rational functions appears
//! as a fifth, internal kind: it is the target of fraction-ring evaluation for
//! polynomial coefficients and is never used as a base ring for sessions.

mod element;
mod parse;
mod solve;

pub use element::{RingElement, Value, Word};
pub use parse::parse_element;
pub use solve::{smith_normal_form, solve_linear, LinearOutcome};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CoeffError {
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation unsupported over {0}: {1}")]
    Unsupported(String, String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// The closed enumeration of coefficient-ring kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingKind {
    Integers,
    Rationals,
    /// Univariate polynomials over Q in the variable `t`.
    PolynomialsQ,
    /// Rational functions Q(t); internal evaluation target only.
    RationalFunctionsQ,
    /// Free associative Q-algebra on the named generators.
    FreeAlgebraQ {
        generators: Vec<String>,
    },
}

/// A coefficient ring together with its capability flags.
///
/// Cheap to clone; two rings are interchangeable iff they compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ring {
    kind: Arc<RingKind>,
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({})", self)
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.kind {
            RingKind::Integers => write!(f, "Z"),
            RingKind::Rationals => write!(f, "Q"),
            RingKind::PolynomialsQ => write!(f, "Q[t]"),
            RingKind::RationalFunctionsQ => write!(f, "Q(t)"),
            RingKind::FreeAlgebraQ { generators } => {
                write!(f, "Q<{}>", generators.join(","))
            }
        }
    }
}

impl Ring {
    pub fn integers() -> Self {
        Ring {
            kind: Arc::new(RingKind::Integers),
        }
    }

    pub fn rationals() -> Self {
        Ring {
            kind: Arc::new(RingKind::Rationals),
        }
    }

    pub fn polynomials() -> Self {
        Ring {
            kind: Arc::new(RingKind::PolynomialsQ),
        }
    }

    pub fn rational_functions() -> Self {
        Ring {
            kind: Arc::new(RingKind::RationalFunctionsQ),
        }
    }

    pub fn free_algebra<S: Into<String>>(generators: Vec<S>) -> Self {
        let generators: Vec<String> = generators.into_iter().map(Into::into).collect();
        assert!(
            !generators.is_empty(),
            "free algebra needs at least one generator"
        );
        Ring {
            kind: Arc::new(RingKind::FreeAlgebraQ { generators }),
        }
    }

    pub fn kind(&self) -> &RingKind {
        &self.kind
    }

    pub fn is_commutative(&self) -> bool {
        match &*self.kind {
            RingKind::FreeAlgebraQ { generators } => generators.len() < 2,
            _ => true,
        }
    }

    /// Linear systems are decidable over the integers (Smith normal form) and
    /// over the rationals (elimination). Polynomials and rational functions
    /// are verification-only by contract, as is the free algebra.
    pub fn supports_linear_solving(&self) -> bool {
        matches!(&*self.kind, RingKind::Integers | RingKind::Rationals)
    }

    pub fn is_field(&self) -> bool {
        matches!(
            &*self.kind,
            RingKind::Rationals | RingKind::RationalFunctionsQ
        )
    }

    /// An integral domain whose fraction field the engine can represent.
    pub fn is_domain(&self) -> bool {
        !matches!(&*self.kind, RingKind::FreeAlgebraQ { generators } if generators.len() >= 2)
    }

    /// The fraction ring used by the equality oracle: Z and Q land in Q,
    /// polynomials land in Q(t). None for the free algebra.
    pub fn fraction_ring(&self) -> Option<Ring> {
        match &*self.kind {
            RingKind::Integers | RingKind::Rationals => Some(Ring::rationals()),
            RingKind::PolynomialsQ | RingKind::RationalFunctionsQ => {
                Some(Ring::rational_functions())
            }
            RingKind::FreeAlgebraQ { .. } => None,
        }
    }

    pub fn generator_names(&self) -> &[String] {
        match &*self.kind {
            RingKind::FreeAlgebraQ { generators } => generators,
            _ => &[],
        }
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self)
    }

    pub fn one(&self) -> RingElement {
        RingElement::one(self)
    }

    pub fn from_i64(&self, n: i64) -> RingElement {
        RingElement::from_i64(self, n)
    }

    pub(crate) fn mismatch(&self, other: &Ring) -> CoeffError {
        CoeffError::RingMismatch(self.to_string(), other.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capability_flags() {
        assert!(Ring::integers().is_commutative());
        assert!(Ring::rationals().is_commutative());
        assert!(Ring::polynomials().is_commutative());
        assert!(!Ring::free_algebra(vec!["x", "y"]).is_commutative());
        // a free algebra on one generator is just Q[x]
        assert!(Ring::free_algebra(vec!["x"]).is_commutative());

        assert!(Ring::integers().supports_linear_solving());
        assert!(Ring::rationals().supports_linear_solving());
        assert!(!Ring::polynomials().supports_linear_solving());
        assert!(!Ring::free_algebra(vec!["x", "y"]).supports_linear_solving());
    }

    #[test]
    fn fraction_rings() {
        assert_eq!(Ring::integers().fraction_ring(), Some(Ring::rationals()));
        assert_eq!(
            Ring::polynomials().fraction_ring(),
            Some(Ring::rational_functions())
        );
        assert_eq!(Ring::free_algebra(vec!["x", "y"]).fraction_ring(), None);
    }
}
