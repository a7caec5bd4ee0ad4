//! Exact local invariants of singular symplectic form germs.
//!
//! Everything here works on jet-truncated polynomial data over the rationals:
//! closed 2-forms on `K^{2n}` near the origin, their Martinet hypersurfaces,
//! restrictions, kernels and orientations, the constructive normal-form
//! lemmas, the sufficient-condition equivalence decider, and a floating point
//! Moser flow verifier.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod exterior;
pub mod harness;
pub mod invariants;
pub mod linalg;
pub mod moser;
pub mod normal_form;
pub mod scalar_poly;

pub use error::{Error, Result};
pub use exterior::{ConstantTensor, DiffForm, PolyMapGerm, PolyVectorField, Slice, Subspace};
pub use scalar_poly::{Chart, Monomial, Rational, TruncatedPoly};
