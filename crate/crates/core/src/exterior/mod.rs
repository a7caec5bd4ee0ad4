//! Differential forms with truncated polynomial coefficients on a single
//! chart at the origin, and the maps and vector fields acting on them.

mod field;
mod form;
mod map;
mod tensor;

pub use field::PolyVectorField;
pub use form::{mask_indices, mask_of, wedge_sign, DiffForm};
pub use map::{formal_inverse, PolyMapGerm, Slice, EXACT_JET};
pub use tensor::{ConstantTensor, Subspace};
