//! Exact truncated multivariate polynomials over `Q` and the local-algebra
//! decision kernels built on them.

mod chart;
mod local;
mod poly;

pub use chart::Chart;
pub use local::{
    euler_field, find_quasi_homogeneous_weights, isolated_singularity_certificate, local_divide,
    nakayama_contains_power, nakayama_search, quasi_homogeneous_check, regular_sequence_check, Nakayama,
    RegularSequence, RegularSequenceConfig,
};
pub use poly::{monomials_of_degree, poly_arith, ArithKind, Monomial, TruncatedPoly};

/// Exact scalar field.
pub type Rational = num_rational::BigRational;

use num_traits::{One, Zero};

pub(crate) fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub(crate) fn qf(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub(crate) fn q0() -> Rational {
    Rational::zero()
}

pub(crate) fn q1() -> Rational {
    Rational::one()
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(r: &Rational) -> i8 {
    use num_traits::Signed;
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}
