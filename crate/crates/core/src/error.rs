use alloc::string::String;
use core::fmt;

/// Errors raised by the symbolic and numeric routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    ChartMismatch,
    UnknownVariable(String),
    DegreeOverflow { degree: usize, dim: usize },
    ZeroDegreeContraction,
    NotClosed,
    /// `f` vanishes identically at the working jet order.
    DegenerateMartinet,
    NotQuasiHomogeneous,
    NotDivisible(String),
    SingularLinearPart,
    OddDimension(usize),
    WrongVariableCount { expected: usize, found: usize },
    Precondition(String),
    TemplateMismatch(String),
    Infeasible { order: u32, what: String },
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ChartMismatch => write!(f, "operands live on different charts"),
            Error::UnknownVariable(v) => write!(f, "unknown variable `{v}`"),
            Error::DegreeOverflow { degree, dim } => {
                write!(f, "form degree {degree} exceeds chart dimension {dim}")
            }
            Error::ZeroDegreeContraction => write!(f, "cannot contract a 0-form"),
            Error::NotClosed => write!(f, "form is not closed at the working jet order"),
            Error::DegenerateMartinet => {
                write!(f, "omega^n vanishes identically at the working jet order")
            }
            Error::NotQuasiHomogeneous => write!(f, "function is not quasi-homogeneous"),
            Error::NotDivisible(what) => write!(f, "exact division failed: {what}"),
            Error::SingularLinearPart => write!(f, "map germ has a singular linear part"),
            Error::OddDimension(d) => write!(f, "chart dimension {d} is odd"),
            Error::WrongVariableCount { expected, found } => {
                write!(f, "expected {expected} variables, found {found}")
            }
            Error::Precondition(what) => write!(f, "precondition failed: {what}"),
            Error::TemplateMismatch(what) => write!(f, "template mismatch: {what}"),
            Error::Infeasible { order, what } => {
                write!(f, "linear system infeasible at order {order}: {what}")
            }
            Error::Numerical(what) => write!(f, "numerical failure: {what}"),
        }
    }
}

impl core::error::Error for Error {}
