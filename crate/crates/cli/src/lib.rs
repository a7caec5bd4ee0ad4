//! Text formats and command line for `martinet-core`: the form expression
//! language, `.frm` files, JSON reports and the `martinet` binary.

pub mod cli;
pub mod dsl;
pub mod frm;
pub mod json;

pub use cli::run;
