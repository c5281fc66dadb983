//! Spinor representations of conformally immersed surfaces in ℝ³, Nil₃(τ) and ℝ⁴.

pub mod builtins;
pub mod cli;
pub mod dirac3;
pub mod dirac4;
pub mod error;
pub mod expr;
pub mod geomcheck;
pub mod grid;
pub mod io;
pub mod nil3;
pub mod par;
pub mod quatcliff;

pub use error::{Error, Result};
pub use grid::{Domain, Field, ResidualReport};
pub use quatcliff::Quaternion;
