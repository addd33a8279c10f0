//! Computational toolkit for two-family graph semigroups with unitary commutation
//! relations: word arithmetic, truncated Fock spaces, representations, dilations and
//! star-monomial rewriting.

pub mod error;
pub mod numkernel;
pub mod semigroup;
pub mod urelations;
pub mod fock;
pub mod reps;
pub mod stara;
pub mod dilation;
pub mod paperlab;
pub mod io;

pub use error::{Error, Result};
