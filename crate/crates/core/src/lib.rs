//! Generalized binomial coefficients, Gamma-ratio brackets and bilateral
//! hypergeometric series, with numerical verification of the identities that
//! connect them.

pub mod binomial;
pub mod cli;
pub mod complex;
pub mod error;
pub mod identities;
pub mod numerics;
pub mod series;
pub mod sum;

pub use error::{Error, Result};
