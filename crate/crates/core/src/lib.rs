//! Annealed Ising model on random regular graphs: exact finite-size weights,
//! thermodynamic limits, critical exponents and the quartic scaling limit at
//! criticality.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod criticality;
pub mod error;
pub mod finiten;
pub mod matching;
pub mod output;
pub mod quadrature;
pub mod roots;
pub mod special;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
