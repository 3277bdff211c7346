//! Hypocoercivity analysis for linear semi-dissipative Hamiltonian systems
//! `E x' = (J - R) x`: HC-index, staircase form, strict Lyapunov weights,
//! and the modal Oseen models on the 2D torus.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
extern crate alloc;

pub mod error;
pub mod hc_index;
pub mod linalg;
pub mod lyapunov;
pub mod oseen;
pub mod simulate;
pub mod staircase;
pub mod types;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use types::{DaeTriple, ToleranceConfig};
