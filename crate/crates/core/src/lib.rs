//! Multiple-shot discrimination of qubit unitary channels.
//!
//! The crate bundles the closed-form theory (arc function, ν, diamond
//! norm, Helstrom bound), builders for parallel, sequential and
//! rectangular discrimination circuits, an exact and noisy statevector
//! simulator, outcome classification, and the experiment driver used by
//! the `udisc` command-line tool.

pub mod circuit;
pub mod classification;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod simulator;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, StateVector, C64};
