//! Finite-dimensional toolkit for checking how the factorizability of a pure
//! state depends on the chosen tensor product structure.
//!
//! The building blocks are Schmidt decomposition ([`schmidt`]), the quantum
//! covariance function ([`qcf`]) and explicit refactorizations of the global
//! Hilbert space ([`tps`]). The [`grid`], [`spin`] and [`bell`] modules hold
//! the worked examples, and [`cli`] drives them from the command line.

pub mod bell;
pub mod cli;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod par;
pub mod qcf;
pub mod sampling;
pub mod schmidt;
pub mod spin;
pub mod state;
pub mod tps;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use state::{Observable, StateVector};
pub use tps::{IndexBijection, TensorProductStructure};
