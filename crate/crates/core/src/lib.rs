//! Quantum Fisher information and skew informations of subsystems of
//! free-fermion spin chains, with semiclassical predictions and an exact
//! diagonalization reference.

pub mod beyond_sc;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod gaussian;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod semiclassics;

pub use error::{Error, Result};
pub use model::{ChainModel, QuenchPair};
