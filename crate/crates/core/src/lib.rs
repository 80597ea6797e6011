//! Spectral flow, Maslov indices and symmetry decompositions for linear
//! Hamiltonian and Sturm-Liouville systems.

pub mod error;
pub mod flow;
pub mod iteration;
pub mod linalg;
pub mod maslov;
pub mod sem;
pub mod spectral;
pub mod suites;
pub mod symmetry;
pub mod symplectic;

pub use error::{Error, Result};
pub use linalg::{C64, CMat, CVec};
