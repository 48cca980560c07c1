//! Riesz means of Dirichlet Laplacians and Schrödinger operators on
//! quasi-bounded domains of infinite volume: closed-form bounds for horn
//! regions and spiny urchins, a one-dimensional shooting eigensolver, and a
//! finite-difference eigensolver used to check the bounds numerically.

pub mod error;
pub mod fdverify;
pub mod horn;
pub mod lt2d;
pub mod quad;
pub mod report;
pub mod riesz;
pub mod schrodinger1d;
pub mod specfun;
pub mod urchin;

pub use error::{Error, Result};
pub use report::{BoundKind, BoundReport};
pub use riesz::{EigenvalueSpectrum, Exactness, IntervalPartition};
