//! Einstein–Hilbert functional on the Reeb cone of a labelled polytope.

pub mod cli;
pub mod cubature;
pub mod error;
pub mod json;
pub mod linalg;
pub mod optimizer;
pub mod polytope;
pub mod quadrature;
pub mod reeb;
pub mod report;
pub mod scalar;
pub mod testconfig;

pub use error::{Error, Result};
pub use polytope::LabelledPolytope;
pub use reeb::{ReebCalculus, ReebVector};
