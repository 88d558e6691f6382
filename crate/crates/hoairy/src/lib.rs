//! Higher order finite-temperature Airy kernel determinants, the integro-differential
//! Painlevé-II and mKdV hierarchies, and numerical checks tying them together.

pub mod error;
pub mod specfun;

pub use error::{Error, Result};
pub mod quadrature;
pub mod weights;
pub mod oracle;
pub mod fredholm;
pub mod hierarchy_cas;
pub mod idpii_solver;
pub mod mkdv_check;
pub mod acceptance;
