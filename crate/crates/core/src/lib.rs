//! Quantum polydisk and ball function algebras, their free power-series
//! parents, quotient norms, the holomorphic deformation algebra and the
//! formal star product, all computed on degree-truncated series.

pub mod combinatorics;
pub mod deformation;
pub mod error;
pub mod free_series;
pub mod io;
pub mod quantum_series;
pub mod quotient_oracle;
pub mod random;
pub mod scalars;
pub mod starprod;
pub mod verify;

pub use error::{Error, Result};
