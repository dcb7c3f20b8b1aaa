//! Distribution functions of matrix-variate beta type I and II distributions
//! over the real division algebras (beta in {1, 2, 4, 8}), and their use as
//! matrix p-values for multivariate linear hypotheses.

pub mod error;
pub mod fixtures;
pub mod hyper;
pub mod jack;
pub mod manova;
pub mod matvbeta;
pub mod mc;
pub mod partitions;
pub mod report;
mod serde_float;
pub mod specfun;
pub mod symmat;

pub use error::{Error, Result};
