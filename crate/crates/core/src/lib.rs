//! Exact correspondence calculus for split Chow motives with coefficients in
//! `Z/m`, and a certifying implementation of the going-down descent for
//! direct summands `(M(X), p)`.

pub mod cli;
pub mod correspondences;
pub mod cycles;
pub mod descent;
pub mod error;
pub mod instance;
pub mod modring;
pub mod properties;
pub mod rationality;
pub mod report;
pub mod split_algebra;

pub use correspondences::Correspondence;
pub use cycles::{CycleClass, ProductSpace};
pub use error::{Error, Result};
pub use modring::{Matrix, Modulus, Scalar};
pub use split_algebra::SplitAlgebra;
