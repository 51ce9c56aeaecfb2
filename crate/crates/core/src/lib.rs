//! A computational lab for Dirichlet series with gamma-factor functional equations.

pub mod arith;
pub mod error;
pub mod fit;
pub mod number;
pub mod quadrature;

pub use error::{LabError, Result};
pub use number::{CReal, Rat, Real, C64};
pub mod continuation;
pub mod gamma;
pub mod model;
pub mod corpus;
pub mod gamma_sets;
pub mod evaluator;
pub mod detector;
pub mod zeros;
