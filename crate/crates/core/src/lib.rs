//! Exact computations with curves over finite fields: zeta functions, ray
//! class groups, Dirichlet characters, abelian L-series and a finite-level
//! model of the class-field-theory dynamical system of a curve.

pub mod algebra;
pub mod classgroup;
pub mod curve;
pub mod divisor;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod field;
pub mod lseries;
pub mod weil;
pub mod zeta;

pub use error::{Error, Result};
