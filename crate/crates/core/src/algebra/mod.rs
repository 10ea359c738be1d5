//! Exact integer linear algebra and cyclotomic integers.

pub mod abelian;
pub mod cyclotomic;
pub mod matrix;

pub use abelian::{
    cokernel, cokernel_of_basis, enumerate_homs, AbelianGroupPresentation, HomImages, LatticeBasis,
};
pub use cyclotomic::CyclotomicElem;
pub use matrix::{smith_normal_form, IntMatrix, SmithForm};
