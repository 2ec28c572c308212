//! Exactly solvable position-dependent-mass Schrödinger problems built from
//! shape-invariant superpotentials, and an independent variable-mass
//! eigensolver that checks them.
//!
//! The Hamiltonian is `H = -d/dx (1/2m(x)) d/dx + V(x)` with `1/(2m) = U²`.
//! Each family is factorized as `H₁ = A†A` with `A = U d/dx + W(x, a)`.

pub mod cli;
pub mod eigensolver;
pub mod error;
pub mod families;
pub mod grid;
pub mod profiles;
pub mod quadrature;
pub mod susy;
pub mod verify;

pub use error::{GsipError, Result};
pub use families::{Family, FamilyKind, FamilySpec};
pub use grid::{Grid, GridFunction};
pub use profiles::{Interval, MassProfile, ProfileKind};
