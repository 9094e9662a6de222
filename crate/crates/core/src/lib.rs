//! Finite-dimensional partial *-algebras, completely positive
//! conjugate-bilinear maps, and their Stinespring-type dilations.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: tolerance-governed hermitian eigensolvers, PSD and rank
//!   decisions, subspaces, joint diagonalization.
//! - [`palgebra`]: partial *-algebras encoded by a basis-pair
//!   multiplication table, axiom validation, multiplier spaces.
//! - [`cbmap`]: conjugate-bilinear maps into sesquilinear forms, complete
//!   positivity, core conditions, constructors.
//! - [`dilation`]: the quotient construction of the dilation and its
//!   verifiers (uniqueness, largest core, isometry, commutants).
//! - [`cone`]: polynomial matrices, pointwise PSD falsification, sums of
//!   squares and cone complete positivity.
//! - [`cli`]: JSON formats, reports, fixture corpus and the command-line
//!   front end.

pub mod cbmap;
pub mod check;
pub mod cli;
pub mod cone;
pub mod dilation;
pub mod error;
pub mod fixtures;
pub mod numerics;
pub mod palgebra;

pub use error::{Error, Result};
