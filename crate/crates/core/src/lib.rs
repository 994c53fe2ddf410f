//! Numerical laboratory for the semilinear parabolic system
//! `u_t = D1 Δu + v^p`, `v_t = D2 Δv + u^q` with singular initial data.
//!
//! The crate provides decreasing rearrangements, weak Zygmund and uniformly
//! local Morrey norms, the spectral heat semigroup on a periodic box, the
//! monotone Picard iteration for mild solutions, and the verification
//! harness that exercises all of them.

// negated comparisons are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod field;
pub mod heat;
pub mod monitor;
pub mod norms;
pub mod phi;
pub mod quad;
pub mod rearrangement;
pub mod report;
pub mod runner;
pub mod spectral;
pub mod supersolution;
pub mod system;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Field, GridGeometry};
