//! Boundary-control wave model for the Sturm–Liouville operator
//! `-u'' + q u` on `[0, l]`.
//!
//! The pipeline runs from a potential to its Dirichlet eigensystem and kernel
//! basis ([`sl_solver`]), through boundary-controlled waves
//! ([`boundary_control`]) and the wave spectrum geometry ([`geometry`]), to the
//! coordinate model space ([`wave_model`]) and the matrix model operator whose
//! coefficients determine `q` up to reflection ([`model_operator`]).

// `!(x > 0.0)` guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_control;
pub mod config;
pub mod control;
pub mod error;
pub mod geometry;
mod expr;
pub mod grid;
pub mod model_operator;
pub mod pipeline;
pub mod potential;
pub mod sl_solver;
pub mod verify;
pub mod wave_model;

pub use error::{Error, Result};
