//! Numerical laboratory for solution maps of differential equations.
//!
//! The crate solves a nonlinear transport equation on the cylinder by
//! Picard iteration along characteristics, with explicit contraction
//! constants, and pairs each solver with its variational equation so that
//! derivatives of the solution map can be checked against finite
//! differences. Implicit initial value problems, a two-point boundary value
//! problem with resonances, and truncated complex power series for
//! holomorphic equations complete the set.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bvp;
pub mod expr;
pub mod grid;
pub mod harness;
pub mod holo;
pub mod implicit_ode;
pub mod jet;
pub mod quad;
pub mod sensitivity;
pub mod transport;

pub use expr::{EvalError, Expression, ParseError};
pub use grid::{CylFn, GridError, GridFn1D, Level, StencilOrder};
pub use quad::Quadrature;
