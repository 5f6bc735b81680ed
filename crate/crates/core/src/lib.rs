//! Finite-time boundary stabilization of 1-D quasilinear hyperbolic systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`transport`] solves the scalar linear transport equation
//!   `∂t y + a(t,x) ∂x y = 0` by the method of characteristics;
//! * [`feedback`] holds the signed-power boundary law
//!   `w' = -K sgn(w) |w|^γ` and its closed-form solution;
//! * [`quasilinear`] closes the loop for a 2×2 diagonal system with one or two
//!   boundary feedbacks, realizing the fixed-point operator by Picard iteration;
//! * [`saintvenant`] maps shallow-water states to Riemann invariants and back;
//! * [`network`] couples canals on a tree and solves them leaves-to-root;
//! * [`oracle`] is an independent first-order upwind solver used for
//!   cross-validation.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod feedback;
pub mod grid;
pub mod network;
pub mod oracle;
pub mod profile;
pub mod quasilinear;
pub mod roots;
pub mod saintvenant;
pub mod transport;

pub use error::{Error, Result};
pub use grid::{Domain, Field, Grid};
pub use profile::{BoundaryTrace, Profile};
