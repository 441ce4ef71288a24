//! Grid-based numerical toolkit for weighted norm inequalities of
//! multilinear operators.
//!
//! The crate discretizes the box `[-L, L]^n` (n = 1 or 2) on a midpoint
//! lattice and provides, on top of that substrate:
//!
//! - growth-weight classes: scalar and multilinear Muckenhoupt-type ball
//!   quantities with `(1 + r)^theta` envelope certification ([`weights`]);
//! - mean-oscillation norms with growth envelopes ([`bmo`]);
//! - critical-ball covers and five local/multilinear maximal operators
//!   ([`maximal`]);
//! - multilinear kernel operators with size/smoothness verification and
//!   direct-quadrature application, plus commutators ([`czkernel`]);
//! - multilinear pseudodifferential operators: symbol class checks, dyadic
//!   frequency partitions, DFT-based application and kernel extraction
//!   ([`pseudo`]);
//! - a campaign harness turning norm inequalities into bounded-ratio
//!   experiments with refinement-stability reporting ([`harness`]).
//!
//! Everything is deterministic: summations run in a fixed index order and
//! all pseudo-randomness derives from explicit seeds through a counter-based
//! generator, so reports are byte-for-byte reproducible.

pub mod bmo;
pub mod czkernel;
pub mod error;
pub mod fit;
pub mod grid;
pub mod harness;
pub mod maximal;
pub mod pseudo;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
pub use fit::{fit_growth, fit_growth_at_theta, GrowthFit};
pub use grid::{
    annulus_mask, ball_average, ball_mask, integrate, lp_norm, weak_lp_norm, Ball, BallFamily,
    GridFunction, GridSpec, Point, Scalar,
};
