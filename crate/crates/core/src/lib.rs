//! Convex-function calculus on polytopal domains in dimensions 1 to 3.
//!
//! The crate covers piecewise-affine and piecewise linear-quadratic convex
//! functions, Legendre transforms, infimal convolutions, Moreau-box envelopes,
//! Monge-Ampere measures of piecewise-affine functions and the valuations
//! `c0 + c1 V_n(dom u) + Z_zeta(u)`, where `Z_zeta(u)` integrates
//! `zeta(det D^2 u)` over the domain.

pub mod error;
pub mod funcs;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod measures;
mod qp;
pub mod report;
pub mod sequences;
pub mod transforms;
pub mod valuations;

pub use error::{Error, Result};
pub use report::{CheckReport, Witness};
