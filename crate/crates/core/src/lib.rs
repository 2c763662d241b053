//! Verification laboratory for volume growth of model Riemannian metrics.
//!
//! Warped-product and rotationally symmetric metrics are described by a
//! one-dimensional warp profile. Everything here (curvature, ball volumes,
//! curvature integrals, comparison bounds, spectral verdicts) reduces to
//! knot-aware one-dimensional numerics, and every construction comes with a
//! machine-checkable [`report::VerificationReport`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod par;
pub mod profile;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
