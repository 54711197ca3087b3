//! Simulation and learning core for predicting touch signals from depth patches.
//!
//! Everything here is pure computation over `alloc`; file formats, configuration
//! and the command line live in the `touchbench` crate.

#![no_std]
// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod dataset;
mod error;
pub mod geometry;
pub mod math;
pub mod model;
pub mod nn;
pub mod recognition;
pub mod render;
pub mod rng;
pub mod shapeclass;
pub mod tactile;

pub use error::{Error, Result};
pub use math::{Mat3, RigidTransform, Vec3};
