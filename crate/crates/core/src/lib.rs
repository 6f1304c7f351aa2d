//! Human-body blockage simulation over dense receiver array manifolds.
//!
//! The crate computes complex field samples on a 3D grid of receivers behind
//! a moving absorbing body, turns ensembles of body micro-movements into
//! attenuation images and per-receiver statistics, and carries a small 2D
//! method-of-moments solver used as an independent physics check.

pub mod cli;
pub mod config;
pub mod cylinder_series;
pub mod dataset;
pub mod diffraction;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod imaging;
pub mod mom2d;
pub mod pipeline;
pub mod stats;

pub use error::{Error, Result};
