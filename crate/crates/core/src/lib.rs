//! Numerical toolkit for block-holomorphic (`C^n`-holomorphic) function
//! theory on grid-discretised domains of `C^{l_1} x ... x C^{l_n}`.
//!
//! * [`region`]: block shapes, grids, sup-norm geometry, projections and slices.
//! * [`leafspace`]: slice components, leaf graphs and branch-tracked logarithms.
//! * [`funcspace`]: function tuples, derivative checks and function families.
//! * [`hull`]: approximate holomorphically convex hulls and their diagnostics.
//! * [`witness`]: the exhaustion / witness-series construction with certificates.
//! * [`recipe`], [`commands`], [`report`]: corpus generators and CLI plumbing.

pub mod commands;
pub mod error;
pub mod funcspace;
pub mod hull;
pub mod leafspace;
pub mod recipe;
pub mod region;
pub mod report;
pub mod suites;
pub mod witness;

pub use error::{Error, Result};
