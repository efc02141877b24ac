//! Exact minimum convex partition of planar point sets.
//!
//! The pipeline enumerates every empty convex polygon ("face") over the
//! input points, prunes dominated faces, and solves a face-selection integer
//! program whose rows balance faces across every edge.

pub mod bounds;
pub mod error;
pub mod faces;
pub mod geometry;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
