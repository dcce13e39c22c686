//! Experiment drivers for `gaugephase`: problem families, the
//! initialize-then-refine pipeline, recovery curves and the subsampling
//! alignment study.

pub mod align;
pub mod curve;
pub mod error;
pub mod image;
pub mod method;
pub mod problem;
pub mod report;
pub mod run;

pub use error::{HarnessError, Result};
