//! Self-intersection statistics of random geodesics on compact hyperbolic
//! surfaces.

pub mod cli;
pub mod error;
pub mod hyperbolic;
pub mod intersections;
pub mod kernels;
pub mod numeric;
pub mod stats;
pub mod surface;
pub mod tracer;

pub use error::{Error, Result};
