//! Edge tracing with Gaussian process regression.
//!
//! An edge of interest is modelled as a function from image column to row
//! height. Starting from rough endpoint estimates, the tracer repeatedly
//! samples curves from the current posterior, scores them against the image
//! gradient, builds a weighted density of where the best curves pass, and
//! accepts the best-scoring pixel per column interval into the observation
//! set until every interval has one.

pub mod error;
pub mod eval;
pub mod gp;
pub mod image;
pub mod tracer;

pub use error::{Error, Result};
