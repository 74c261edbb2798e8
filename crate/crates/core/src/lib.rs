//! Exact and numerical tools for symmetric function spaces: decreasing rearrangements,
//! symmetric norms, uniform submajorization, conditional expectations, Hardy-type
//! averages, singular traces and the verification suite built on them.

pub mod error;
pub mod averaging;
pub mod io;
pub mod linalg;
pub mod majorization;
pub mod norms;
pub mod rational;
pub mod seq;
pub mod step;
pub mod traces;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Q;
pub use seq::{RSeq, Seq};
pub use step::{PartialSum, SignedStep, StepFn};
