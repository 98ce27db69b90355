//! Positivity cones of `(p,p)`-forms and generalized p-Kähler structures on
//! complex nilmanifolds.

pub mod catalog;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod grassmann;
pub mod linalg;
pub mod lp;
pub mod nilmanifold;
pub mod poly;
pub mod positivity;
pub mod product;
pub mod report;
pub mod scalar;
pub mod specfile;

pub use error::{Error, Result};
pub use exterior::{ExactForm, FloatForm, Form, MultiIndex, PPVector, PVector};
pub use scalar::{GaussianRational, Scalar};
