//! Numerical toolkit for Riesz characteristics of cone subequations,
//! radial Riesz kernels, tangential flows and density estimation.

// Negated comparisons are used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod flow;
pub mod linalg;
pub mod par;
pub mod radial;
pub mod report;
pub mod riesz;
pub mod subeq;

pub use error::{Error, Result};
pub use field::{Certificate, Field, ScalarField};
pub use report::PropertyReport;
