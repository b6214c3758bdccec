//! Calculus of finite statistical experiments.
//!
//! Experiments, feature maps and decision rules are Markov kernels between
//! finite spaces. On top of the kernel algebra this crate computes Bayes
//! values, Le Cam deficiencies (as exact linear programs), the quality of
//! unsupervised features through the reconstruction problem, and
//! supervised information-bottleneck style features.

pub mod decision;
pub mod deficiency;
pub mod error;
pub mod generic;
pub mod ib;
pub mod io;
pub mod kernels;
mod lp;
pub mod verify;

pub use decision::{LearningProblem, LossMatrix};
pub use deficiency::DeficiencyResult;
pub use error::{Error, Result};
pub use kernels::{Distribution, FiniteSpace, MarkovKernel};
