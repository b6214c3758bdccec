//! Finite probability spaces, distributions and Markov kernels.
//!
//! Kernels are column-stochastic: a kernel `X → Y` is a `|Y| × |X|` matrix
//! whose column `x` is the output distribution for input `x`. Composition is
//! matrix multiplication and pushing a distribution forward is a
//! matrix-vector product.

mod distribution;
mod kernel;
mod space;

pub use distribution::{variational_divergence, Distribution, STOCHASTIC_TOL};
pub use kernel::{
    bayes_inverse, compose, joint, pushforward, BayesInverse, JointDistribution, MarkovKernel,
};
pub use space::FiniteSpace;

pub(crate) use distribution::{argmax, argmin, l1_distance};
pub(crate) use space::ensure_same;
