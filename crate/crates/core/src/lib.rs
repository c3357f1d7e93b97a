//! Counterfactual explanations for black-box models via potential-based
//! Bayesian optimisation.
//!
//! A counterfactual is searched for by maximising an exponential-polynomial
//! potential of the model output over a constrained input domain. A Gaussian
//! process models the black-box function itself and the expected improvement
//! of the composed potential is evaluated in closed form.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod acquisition;
pub mod error;
pub mod models;
pub mod potential;
pub mod quadrature;
pub mod search;
pub mod surrogate;
pub mod validation;

pub use error::{CfxError, Result};
