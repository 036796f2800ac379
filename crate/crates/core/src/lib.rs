//! Exact post-selection inference for lasso- and elastic-net-selected linear
//! models.
//!
//! The crate is organised the way a run flows:
//!
//! * [`lasso`] solves the penalized regression and certifies the solution
//!   through its KKT conditions;
//! * [`selection`] turns a selected model and sign vector into the affine
//!   constraints `{A y <= b}` describing every response that selects them;
//! * [`pivot`] restricts those constraints to the line through `y` along a
//!   contrast direction, producing a [`truncnorm::TruncationRegion`];
//! * [`truncnorm`] evaluates the truncated Gaussian CDF in log space and
//!   inverts it into equal-tailed confidence intervals;
//! * [`pipeline`] strings the pieces together for every selected coefficient;
//! * [`sim`] checks coverage, FCR and pivot uniformity by Monte Carlo.

pub mod design;
pub mod error;
pub mod lasso;
pub mod linalg;
mod parallel;
pub mod pipeline;
pub mod pivot;
pub mod rng;
pub mod selection;
pub mod sim;
pub mod special;
pub mod stats;
pub mod truncnorm;

pub use design::DesignMatrix;
pub use error::{Error, Result};
pub use lasso::{LassoSolution, PenaltySpec, SolverOptions};
pub use pipeline::{ConditioningMode, InferOptions, Inference, InferenceTarget, Method, SelectiveInterval};
pub use pivot::{ContrastDecomposition, Covariance, LineInterval};
pub use selection::{RowTag, SelectionPolyhedron};
pub use truncnorm::{Interval, TruncationRegion};
