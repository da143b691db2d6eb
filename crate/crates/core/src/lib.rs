//! Linear regression from partially observed attributes.
//!
//! During training, at most `k` of the `d` attributes of each example may be
//! revealed, chosen actively through a budget-enforcing oracle. The crate
//! provides the two partial-information learners (a loss-estimating batch
//! learner and a gradient-estimating stochastic learner), full-information
//! reference learners, synthetic hardness distributions with closed-form
//! risks, MNIST ingestion, and an experiment harness with cross-validation
//! and learning curves.

pub mod aer;
pub mod baseline;
pub mod datasets;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod full_info;
pub mod model;
pub mod projection;
pub mod rng;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use evaluation::{Algorithm, Model};
pub use model::{evaluate_loss, AttributeOracle, Dataset, LabeledExample, WeightVector};
pub use rng::RngStream;
pub use solver::SolverConfig;
