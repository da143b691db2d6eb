//! The gradient-estimating stochastic learner: a Pegasos-style update driven
//! by the sparse unbiased gradient estimate, with an L1 projection after
//! every step and iterate averaging as the output.

use crate::error::{Error, Result};
use crate::estimators::{estimate_gradient, GradientEstimate};
use crate::evaluation::{Algorithm, Model};
use crate::model::{AttributeOracle, Dataset, WeightVector};
use crate::projection::project_l1;
use crate::rng::RngStream;

/// Stochastic learner configuration.
#[derive(Debug, Clone)]
pub struct AerConfig {
    /// Per-example attribute budget; even, >= 2.
    pub k: usize,
    /// Regularization strength; > 0.
    pub lambda: f64,
    /// L1 radius for the projection step; > 0.
    pub b: f64,
    pub seed: u64,
}

impl AerConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 2 || !self.k.is_multiple_of(2) {
            return Err(Error::OddBudget(self.k));
        }
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.b.is_nan() || self.b <= 0.0 {
            return Err(Error::NonPositiveRadius(self.b));
        }
        Ok(())
    }
}

/// Mutable training state: current iterate, running sum of iterates, and the
/// 1-based iteration counter.
#[derive(Debug, Clone)]
pub struct AerState {
    pub w: WeightVector,
    iterate_sum: WeightVector,
    pub t: usize,
}

impl AerState {
    pub fn new(d: usize) -> Self {
        AerState {
            w: WeightVector::zeros(d),
            iterate_sum: WeightVector::zeros(d),
            t: 1,
        }
    }

    /// Average of all post-projection iterates so far.
    pub fn averaged(&self) -> WeightVector {
        let mut avg = self.iterate_sum.clone();
        let steps = self.t - 1;
        if steps > 0 {
            avg.scale(1.0 / steps as f64);
        }
        avg
    }
}

/// The auto regularization schedule: lambda = ((B+1) d / B2) sqrt(ln(m)/(m k)).
/// Natural logarithm.
pub fn default_lambda(b: f64, b2: f64, d: usize, m: usize, k: usize) -> Result<f64> {
    if b.is_nan() || b <= 0.0 || b2.is_nan() || b2 <= 0.0 || d == 0 || k == 0 {
        return Err(Error::InvalidArgument(
            "default_lambda requires positive B, B2, d, k".into(),
        ));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(
            "default_lambda requires m >= 2".into(),
        ));
    }
    Ok((b + 1.0) * d as f64 / b2 * ((m as f64).ln() / (m as f64 * k as f64)).sqrt())
}

/// Apply one update from an already-computed gradient:
/// w <- (1 - 1/t) w - (1/(lambda t)) g, then project onto the L1 ball.
pub fn aer_step_with_gradient(
    state: &mut AerState,
    estimate: &GradientEstimate,
    lambda: f64,
    b: f64,
) -> Result<()> {
    let t = state.t as f64;
    state.w.scale(1.0 - 1.0 / t);
    state.w.axpy(-1.0 / (lambda * t), &estimate.g);
    state.w = project_l1(&state.w, b)?.u;
    state.iterate_sum.axpy(1.0, &state.w);
    state.t += 1;
    Ok(())
}

/// One stochastic step: estimate the gradient through the oracle, update,
/// project. Never exceeds the oracle budget k.
pub fn aer_step(
    state: &mut AerState,
    oracle: &mut AttributeOracle,
    cfg: &AerConfig,
    rng: &mut RngStream,
) -> Result<()> {
    let estimate = estimate_gradient(oracle, &state.w, cfg.k, rng)?;
    aer_step_with_gradient(state, &estimate, cfg.lambda, cfg.b)
}

/// Single pass over the dataset in order; the output weights are the average
/// of all post-projection iterates. Consumes at most k attributes per
/// example (exactly k whenever the current iterate is nonzero).
pub fn train_aer(dataset: &Dataset, cfg: &AerConfig) -> Result<Model> {
    train_aer_inner(dataset, cfg, None)
}

/// Like [`train_aer`], also returning the per-iteration L1 norm of the
/// post-projection iterate (diagnostic trace).
pub fn train_aer_traced(dataset: &Dataset, cfg: &AerConfig) -> Result<(Model, Vec<f64>)> {
    let mut trace = Vec::with_capacity(dataset.len());
    let model = train_aer_inner(dataset, cfg, Some(&mut trace))?;
    Ok((model, trace))
}

fn train_aer_inner(
    dataset: &Dataset,
    cfg: &AerConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Model> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = RngStream::new(cfg.seed);
    let mut state = AerState::new(dataset.dim());
    let mut attributes = 0u64;
    for example in dataset.iter() {
        let mut oracle = AttributeOracle::new(example, cfg.k);
        aer_step(&mut state, &mut oracle, cfg, &mut rng)?;
        debug_assert!(oracle.revealed_count() <= cfg.k);
        attributes += oracle.revealed_count() as u64;
        if let Some(t) = trace.as_deref_mut() {
            t.push(state.w.l1_norm());
        }
    }
    let mut model = Model::new(Algorithm::Aer, state.averaged(), cfg.seed, dataset.len());
    model.attributes_consumed = attributes;
    model.set_param("k", cfg.k as f64);
    model.set_param("b", cfg.b);
    model.set_param("lambda", cfg.lambda);
    Ok(model)
}

/// Full-information Pegasos with the exact squared-loss gradient
/// 2 (<w,x> - y) x in place of the estimate. Cycles the dataset for
/// `passes` epochs; iterate averaging runs over every step.
///
/// This is the estimator-bypass reference: with exact gradients the update
/// rule, projection, and averaging are identical to the stochastic learner.
pub fn train_pegasos_exact(dataset: &Dataset, lambda: f64, b: f64, passes: usize) -> Result<Model> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if lambda.is_nan() || lambda <= 0.0 || b.is_nan() || b <= 0.0 {
        return Err(Error::InvalidArgument(
            "pegasos requires positive lambda and B".into(),
        ));
    }
    let d = dataset.dim();
    let mut state = AerState::new(d);
    for _ in 0..passes {
        for example in dataset.iter() {
            let residual = state.w.dot(example.attributes())? - example.target();
            let mut g = WeightVector::new(example.attributes().to_vec())?;
            g.scale(2.0 * residual);
            let estimate = GradientEstimate {
                g,
                y_hat: state.w.dot(example.attributes())?,
            };
            aer_step_with_gradient(&mut state, &estimate, lambda, b)?;
        }
    }
    let mut model = Model::new(Algorithm::Aer, state.averaged(), 0, dataset.len());
    model.attributes_consumed = (dataset.len() * passes * d) as u64;
    model.set_param("b", b);
    model.set_param("lambda", lambda);
    Ok(model)
}
