//! Full-information reference learners: empirical squared loss minimized
//! over an L1 ball (Lasso, constraint form) or an L2 ball (ridge,
//! constraint form). One solver serves both norms; only the projection
//! differs.

use crate::error::{Error, Result};
use crate::evaluation::{Algorithm, Model};
use crate::model::{Dataset, WeightVector};
use crate::projection::{project_l1, project_l2};
use crate::solver::{projected_gradient_descent, SolverConfig};

/// Which norm ball constrains the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormConstraint {
    L1,
    L2,
}

#[derive(Debug, Clone)]
pub struct FullInfoConfig {
    pub b: f64,
    pub norm: NormConstraint,
    pub solver: SolverConfig,
}

impl FullInfoConfig {
    pub fn new(b: f64, norm: NormConstraint) -> Self {
        FullInfoConfig {
            b,
            norm,
            solver: SolverConfig::tight(),
        }
    }
}

fn training_loss(dataset: &Dataset, w: &WeightVector) -> f64 {
    let m = dataset.len() as f64;
    dataset
        .iter()
        .map(|e| {
            let r = w.dot(e.attributes()).expect("dimension fixed") - e.target();
            r * r
        })
        .sum::<f64>()
        / m
}

fn training_gradient(dataset: &Dataset, w: &WeightVector) -> WeightVector {
    let m = dataset.len() as f64;
    let mut g = WeightVector::zeros(dataset.dim());
    for e in dataset.iter() {
        let r = w.dot(e.attributes()).expect("dimension fixed") - e.target();
        let gs = g.as_mut_slice();
        for (gi, xi) in gs.iter_mut().zip(e.attributes()) {
            *gi += 2.0 * r * xi / m;
        }
    }
    g
}

/// Minimize the empirical squared loss over the chosen norm ball. Sees every
/// attribute of every example, so a run consumes m * d attributes.
pub fn train_constrained(dataset: &Dataset, cfg: &FullInfoConfig) -> Result<Model> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.b.is_nan() || cfg.b <= 0.0 {
        return Err(Error::NonPositiveRadius(cfg.b));
    }
    let d = dataset.dim();
    let out = projected_gradient_descent(
        d,
        |w| training_loss(dataset, w),
        |w| training_gradient(dataset, w),
        |w| match cfg.norm {
            NormConstraint::L1 => project_l1(w, cfg.b).expect("radius checked").u,
            NormConstraint::L2 => project_l2(w, cfg.b).expect("radius checked"),
        },
        &cfg.solver,
    );
    let algo = match cfg.norm {
        NormConstraint::L1 => Algorithm::Lasso,
        NormConstraint::L2 => Algorithm::Ridge,
    };
    let mut model = Model::new(algo, out.best, 0, dataset.len());
    model.attributes_consumed = (dataset.len() * d) as u64;
    model.set_param("b", cfg.b);
    model.set_param("train_objective", out.best_value);
    model.set_param("solver_iterations", out.iterations as f64);
    Ok(model)
}
