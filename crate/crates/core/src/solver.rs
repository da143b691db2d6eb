//! Projected gradient descent with backtracking line search, shared by the
//! surrogate minimizer and the full-information learners. The two callers
//! differ only in objective, gradient, and projection.

use crate::model::WeightVector;

/// Backtracking projected-gradient configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    /// Stop once an accepted step improves the objective by less than this.
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            tolerance: 1e-9,
        }
    }
}

impl SolverConfig {
    /// Tight stopping tolerance for well-conditioned problems where the
    /// solution itself (not just the objective) must be resolved finely.
    /// Linear convergence makes the extra iterations cheap.
    pub fn tight() -> Self {
        SolverConfig {
            tolerance: 1e-13,
            ..SolverConfig::default()
        }
    }
}

pub(crate) struct SolveOutcome {
    pub best: WeightVector,
    pub best_value: f64,
    pub iterations: usize,
}

const MAX_BACKTRACKS: usize = 60;

/// Minimize `objective` over the feasible set defined by `project`, starting
/// from 0. Returns the best iterate seen, so the reported value never
/// increases even if the objective is nonconvex (a noisy surrogate can be
/// indefinite).
pub(crate) fn projected_gradient_descent<F, G, P>(
    d: usize,
    objective: F,
    gradient: G,
    project: P,
    cfg: &SolverConfig,
) -> SolveOutcome
where
    F: Fn(&WeightVector) -> f64,
    G: Fn(&WeightVector) -> WeightVector,
    P: Fn(&WeightVector) -> WeightVector,
{
    let mut w = project(&WeightVector::zeros(d));
    let mut value = objective(&w);
    let mut best = w.clone();
    let mut best_value = value;

    for iter in 0..cfg.max_iters {
        let grad = gradient(&w);
        let mut step = cfg.initial_step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = w.clone();
            trial.axpy(-step, &grad);
            let trial = project(&trial);
            let trial_value = objective(&trial);
            let moved: f64 = trial
                .as_slice()
                .iter()
                .zip(w.as_slice())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if moved == 0.0 {
                // projected step made no progress at any smaller step either
                break;
            }
            if trial_value <= value - cfg.sufficient_decrease / step * moved {
                accepted = Some((trial, trial_value));
                break;
            }
            step *= cfg.shrink;
        }
        let Some((next, next_value)) = accepted else {
            return SolveOutcome {
                best,
                best_value,
                iterations: iter,
            };
        };
        let improvement = value - next_value;
        w = next;
        value = next_value;
        if value < best_value {
            best = w.clone();
            best_value = value;
        }
        if improvement.abs() < cfg.tolerance {
            return SolveOutcome {
                best,
                best_value,
                iterations: iter + 1,
            };
        }
    }
    SolveOutcome {
        best,
        best_value,
        iterations: cfg.max_iters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::project_l1;

    #[test]
    fn quadratic_bowl_reaches_minimum() {
        // f(w) = (w0 - 0.3)^2 + (w1 + 0.2)^2, B = 10 (inactive constraint)
        let out = projected_gradient_descent(
            2,
            |w| (w[0] - 0.3).powi(2) + (w[1] + 0.2).powi(2),
            |w| WeightVector::new(vec![2.0 * (w[0] - 0.3), 2.0 * (w[1] + 0.2)]).unwrap(),
            |w| project_l1(w, 10.0).unwrap().u,
            &SolverConfig::default(),
        );
        assert!((out.best[0] - 0.3).abs() < 1e-6);
        assert!((out.best[1] + 0.2).abs() < 1e-6);
        assert!(out.best_value < 1e-10);
    }

    #[test]
    fn zero_gradient_stops_immediately() {
        let out = projected_gradient_descent(
            3,
            |w| w.as_slice().iter().map(|v| v * v).sum(),
            |w| {
                let mut g = w.clone();
                g.scale(2.0);
                g
            },
            |w| w.clone(),
            &SolverConfig::default(),
        );
        assert_eq!(out.best.as_slice(), &[0.0, 0.0, 0.0]);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn active_constraint_lands_on_boundary() {
        // minimize (w - 3)^2 over ||w||_1 <= 1 -> w = 1
        let out = projected_gradient_descent(
            1,
            |w| (w[0] - 3.0).powi(2),
            |w| WeightVector::new(vec![2.0 * (w[0] - 3.0)]).unwrap(),
            |w| project_l1(w, 1.0).unwrap().u,
            &SolverConfig::default(),
        );
        assert!((out.best[0] - 1.0).abs() < 1e-9);
    }
}
