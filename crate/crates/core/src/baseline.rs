//! The loss-estimating batch learner: accumulate an unbiased quadratic
//! surrogate of the training loss from randomly revealed attribute pairs,
//! then minimize it over the L1 ball. Also the naive averaged-vector
//! learner, which assumes an identity correlation matrix.

use crate::error::{Error, Result};
use crate::estimators::{pair_contributions, GramEstimate};
use crate::evaluation::{Algorithm, Model};
use crate::model::{AttributeOracle, Dataset, WeightVector};
use crate::projection::project_l1;
use crate::rng::RngStream;
use crate::sampling::sample_pair_set;
use crate::solver::{projected_gradient_descent, SolverConfig};

/// Accumulated quadratic surrogate of the training loss:
/// a Gram estimate, a linear term, and the mean squared target.
#[derive(Debug, Clone)]
pub struct SurrogateLoss {
    a_bar: GramEstimate,
    v_bar: WeightVector,
    y_bar: f64,
    m: usize,
}

impl SurrogateLoss {
    pub fn new(d: usize, m: usize) -> Self {
        SurrogateLoss {
            a_bar: GramEstimate::zeros(d),
            v_bar: WeightVector::zeros(d),
            y_bar: 0.0,
            m,
        }
    }

    pub fn dim(&self) -> usize {
        self.v_bar.dim()
    }

    pub fn example_count(&self) -> usize {
        self.m
    }

    pub fn gram(&self) -> &GramEstimate {
        &self.a_bar
    }

    pub fn linear_term(&self) -> &WeightVector {
        &self.v_bar
    }

    pub fn constant_term(&self) -> f64 {
        self.y_bar
    }

    fn add_instance_part(&mut self, y: f64, v: &WeightVector) {
        let scale = 2.0 * y / self.m as f64;
        self.v_bar.axpy(scale, v);
        self.y_bar += y * y / self.m as f64;
    }

    /// Fold one example's dense Gram/instance estimate into the averages:
    /// A_bar += A/m, v_bar += 2 y v / m, y_bar += y^2 / m.
    pub fn add_example_parts(&mut self, gram: &GramEstimate, v: &WeightVector, y: f64) {
        self.a_bar.scaled_add(1.0 / self.m as f64, gram);
        self.add_instance_part(y, v);
    }

    /// Surrogate value at w.
    ///
    /// The accumulation stores v_bar = mean of 2 y v, so unbiasedness for the
    /// expanded loss w^T (x x^T) w - 2 y x^T w + y^2 requires the linear term
    /// to enter with a minus sign: w^T A_bar w - w^T v_bar + y_bar.
    pub fn value(&self, w: &WeightVector) -> Result<f64> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.dim(),
            });
        }
        Ok(self.a_bar.quad_form(w)? - w.dot(self.v_bar.as_slice())? + self.y_bar)
    }

    /// Surrogate gradient at w: 2 A_bar w - v_bar.
    pub fn gradient(&self, w: &WeightVector) -> Result<WeightVector> {
        let mut g = self.a_bar.mul_vec(w)?;
        g.scale(2.0);
        g.axpy(-1.0, &self.v_bar);
        Ok(g)
    }
}

/// One pass over the dataset: per example, draw a pair set of size k/2,
/// reveal both ends of every pair (k budget units), and fold the estimates
/// into the surrogate. Consumes exactly m * k attributes in total.
pub fn accumulate_baseline(
    dataset: &Dataset,
    k: usize,
    rng: &mut RngStream,
) -> Result<SurrogateLoss> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::OddBudget(k));
    }
    let d = dataset.dim();
    if k / 2 > d * d {
        return Err(Error::InvalidSize {
            size: k / 2,
            n: d * d,
        });
    }
    let m = dataset.len();
    let mut surrogate = SurrogateLoss::new(d, m);
    let inv_m = 1.0 / m as f64;
    for example in dataset.iter() {
        let mut oracle = AttributeOracle::new(example, k);
        let pairs = sample_pair_set(d, k / 2, rng)?;
        let (contribs, v) = pair_contributions(&mut oracle, &pairs)?;
        // sparse fold: only the touched cells of the per-example matrix
        for (i, j, c) in contribs {
            surrogate.a_bar.add_symmetric(i, j, c * inv_m);
        }
        surrogate.add_instance_part(oracle.target(), &v);
        debug_assert!(oracle.revealed_count() <= k);
        debug_assert_eq!(oracle.revealed_count(), k);
    }
    Ok(surrogate)
}

/// Minimize the surrogate over { w : ||w||_1 <= B } by projected gradient
/// descent from 0 with backtracking. The Gram estimate can be indefinite, so
/// this is a local method; the best iterate seen is returned.
pub fn minimize_surrogate(
    surrogate: &SurrogateLoss,
    b: f64,
    cfg: &SolverConfig,
) -> Result<WeightVector> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::NonPositiveRadius(b));
    }
    let out = projected_gradient_descent(
        surrogate.dim(),
        |w| surrogate.value(w).expect("dimension fixed"),
        |w| surrogate.gradient(w).expect("dimension fixed"),
        |w| project_l1(w, b).expect("radius checked").u,
        cfg,
    );
    Ok(out.best)
}

/// The full loss-estimating learner: accumulate, then minimize.
pub fn train_baseline(
    dataset: &Dataset,
    k: usize,
    b: f64,
    cfg: &SolverConfig,
    rng: &mut RngStream,
) -> Result<Model> {
    let surrogate = accumulate_baseline(dataset, k, rng)?;
    let weights = minimize_surrogate(&surrogate, b, cfg)?;
    let mut model = Model::new(Algorithm::Baseline, weights, rng.seed(), dataset.len());
    model.attributes_consumed = (dataset.len() * k) as u64;
    model.set_param("k", k as f64);
    model.set_param("b", b);
    Ok(model)
}

/// The naive averaged-vector learner: w = (1/m) sum of y_t v_t, where v_t is
/// the sparse instance estimate with budget k. Exact averaged vector when
/// k = d.
pub fn train_naive(dataset: &Dataset, k: usize, rng: &mut RngStream) -> Result<Model> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = dataset.dim();
    if k == 0 || k > d {
        return Err(Error::InvalidSize { size: k, n: d });
    }
    let m = dataset.len();
    let mut w = WeightVector::zeros(d);
    let mut attributes = 0u64;
    for example in dataset.iter() {
        let mut oracle = AttributeOracle::new(example, k);
        let v = crate::estimators::estimate_instance(&mut oracle, k, rng)?;
        w.axpy(oracle.target() / m as f64, &v);
        debug_assert!(oracle.revealed_count() <= k);
        attributes += oracle.revealed_count() as u64;
    }
    let mut model = Model::new(Algorithm::Naive, w, rng.seed(), m);
    model.attributes_consumed = attributes;
    model.set_param("k", k as f64);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabeledExample;

    fn ds(rows: &[(&[f64], f64)]) -> Dataset {
        Dataset::new(
            rows.iter()
                .map(|(x, y)| LabeledExample::new(x.to_vec(), *y).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_example_d1_arithmetic() {
        // m=1, d=1, k=2, x=(0.8), y=1 -> A=(0.64), v=(1.6), ybar=1
        let data = ds(&[(&[0.8], 1.0)]);
        let mut rng = RngStream::new(0);
        let s = accumulate_baseline(&data, 2, &mut rng).unwrap();
        assert!((s.gram().get(0, 0) - 0.64).abs() < 1e-15);
        assert!((s.linear_term()[0] - 1.6).abs() < 1e-15);
        assert!((s.constant_term() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_targets_zero_linear_part() {
        let data = ds(&[(&[0.5, -0.5], 0.0), (&[0.2, 0.8], 0.0)]);
        let mut rng = RngStream::new(7);
        let s = accumulate_baseline(&data, 2, &mut rng).unwrap();
        assert_eq!(s.linear_term().as_slice(), &[0.0, 0.0]);
        assert_eq!(s.constant_term(), 0.0);
    }

    #[test]
    fn surrogate_at_zero_is_constant_term() {
        let data = ds(&[(&[0.5, -0.5], 1.0), (&[0.2, 0.8], -0.5)]);
        let mut rng = RngStream::new(7);
        let s = accumulate_baseline(&data, 2, &mut rng).unwrap();
        let w0 = WeightVector::zeros(2);
        assert_eq!(s.value(&w0).unwrap(), s.constant_term());
    }

    #[test]
    fn surrogate_exact_when_d1_full_budget() {
        // d=1, k=2: the single attribute is revealed twice, estimators exact,
        // so the surrogate equals the training loss for all w
        let data = ds(&[(&[0.8], 1.0), (&[-0.4], 0.5), (&[0.1], -1.0)]);
        let mut rng = RngStream::new(3);
        let s = accumulate_baseline(&data, 2, &mut rng).unwrap();
        for wval in [-1.5, -0.2, 0.0, 0.4, 2.0] {
            let w = WeightVector::new(vec![wval]).unwrap();
            let ls: f64 = data
                .iter()
                .map(|e| {
                    let r = wval * e.attributes()[0] - e.target();
                    r * r
                })
                .sum::<f64>()
                / data.len() as f64;
            assert!((s.value(&w).unwrap() - ls).abs() < 1e-12);
        }
    }

    #[test]
    fn minimize_identity_gram_zero_linear() {
        let mut s = SurrogateLoss::new(2, 1);
        let mut eye = GramEstimate::zeros(2);
        eye.add_symmetric(0, 0, 0.5);
        eye.add_symmetric(1, 1, 0.5);
        s.add_example_parts(&eye, &WeightVector::zeros(2), 0.0);
        let w = minimize_surrogate(&s, 5.0, &SolverConfig::default()).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn minimize_scalar_quadratic() {
        // surrogate = w^2 - w + c, minimum at w = 0.5
        let mut s = SurrogateLoss::new(1, 1);
        let mut a = GramEstimate::zeros(1);
        a.add_symmetric(0, 0, 0.5); // diagonal add is doubled
        let v = WeightVector::new(vec![0.5]).unwrap();
        s.add_example_parts(&a, &v, 1.0); // v_bar = 2*1*0.5 = 1
        let w = minimize_surrogate(&s, 10.0, &SolverConfig::default()).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-6, "w = {}", w[0]);
    }

    #[test]
    fn surrogate_dimension_mismatch() {
        let s = SurrogateLoss::new(2, 1);
        assert!(s.value(&WeightVector::zeros(3)).is_err());
    }

    #[test]
    fn baseline_requires_even_budget_and_data() {
        let data = ds(&[(&[0.5], 0.0)]);
        let mut rng = RngStream::new(0);
        assert!(matches!(
            accumulate_baseline(&data, 3, &mut rng),
            Err(Error::OddBudget(3))
        ));
        let empty = Dataset::with_dimension(1, vec![]).unwrap();
        assert!(matches!(
            accumulate_baseline(&empty, 2, &mut rng),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn baseline_budget_accounting_and_determinism() {
        let data = ds(&[
            (&[0.5, -0.5, 0.1], 1.0),
            (&[0.2, 0.8, -0.3], -0.5),
            (&[-0.9, 0.0, 0.4], 0.25),
        ]);
        let mut r1 = RngStream::new(42);
        let m1 = train_baseline(&data, 4, 1.0, &SolverConfig::default(), &mut r1).unwrap();
        let mut r2 = RngStream::new(42);
        let m2 = train_baseline(&data, 4, 1.0, &SolverConfig::default(), &mut r2).unwrap();
        assert_eq!(m1.weights.as_slice(), m2.weights.as_slice());
        assert_eq!(m1.attributes_consumed, 12);
        assert!(m1.weights.l1_norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn naive_zero_targets() {
        let data = ds(&[(&[0.5, -0.5], 0.0), (&[0.2, 0.8], 0.0)]);
        let mut rng = RngStream::new(1);
        let m = train_naive(&data, 1, &mut rng).unwrap();
        assert_eq!(m.weights.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn naive_full_budget_is_exact_average() {
        let data = ds(&[(&[0.5, -0.5], 1.0), (&[0.2, 0.8], -0.5)]);
        let mut rng = RngStream::new(1);
        let m = train_naive(&data, 2, &mut rng).unwrap();
        let expect = [
            (1.0 * 0.5 + (-0.5) * 0.2) / 2.0,
            (1.0 * -0.5 + (-0.5) * 0.8) / 2.0,
        ];
        assert!((m.weights[0] - expect[0]).abs() < 1e-15);
        assert!((m.weights[1] - expect[1]).abs() < 1e-15);
        assert_eq!(m.attributes_consumed, 4);
    }
}
