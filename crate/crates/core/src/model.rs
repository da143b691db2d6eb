//! Core domain types: bounded examples, datasets, the attribute-budget
//! oracle, and dense weight vectors.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Slack applied when validating the [-1, 1] bounds, so that values computed
/// from exact endpoints survive floating-point round trips.
pub const BOUND_SLACK: f64 = 1e-12;

/// One training example: attributes in [-1,1]^d and a target in [-1,1].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    x: Vec<f64>,
    y: f64,
}

impl LabeledExample {
    /// Validates bounds at construction; out-of-range data is rejected,
    /// never clipped.
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::OutOfRange("example dimension must be >= 1".into()));
        }
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() || v.abs() > 1.0 + BOUND_SLACK {
                return Err(Error::OutOfRange(format!(
                    "attribute x{i} = {v} outside [-1, 1]"
                )));
            }
        }
        if !y.is_finite() || y.abs() > 1.0 + BOUND_SLACK {
            return Err(Error::OutOfRange(format!("target y = {y} outside [-1, 1]")));
        }
        Ok(LabeledExample { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn attributes(&self) -> &[f64] {
        &self.x
    }

    pub fn target(&self) -> f64 {
        self.y
    }
}

/// An ordered sequence of examples sharing one dimension.
///
/// Order is significant: streaming learners consume examples in sequence.
#[derive(Debug, Clone)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
    d: usize,
}

impl Dataset {
    /// Build from a nonempty example list; the dimension is taken from the
    /// first example and enforced on the rest.
    pub fn new(examples: Vec<LabeledExample>) -> Result<Self> {
        let first = examples.first().ok_or(Error::EmptyDataset)?;
        let d = first.dim();
        Self::with_dimension(d, examples)
    }

    /// Build with an explicit dimension; permits an empty example list.
    pub fn with_dimension(d: usize, examples: Vec<LabeledExample>) -> Result<Self> {
        if d == 0 {
            return Err(Error::OutOfRange("dimension must be >= 1".into()));
        }
        for ex in &examples {
            if ex.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: ex.dim(),
                });
            }
        }
        Ok(Dataset { examples, d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    /// The first `n` examples as a new dataset (capped at the full length).
    pub fn prefix(&self, n: usize) -> Dataset {
        let n = n.min(self.examples.len());
        Dataset {
            examples: self.examples[..n].to_vec(),
            d: self.d,
        }
    }
}

/// The only gateway to an example's attributes during partial-information
/// training. Every reveal consumes one unit of the budget, including repeat
/// reveals of the same index; the target is always free to read.
#[derive(Debug)]
pub struct AttributeOracle<'a> {
    example: &'a LabeledExample,
    budget: usize,
    revealed: usize,
    cache: HashMap<usize, f64>,
}

impl<'a> AttributeOracle<'a> {
    pub fn new(example: &'a LabeledExample, budget: usize) -> Self {
        AttributeOracle {
            example,
            budget,
            revealed: 0,
            cache: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.example.dim()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn revealed_count(&self) -> usize {
        self.revealed
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.revealed
    }

    /// Reveal attribute `i`, spending one budget unit.
    pub fn reveal(&mut self, i: usize) -> Result<f64> {
        if i >= self.example.dim() {
            return Err(Error::IndexOutOfBounds {
                index: i,
                d: self.example.dim(),
            });
        }
        if self.revealed >= self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
            });
        }
        self.revealed += 1;
        let v = self.example.attributes()[i];
        self.cache.insert(i, v);
        Ok(v)
    }

    /// The target; reading it never consumes budget.
    pub fn target(&self) -> f64 {
        self.example.target()
    }
}

/// Dense real vector of length d: the hypothesis and all estimator outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates that every component is finite.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = w.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "weight w{i} = {v} is not finite"
            )));
        }
        Ok(WeightVector(w))
    }

    pub fn zeros(d: usize) -> Self {
        WeightVector(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Number of nonzero components.
    pub fn l0_norm(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }

    /// Inner product with a raw attribute slice.
    pub fn dot(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                got: x.len(),
            });
        }
        Ok(self.0.iter().zip(x).map(|(w, x)| w * x).sum())
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: f64, other: &WeightVector) {
        debug_assert_eq!(self.0.len(), other.0.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.0 {
            *a *= alpha;
        }
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Squared loss of predictor `w` on one example: (<w, x> - y)^2.
pub fn evaluate_loss(w: &WeightVector, ex: &LabeledExample) -> Result<f64> {
    let p = w.dot(ex.attributes())?;
    let r = p - ex.target();
    Ok(r * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(x: &[f64], y: f64) -> LabeledExample {
        LabeledExample::new(x.to_vec(), y).unwrap()
    }

    #[test]
    fn example_rejects_out_of_range() {
        assert!(LabeledExample::new(vec![0.5, 1.5], 0.0).is_err());
        assert!(LabeledExample::new(vec![0.5], 2.0).is_err());
        assert!(LabeledExample::new(vec![f64::NAN], 0.0).is_err());
        assert!(LabeledExample::new(vec![], 0.0).is_err());
        // exact endpoints are fine
        assert!(LabeledExample::new(vec![1.0, -1.0], 1.0).is_ok());
    }

    #[test]
    fn dataset_enforces_shared_dimension() {
        let a = ex(&[0.1, 0.2], 0.0);
        let b = ex(&[0.3], 0.0);
        assert!(Dataset::new(vec![a.clone(), b]).is_err());
        assert!(Dataset::new(vec![]).is_err());
        assert_eq!(Dataset::new(vec![a]).unwrap().dim(), 2);
    }

    #[test]
    fn oracle_budget_exhaustion() {
        let e = ex(&[0.5, -1.0, 0.0], 0.7);
        let mut o = AttributeOracle::new(&e, 2);
        assert_eq!(o.reveal(0).unwrap(), 0.5);
        assert_eq!(o.reveal(2).unwrap(), 0.0);
        assert!(matches!(o.reveal(1), Err(Error::BudgetExceeded { .. })));
        assert_eq!(o.revealed_count(), 2);
    }

    #[test]
    fn oracle_zero_budget() {
        let e = ex(&[0.5], 0.0);
        let mut o = AttributeOracle::new(&e, 0);
        assert!(matches!(o.reveal(0), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn oracle_direct_read_and_bounds() {
        let e = ex(&[0.5, -1.0, 0.0], 0.7);
        let mut o = AttributeOracle::new(&e, 3);
        assert_eq!(o.reveal(1).unwrap(), -1.0);
        assert!(matches!(o.reveal(9), Err(Error::IndexOutOfBounds { .. })));
    }

    #[test]
    fn oracle_repeat_reveal_consumes_budget() {
        let e = ex(&[0.4, 0.2], 0.0);
        let mut o = AttributeOracle::new(&e, 2);
        assert_eq!(o.reveal(0).unwrap(), 0.4);
        assert_eq!(o.reveal(0).unwrap(), 0.4);
        assert_eq!(o.revealed_count(), 2);
        assert!(o.reveal(0).is_err());
    }

    #[test]
    fn target_free_even_after_exhaustion() {
        let e = ex(&[0.5], 0.7);
        let mut o = AttributeOracle::new(&e, 1);
        assert_eq!(o.target(), 0.7);
        o.reveal(0).unwrap();
        assert!(o.reveal(0).is_err());
        assert_eq!(o.target(), 0.7);
        let e2 = ex(&[0.5], -1.0);
        let o2 = AttributeOracle::new(&e2, 0);
        assert_eq!(o2.target(), -1.0);
    }

    #[test]
    fn loss_values() {
        let w0 = WeightVector::zeros(2);
        let e = ex(&[0.3, 0.4], 1.0);
        assert_eq!(evaluate_loss(&w0, &e).unwrap(), 1.0);

        // exact fit
        let w = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let e2 = ex(&[0.25, -0.25], 0.0);
        assert_eq!(evaluate_loss(&w, &e2).unwrap(), 0.0);

        // direct arithmetic
        let w3 = WeightVector::new(vec![1.0 / 3.0; 3]).unwrap();
        let e3 = ex(&[1.0, 1.0, 1.0], 1.0);
        assert!(evaluate_loss(&w3, &e3).unwrap().abs() < 1e-30);
    }

    #[test]
    fn loss_dimension_mismatch() {
        let w = WeightVector::zeros(3);
        let e = ex(&[0.1], 0.0);
        assert!(matches!(
            evaluate_loss(&w, &e),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn loss_joint_permutation_invariance() {
        let w = WeightVector::new(vec![0.2, -0.5, 0.9]).unwrap();
        let e = ex(&[0.3, 0.8, -0.1], 0.4);
        let l1 = evaluate_loss(&w, &e).unwrap();
        let w2 = WeightVector::new(vec![0.9, 0.2, -0.5]).unwrap();
        let e2 = ex(&[-0.1, 0.3, 0.8], 0.4);
        let l2 = evaluate_loss(&w2, &e2).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
    }

    #[test]
    fn weight_norms() {
        let w = WeightVector::new(vec![3.0, -4.0, 0.0]).unwrap();
        assert_eq!(w.l1_norm(), 7.0);
        assert_eq!(w.l2_norm(), 5.0);
        assert_eq!(w.l0_norm(), 2);
        assert!(WeightVector::new(vec![f64::INFINITY]).is_err());
    }
}
