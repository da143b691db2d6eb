//! Trained-model metadata, test metrics, cross-validation tuning, and
//! learning-curve generation with attribute accounting.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aer::{default_lambda, train_aer, AerConfig};
use crate::baseline::{train_baseline, train_naive};
use crate::error::{Error, Result};
use crate::full_info::{train_constrained, FullInfoConfig, NormConstraint};
use crate::model::{evaluate_loss, Dataset, WeightVector};
use crate::rng::RngStream;
use crate::solver::SolverConfig;

/// Which learner produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Baseline,
    Aer,
    Naive,
    Lasso,
    Ridge,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Baseline,
        Algorithm::Aer,
        Algorithm::Naive,
        Algorithm::Lasso,
        Algorithm::Ridge,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Baseline => "baseline",
            Algorithm::Aer => "aer",
            Algorithm::Naive => "naive",
            Algorithm::Lasso => "lasso",
            Algorithm::Ridge => "ridge",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }

    /// Partial-information learners observe k attributes per example;
    /// full-information learners observe all d.
    pub fn is_partial_information(&self) -> bool {
        matches!(
            self,
            Algorithm::Baseline | Algorithm::Aer | Algorithm::Naive
        )
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Trained weights plus run metadata.
#[derive(Debug, Clone)]
pub struct Model {
    pub algorithm: Algorithm,
    pub weights: WeightVector,
    pub hyperparameters: BTreeMap<String, f64>,
    pub attributes_consumed: u64,
    pub seed: u64,
    pub train_size: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    algo: Algorithm,
    d: usize,
    weights: Vec<f64>,
    hyperparameters: BTreeMap<String, f64>,
    attributes_consumed: u64,
    seed: u64,
    train_size: usize,
}

impl Model {
    pub fn new(algorithm: Algorithm, weights: WeightVector, seed: u64, train_size: usize) -> Self {
        Model {
            algorithm,
            weights,
            hyperparameters: BTreeMap::new(),
            attributes_consumed: 0,
            seed,
            train_size,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        self.hyperparameters.insert(name.to_string(), value);
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.hyperparameters.get(name).copied()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.weights.dot(x)
    }

    pub fn to_json(&self) -> String {
        let record = ModelRecord {
            algo: self.algorithm,
            d: self.weights.dim(),
            weights: self.weights.as_slice().to_vec(),
            hyperparameters: self.hyperparameters.clone(),
            attributes_consumed: self.attributes_consumed,
            seed: self.seed,
            train_size: self.train_size,
        };
        serde_json::to_string_pretty(&record).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: ModelRecord =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("model json: {e}")))?;
        if record.weights.len() != record.d {
            return Err(Error::DimensionMismatch {
                expected: record.d,
                got: record.weights.len(),
            });
        }
        Ok(Model {
            algorithm: record.algo,
            weights: WeightVector::new(record.weights)?,
            hyperparameters: record.hyperparameters,
            attributes_consumed: record.attributes_consumed,
            seed: record.seed,
            train_size: record.train_size,
        })
    }

    pub fn save_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load_json<P: AsRef<Path>>(path: P) -> Result<Self> {
        Model::from_json(&fs::read_to_string(path)?)
    }
}

/// Mean squared loss of a model over a dataset.
pub fn test_squared_error(model: &Model, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for ex in dataset.iter() {
        total += evaluate_loss(&model.weights, ex)?;
    }
    Ok(total / dataset.len() as f64)
}

/// Fraction of sign mismatches between the score and a {-1,+1} label.
/// A zero score always counts as an error.
pub fn test_classification_error(model: &Model, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.iter().any(|e| e.target().abs() != 1.0) {
        return Err(Error::NonBinaryLabels);
    }
    let mut errors = 0usize;
    for ex in dataset.iter() {
        let score = model.predict(ex.attributes())?;
        if score * ex.target() <= 0.0 {
            errors += 1;
        }
    }
    Ok(errors as f64 / dataset.len() as f64)
}

/// How the stochastic learner's regularization is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    /// Multiple of the auto schedule computed from (B, B2, d, m, k).
    AutoTimes(f64),
}

impl LambdaChoice {
    pub fn resolve(&self, b: f64, b2: Option<f64>, d: usize, m: usize, k: usize) -> Result<f64> {
        match *self {
            LambdaChoice::Fixed(v) => {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "lambda must be positive, got {v}"
                    )));
                }
                Ok(v)
            }
            LambdaChoice::AutoTimes(c) => Ok(c * default_lambda(b, b2.unwrap_or(b), d, m, k)?),
        }
    }
}

/// Everything needed to train one model on one dataset.
#[derive(Debug, Clone)]
pub struct TrainSpec {
    pub algo: Algorithm,
    /// Per-example attribute budget (partial-information learners only).
    pub k: usize,
    /// Norm-ball radius (ignored by the naive learner).
    pub b: f64,
    /// Stochastic learner only; None means the auto schedule.
    pub lambda: Option<LambdaChoice>,
    /// Denominator of the auto schedule; None means B.
    pub b2: Option<f64>,
    pub solver: SolverConfig,
}

impl TrainSpec {
    pub fn new(algo: Algorithm, k: usize, b: f64) -> Self {
        let solver = if algo.is_partial_information() {
            SolverConfig::default()
        } else {
            SolverConfig::tight()
        };
        TrainSpec {
            algo,
            k,
            b,
            lambda: None,
            b2: None,
            solver,
        }
    }
}

/// Dispatch to the right learner.
pub fn train_model(spec: &TrainSpec, dataset: &Dataset, seed: u64) -> Result<Model> {
    match spec.algo {
        Algorithm::Baseline => {
            let mut rng = RngStream::new(seed);
            train_baseline(dataset, spec.k, spec.b, &spec.solver, &mut rng)
        }
        Algorithm::Naive => {
            let mut rng = RngStream::new(seed);
            train_naive(dataset, spec.k, &mut rng)
        }
        Algorithm::Aer => {
            let lambda = spec
                .lambda
                .unwrap_or(LambdaChoice::AutoTimes(1.0))
                .resolve(spec.b, spec.b2, dataset.dim(), dataset.len(), spec.k)?;
            train_aer(
                dataset,
                &AerConfig {
                    k: spec.k,
                    lambda,
                    b: spec.b,
                    seed,
                },
            )
        }
        Algorithm::Lasso | Algorithm::Ridge => {
            let norm = if spec.algo == Algorithm::Lasso {
                NormConstraint::L1
            } else {
                NormConstraint::L2
            };
            train_constrained(
                dataset,
                &FullInfoConfig {
                    b: spec.b,
                    norm,
                    solver: spec.solver.clone(),
                },
            )
        }
    }
}

/// Hyperparameter grid for cross-validation.
#[derive(Debug, Clone)]
pub struct TuningGrid {
    pub b_values: Vec<f64>,
    /// Only consulted for the stochastic learner; empty means the auto
    /// default.
    pub lambda_choices: Vec<LambdaChoice>,
    pub folds: usize,
}

impl Default for TuningGrid {
    fn default() -> Self {
        TuningGrid {
            b_values: vec![0.1, 1.0, 10.0, 100.0],
            lambda_choices: vec![
                LambdaChoice::AutoTimes(0.1),
                LambdaChoice::AutoTimes(1.0),
                LambdaChoice::AutoTimes(10.0),
            ],
            folds: 10,
        }
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub b: Option<f64>,
    pub lambda: Option<LambdaChoice>,
    pub mean_error: f64,
}

/// Cross-validation outcome: argmin cell plus the full table.
#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub b: Option<f64>,
    pub lambda: Option<LambdaChoice>,
    pub cv_error: f64,
    pub cells: Vec<CellResult>,
}

fn lambda_sort_key(c: &LambdaChoice) -> (u8, f64) {
    match c {
        LambdaChoice::Fixed(v) => (0, *v),
        LambdaChoice::AutoTimes(v) => (1, *v),
    }
}

/// K-fold cross-validation over the grid: one seeded shuffle, contiguous
/// fold blocks, mean validation squared error per cell, argmin returned.
/// Cells are scanned with B ascending then lambda ascending, and only a
/// strict improvement switches the winner, so ties break toward smaller B
/// then smaller lambda.
pub fn cross_validate(
    dataset: &Dataset,
    algo: Algorithm,
    grid: &TuningGrid,
    k: usize,
    rng: &mut RngStream,
) -> Result<TuneOutcome> {
    if grid.folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {}",
            grid.folds
        )));
    }
    if dataset.len() < grid.folds {
        return Err(Error::TooFewExamples {
            m: dataset.len(),
            folds: grid.folds,
        });
    }

    // one seeded shuffle, then contiguous blocks
    let m = dataset.len();
    let mut order: Vec<usize> = (0..m).collect();
    for i in 0..m - 1 {
        let j = i + rng.uniform_index(m - i);
        order.swap(i, j);
    }
    let folds = grid.folds;
    let base = m / folds;
    let extra = m % folds;
    let mut blocks = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        blocks.push(&order[start..start + len]);
        start += len;
    }

    // grid cells in tie-break order
    let mut cells: Vec<(Option<f64>, Option<LambdaChoice>)> = Vec::new();
    if grid.b_values.is_empty() {
        return Err(Error::InvalidArgument("empty B grid".into()));
    }
    let mut bs = grid.b_values.clone();
    bs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    match algo {
        Algorithm::Naive => cells.push((None, None)),
        Algorithm::Aer => {
            let mut lambdas = if grid.lambda_choices.is_empty() {
                vec![LambdaChoice::AutoTimes(1.0)]
            } else {
                grid.lambda_choices.clone()
            };
            lambdas.sort_by(|a, b| lambda_sort_key(a).partial_cmp(&lambda_sort_key(b)).unwrap());
            for &b in &bs {
                for &l in &lambdas {
                    cells.push((Some(b), Some(l)));
                }
            }
        }
        _ => {
            for &b in &bs {
                cells.push((Some(b), None));
            }
        }
    }

    let fold_seeds: Vec<u64> = (0..folds).map(|f| rng.child(f as u64).seed()).collect();
    let examples = dataset.examples();
    let d = dataset.dim();

    // (cell, fold) jobs are independent; run them in parallel and reduce in
    // job order so the outcome does not depend on thread count
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..folds).map(move |f| (c, f)))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (b, lambda) = cells[c];
            let val: Vec<_> = blocks[f].iter().map(|&i| examples[i].clone()).collect();
            let train: Vec<_> = blocks
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, blk)| blk.iter().map(|&i| examples[i].clone()))
                .collect();
            let train = Dataset::with_dimension(d, train)?;
            let val = Dataset::with_dimension(d, val)?;
            let spec = TrainSpec {
                b: b.unwrap_or(1.0),
                lambda,
                ..TrainSpec::new(algo, k, 1.0)
            };
            let model = train_model(&spec, &train, fold_seeds[f])?;
            test_squared_error(&model, &val)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut results: Vec<CellResult> = cells
        .iter()
        .map(|&(b, lambda)| CellResult {
            b,
            lambda,
            mean_error: 0.0,
        })
        .collect();
    for (&(c, _), err) in jobs.iter().zip(&errors) {
        results[c].mean_error += err / folds as f64;
    }

    let mut best = 0;
    for (i, cell) in results.iter().enumerate() {
        if cell.mean_error < results[best].mean_error {
            best = i;
        }
    }
    Ok(TuneOutcome {
        b: results[best].b,
        lambda: results[best].lambda,
        cv_error: results[best].mean_error,
        cells: results,
    })
}

/// One point of a learning curve.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub algo: Algorithm,
    pub m_used: usize,
    pub attributes_used: u64,
    pub test_sq_error: f64,
    /// NaN when the test labels are not in {-1,+1}.
    pub test_cls_error: f64,
    pub seed: u64,
}

/// Retrain from scratch on each training prefix for each seed and measure
/// both errors on the fixed test set. Jobs are independent and run in
/// parallel; results come back in (prefix, seed) order.
pub fn learning_curve(
    train: &Dataset,
    test: &Dataset,
    spec: &TrainSpec,
    prefixes: &[usize],
    seeds: &[u64],
) -> Result<Vec<CurvePoint>> {
    if prefixes.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "learning_curve needs at least one prefix and one seed".into(),
        ));
    }
    for w in prefixes.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument(
                "prefix schedule must be strictly increasing".into(),
            ));
        }
    }
    if *prefixes.last().unwrap() > train.len() {
        return Err(Error::InvalidArgument(format!(
            "prefix {} exceeds training size {}",
            prefixes.last().unwrap(),
            train.len()
        )));
    }

    let jobs: Vec<(usize, u64)> = prefixes
        .iter()
        .flat_map(|&m| seeds.iter().map(move |&s| (m, s)))
        .collect();
    jobs.par_iter()
        .map(|&(m_used, seed)| {
            let model = train_model(spec, &train.prefix(m_used), seed)?;
            let sq = test_squared_error(&model, test)?;
            let cls = match test_classification_error(&model, test) {
                Ok(e) => e,
                Err(Error::NonBinaryLabels) => f64::NAN,
                Err(other) => return Err(other),
            };
            Ok(CurvePoint {
                algo: spec.algo,
                m_used,
                attributes_used: model.attributes_consumed,
                test_sq_error: sq,
                test_cls_error: cls,
                seed,
            })
        })
        .collect()
}

/// Curve CSV header: the exact downstream plotting contract.
pub const CURVE_CSV_HEADER: &str = "algo,m,attributes,sq_error,cls_error,seed";

/// Serialize curve points under the fixed header.
pub fn write_curve_csv<P: AsRef<Path>>(points: &[CurvePoint], path: P) -> Result<()> {
    let mut out = String::new();
    out.push_str(CURVE_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.algo, p.m_used, p.attributes_used, p.test_sq_error, p.test_cls_error, p.seed
        ));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_linear, LinearTaskSpec};
    use crate::model::LabeledExample;

    fn ds(rows: &[(&[f64], f64)]) -> Dataset {
        Dataset::new(
            rows.iter()
                .map(|(x, y)| LabeledExample::new(x.to_vec(), *y).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn model_with(w: &[f64]) -> Model {
        Model::new(
            Algorithm::Lasso,
            WeightVector::new(w.to_vec()).unwrap(),
            0,
            0,
        )
    }

    #[test]
    fn squared_error_cases() {
        let data = ds(&[(&[0.5], 1.0), (&[-1.0], 0.0)]);
        let m = model_with(&[1.0]);
        // ((0.5-1)^2 + (-1-0)^2)/2 = (0.25 + 1)/2
        assert!((test_squared_error(&m, &data).unwrap() - 0.625).abs() < 1e-15);

        let zero = model_with(&[0.0]);
        let pm = ds(&[(&[0.5], 1.0), (&[0.2], -1.0)]);
        assert_eq!(test_squared_error(&zero, &pm).unwrap(), 1.0);
    }

    #[test]
    fn classification_error_cases() {
        let data = ds(&[(&[0.5], 1.0), (&[-0.5], -1.0)]);
        let good = model_with(&[1.0]);
        assert_eq!(test_classification_error(&good, &data).unwrap(), 0.0);

        // zero scores always count as errors
        let zero = model_with(&[0.0]);
        assert_eq!(test_classification_error(&zero, &data).unwrap(), 1.0);

        let half = ds(&[(&[0.5], 1.0), (&[0.5], -1.0)]);
        assert_eq!(test_classification_error(&good, &half).unwrap(), 0.5);

        let nonbinary = ds(&[(&[0.5], 0.7)]);
        assert!(matches!(
            test_classification_error(&good, &nonbinary),
            Err(Error::NonBinaryLabels)
        ));
    }

    #[test]
    fn model_json_round_trip_is_bit_exact() {
        let mut m = model_with(&[0.1, -0.2, 1.0 / 3.0, 1e-17]);
        m.set_param("b", 1.0);
        m.set_param("k", 4.0);
        m.attributes_consumed = 123;
        m.seed = 9;
        m.train_size = 77;
        let back = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(back.weights.as_slice(), m.weights.as_slice());
        assert_eq!(back.hyperparameters, m.hyperparameters);
        assert_eq!(back.attributes_consumed, 123);
        assert_eq!(back.algorithm, Algorithm::Lasso);
    }

    #[test]
    fn model_json_validates_dimension() {
        let text = r#"{"algo":"aer","d":3,"weights":[0.1,0.2],"hyperparameters":{},"attributes_consumed":0,"seed":0,"train_size":0}"#;
        assert!(Model::from_json(text).is_err());
    }

    fn small_task(seed: u64, m: usize) -> Dataset {
        let w = WeightVector::new(vec![0.5]).unwrap();
        let spec = LinearTaskSpec::new(w, 0.1, false).unwrap();
        gen_linear(&spec, 1, m, &mut RngStream::new(seed)).unwrap()
    }

    #[test]
    fn cv_single_cell_and_determinism() {
        let data = small_task(1, 40);
        let grid = TuningGrid {
            b_values: vec![1.0],
            lambda_choices: vec![],
            folds: 4,
        };
        let mut rng = RngStream::new(5);
        let out = cross_validate(&data, Algorithm::Lasso, &grid, 2, &mut rng).unwrap();
        assert_eq!(out.b, Some(1.0));
        assert_eq!(out.cells.len(), 1);

        let mut rng2 = RngStream::new(5);
        let out2 = cross_validate(&data, Algorithm::Lasso, &grid, 2, &mut rng2).unwrap();
        assert_eq!(out.cv_error, out2.cv_error);
    }

    #[test]
    fn cv_picks_fitting_radius() {
        // |w*| = 0.5: B = 0.01 badly underfits, B = 1 fits
        let data = small_task(3, 60);
        let grid = TuningGrid {
            b_values: vec![0.01, 1.0],
            lambda_choices: vec![],
            folds: 5,
        };
        let mut rng = RngStream::new(8);
        let out = cross_validate(&data, Algorithm::Lasso, &grid, 2, &mut rng).unwrap();
        assert_eq!(out.b, Some(1.0));
    }

    #[test]
    fn cv_rejects_too_few_examples() {
        let data = small_task(1, 5);
        let grid = TuningGrid {
            b_values: vec![1.0],
            lambda_choices: vec![],
            folds: 10,
        };
        let mut rng = RngStream::new(0);
        assert!(matches!(
            cross_validate(&data, Algorithm::Ridge, &grid, 2, &mut rng),
            Err(Error::TooFewExamples { .. })
        ));
    }

    #[test]
    fn curve_accounting_and_order() {
        let train = small_task(2, 50);
        let test = small_task(99, 30);
        let spec = TrainSpec::new(Algorithm::Naive, 1, 1.0);
        let points = learning_curve(&train, &test, &spec, &[10, 50], &[4, 5]).unwrap();
        assert_eq!(points.len(), 4);
        assert_eq!(points[0].m_used, 10);
        assert_eq!(points[0].seed, 4);
        assert_eq!(points[1].seed, 5);
        assert_eq!(points[3].m_used, 50);
        // naive consumes exactly m * k
        assert_eq!(points[0].attributes_used, 10);
        assert_eq!(points[3].attributes_used, 50);
        // non-binary labels record NaN classification error
        assert!(points[0].test_cls_error.is_nan());
    }

    #[test]
    fn curve_rejects_bad_prefixes() {
        let train = small_task(2, 20);
        let test = small_task(3, 10);
        let spec = TrainSpec::new(Algorithm::Naive, 1, 1.0);
        assert!(learning_curve(&train, &test, &spec, &[10, 10], &[1]).is_err());
        assert!(learning_curve(&train, &test, &spec, &[30], &[1]).is_err());
    }

    #[test]
    fn curve_csv_contract() {
        let p = CurvePoint {
            algo: Algorithm::Aer,
            m_used: 100,
            attributes_used: 400,
            test_sq_error: 0.25,
            test_cls_error: f64::NAN,
            seed: 7,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        write_curve_csv(&[p], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "algo,m,attributes,sq_error,cls_error,seed"
        );
        assert_eq!(lines.next().unwrap(), "aer,100,400,0.25,NaN,7");
    }
}
