//! Python bindings: datasets, the five learners, metrics, projection, and
//! the analytic constructions, mirroring the library's public surface.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use attreg::datasets as ds;
use attreg::evaluation as eval;
use attreg::evaluation::{Algorithm, LambdaChoice, TrainSpec};
use attreg::model::{LabeledExample, WeightVector};
use attreg::rng::RngStream;

fn to_py_err(e: attreg::Error) -> PyErr {
    match e {
        attreg::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A fixed-dimension dataset of bounded examples.
#[pyclass(frozen)]
struct Dataset {
    inner: attreg::Dataset,
}

#[pymethods]
impl Dataset {
    /// Build from rows of (attributes, target).
    #[new]
    fn new(rows: Vec<(Vec<f64>, f64)>) -> PyResult<Self> {
        let examples = rows
            .into_iter()
            .map(|(x, y)| LabeledExample::new(x, y))
            .collect::<attreg::Result<Vec<_>>>()
            .map_err(to_py_err)?;
        Ok(Dataset {
            inner: attreg::Dataset::new(examples).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        Ok(Dataset {
            inner: ds::read_csv(path).map_err(to_py_err)?,
        })
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        ds::write_csv(&self.inner, path).map_err(to_py_err)
    }

    /// Sample from the single-good-feature hard distribution.
    #[staticmethod]
    fn gen_lowerbound(d: usize, j: usize, p: f64, m: usize, seed: u64) -> PyResult<Self> {
        let spec = ds::LowerBoundSpec::new(d, j, p).map_err(to_py_err)?;
        let mut rng = RngStream::new(seed);
        Ok(Dataset {
            inner: ds::gen_lowerbound(&spec, m, &mut rng).map_err(to_py_err)?,
        })
    }

    /// Sample x uniform on [-1,1]^d with y = <w*, x> + uniform noise.
    #[staticmethod]
    #[pyo3(signature = (w_star, noise, m, seed, clip=false))]
    fn gen_linear(w_star: Vec<f64>, noise: f64, m: usize, seed: u64, clip: bool) -> PyResult<Self> {
        let w = WeightVector::new(w_star).map_err(to_py_err)?;
        let d = w.dim();
        let spec = ds::LinearTaskSpec::new(w, noise, clip).map_err(to_py_err)?;
        let mut rng = RngStream::new(seed);
        Ok(Dataset {
            inner: ds::gen_linear(&spec, d, m, &mut rng).map_err(to_py_err)?,
        })
    }

    /// Digit-pair regression task from MNIST IDX files.
    #[staticmethod]
    fn from_mnist_pair(
        images_path: &str,
        labels_path: &str,
        digit_a: u8,
        digit_b: u8,
    ) -> PyResult<Self> {
        let images = ds::load_idx_images(images_path).map_err(to_py_err)?;
        let labels = ds::load_idx_labels(labels_path).map_err(to_py_err)?;
        Ok(Dataset {
            inner: ds::make_pair_task(&images, &labels, digit_a, digit_b).map_err(to_py_err)?,
        })
    }

    /// Shuffle and split off a test fraction; returns (train, test).
    fn split(&self, test_fraction: f64, seed: u64) -> PyResult<(Dataset, Dataset)> {
        let mut rng = RngStream::new(seed);
        let (train, test) = ds::split(&self.inner, test_fraction, &mut rng).map_err(to_py_err)?;
        Ok((Dataset { inner: train }, Dataset { inner: test }))
    }

    /// The first n examples as a new dataset.
    fn prefix(&self, n: usize) -> Dataset {
        Dataset {
            inner: self.inner.prefix(n),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Row i as (attributes, target).
    fn row(&self, i: usize) -> PyResult<(Vec<f64>, f64)> {
        let ex = self
            .inner
            .examples()
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("row {i} out of range")))?;
        Ok((ex.attributes().to_vec(), ex.target()))
    }
}

/// Trained weights plus run metadata.
#[pyclass(frozen, name = "Model")]
struct Model {
    inner: eval::Model,
}

#[pymethods]
impl Model {
    #[getter]
    fn algo(&self) -> &'static str {
        self.inner.algorithm.name()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.as_slice().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn attributes_consumed(&self) -> u64 {
        self.inner.attributes_consumed
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn train_size(&self) -> usize {
        self.inner.train_size
    }

    #[getter]
    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        self.inner.hyperparameters.clone()
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.predict(&x).map_err(to_py_err)
    }

    fn squared_error(&self, dataset: &Dataset) -> PyResult<f64> {
        eval::test_squared_error(&self.inner, &dataset.inner).map_err(to_py_err)
    }

    fn classification_error(&self, dataset: &Dataset) -> PyResult<f64> {
        eval::test_classification_error(&self.inner, &dataset.inner).map_err(to_py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save_json(path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Model {
            inner: eval::Model::load_json(path).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(algo={}, d={}, attributes_consumed={})",
            self.inner.algorithm.name(),
            self.inner.dim(),
            self.inner.attributes_consumed
        )
    }
}

/// The stochastic partial-information learner. lambda_=None uses the
/// auto schedule computed from (b, b2, d, m, k).
#[pyfunction]
#[pyo3(signature = (dataset, k, b=1.0, lambda_=None, b2=None, seed=0))]
fn train_aer(
    dataset: &Dataset,
    k: usize,
    b: f64,
    lambda_: Option<f64>,
    b2: Option<f64>,
    seed: u64,
) -> PyResult<Model> {
    let spec = TrainSpec {
        lambda: lambda_.map(LambdaChoice::Fixed),
        b2,
        ..TrainSpec::new(Algorithm::Aer, k, b)
    };
    Ok(Model {
        inner: eval::train_model(&spec, &dataset.inner, seed).map_err(to_py_err)?,
    })
}

/// The loss-estimating partial-information learner.
#[pyfunction]
#[pyo3(signature = (dataset, k, b=1.0, seed=0))]
fn train_baseline(dataset: &Dataset, k: usize, b: f64, seed: u64) -> PyResult<Model> {
    let spec = TrainSpec::new(Algorithm::Baseline, k, b);
    Ok(Model {
        inner: eval::train_model(&spec, &dataset.inner, seed).map_err(to_py_err)?,
    })
}

/// The naive averaged-vector learner.
#[pyfunction]
#[pyo3(signature = (dataset, k, seed=0))]
fn train_naive(dataset: &Dataset, k: usize, seed: u64) -> PyResult<Model> {
    let spec = TrainSpec::new(Algorithm::Naive, k, 1.0);
    Ok(Model {
        inner: eval::train_model(&spec, &dataset.inner, seed).map_err(to_py_err)?,
    })
}

/// Full-information constrained least squares over the L1 ball.
#[pyfunction]
#[pyo3(signature = (dataset, b=1.0))]
fn train_lasso(dataset: &Dataset, b: f64) -> PyResult<Model> {
    let spec = TrainSpec::new(Algorithm::Lasso, 0, b);
    Ok(Model {
        inner: eval::train_model(&spec, &dataset.inner, 0).map_err(to_py_err)?,
    })
}

/// Full-information constrained least squares over the L2 ball.
#[pyfunction]
#[pyo3(signature = (dataset, b=1.0))]
fn train_ridge(dataset: &Dataset, b: f64) -> PyResult<Model> {
    let spec = TrainSpec::new(Algorithm::Ridge, 0, b);
    Ok(Model {
        inner: eval::train_model(&spec, &dataset.inner, 0).map_err(to_py_err)?,
    })
}

/// Euclidean projection onto the L1 ball; returns (projected, threshold).
#[pyfunction]
fn project_l1(w: Vec<f64>, b: f64) -> PyResult<(Vec<f64>, f64)> {
    let wv = WeightVector::new(w).map_err(to_py_err)?;
    let r = attreg::projection::project_l1(&wv, b).map_err(to_py_err)?;
    Ok((r.u.into_vec(), r.threshold))
}

/// The auto regularization schedule: ((b+1) d / b2) sqrt(ln(m)/(m k)).
#[pyfunction]
fn default_lambda(b: f64, b2: f64, d: usize, m: usize, k: usize) -> PyResult<f64> {
    attreg::aer::default_lambda(b, b2, d, m, k).map_err(to_py_err)
}

/// Closed-form risk of w on the single-good-feature distribution.
#[pyfunction]
fn risk_lowerbound(w: Vec<f64>, j: usize, p: f64) -> PyResult<f64> {
    let wv = WeightVector::new(w).map_err(to_py_err)?;
    let spec = ds::LowerBoundSpec::new(wv.dim(), j, p).map_err(to_py_err)?;
    ds::risk_lowerbound(&wv, &spec).map_err(to_py_err)
}

/// Risk floor of a predictor restricted to two attributes on the
/// realizable three-attribute sign task (equals 1/9).
#[pyfunction]
fn two_attribute_floor() -> f64 {
    ds::two_attribute_floor()
}

/// Risk floor for an arbitrary visible-attribute subset on the sign task
/// with target <w_star, x>.
#[pyfunction]
fn prediction_floor(w_star: Vec<f64>, visible: Vec<usize>) -> PyResult<f64> {
    let wv = WeightVector::new(w_star).map_err(to_py_err)?;
    ds::prediction_floor(&wv, &visible).map_err(to_py_err)
}

#[pymodule]
fn attreg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(train_aer, m)?)?;
    m.add_function(wrap_pyfunction!(train_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(train_naive, m)?)?;
    m.add_function(wrap_pyfunction!(train_lasso, m)?)?;
    m.add_function(wrap_pyfunction!(train_ridge, m)?)?;
    m.add_function(wrap_pyfunction!(project_l1, m)?)?;
    m.add_function(wrap_pyfunction!(default_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(risk_lowerbound, m)?)?;
    m.add_function(wrap_pyfunction!(two_attribute_floor, m)?)?;
    m.add_function(wrap_pyfunction!(prediction_floor, m)?)?;
    Ok(())
}
