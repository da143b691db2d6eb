//! Synthetic task generators with closed-form risks, the two-attribute
//! prediction-floor construction, train/test splitting, and the on-disk CSV
//! dataset format.

mod idx;

pub use idx::{
    load_idx_images, load_idx_labels, make_pair_task, write_idx_images, write_idx_labels,
    IdxImageSet,
};

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, LabeledExample, WeightVector};
use crate::rng::RngStream;

/// The hard single-good-feature distribution: every attribute is a uniform
/// sign, and the target agrees with attribute `j` with probability 1/2 + p.
#[derive(Debug, Clone, Copy)]
pub struct LowerBoundSpec {
    pub d: usize,
    /// Index of the good feature.
    pub j: usize,
    /// Correlation level in [0, 1/2).
    pub p: f64,
}

impl LowerBoundSpec {
    pub fn new(d: usize, j: usize, p: f64) -> Result<Self> {
        if d == 0 || j >= d {
            return Err(Error::InvalidSpec(format!(
                "good-feature index {j} out of range for d = {d}"
            )));
        }
        if !(0.0..0.5).contains(&p) {
            return Err(Error::InvalidSpec(format!(
                "correlation p = {p} outside [0, 1/2)"
            )));
        }
        Ok(LowerBoundSpec { d, j, p })
    }

    /// The risk-optimal predictor 2p e_j.
    pub fn optimal_weights(&self) -> WeightVector {
        let mut w = WeightVector::zeros(self.d);
        w.as_mut_slice()[self.j] = 2.0 * self.p;
        w
    }

    /// Risk of the optimal predictor: 1 - 4 p^2.
    pub fn optimal_risk(&self) -> f64 {
        1.0 - 4.0 * self.p * self.p
    }
}

/// Sample m examples from the single-good-feature distribution.
pub fn gen_lowerbound(spec: &LowerBoundSpec, m: usize, rng: &mut RngStream) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::InvalidSpec("m must be >= 1".into()));
    }
    let mut examples = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = (0..spec.d)
            .map(|_| if rng.uniform_index(2) == 0 { -1.0 } else { 1.0 })
            .collect();
        let agree = rng.next_f64() < 0.5 + spec.p;
        let y = if agree { x[spec.j] } else { -x[spec.j] };
        examples.push(LabeledExample::new(x, y)?);
    }
    Dataset::new(examples)
}

/// Closed-form risk of an arbitrary predictor under the single-good-feature
/// distribution: sum_{i != j} w_i^2 + w_j^2 + 1 - 4 p w_j.
pub fn risk_lowerbound(w: &WeightVector, spec: &LowerBoundSpec) -> Result<f64> {
    if w.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            got: w.dim(),
        });
    }
    let sq: f64 = w.as_slice().iter().map(|v| v * v).sum();
    Ok(sq + 1.0 - 4.0 * spec.p * w.as_slice()[spec.j])
}

/// Generic linear testbed: x uniform on [-1,1]^d, y = <w*, x> plus bounded
/// uniform noise.
#[derive(Debug, Clone)]
pub struct LinearTaskSpec {
    pub w_star: WeightVector,
    pub noise_halfwidth: f64,
    /// Clamp targets into [-1, 1] when ||w*||_1 + noise exceeds 1. Without
    /// it, such a spec is rejected.
    pub clip: bool,
}

impl LinearTaskSpec {
    pub fn new(w_star: WeightVector, noise_halfwidth: f64, clip: bool) -> Result<Self> {
        if noise_halfwidth.is_nan() || noise_halfwidth < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "noise halfwidth {noise_halfwidth} must be >= 0"
            )));
        }
        let spec = LinearTaskSpec {
            w_star,
            noise_halfwidth,
            clip,
        };
        if !spec.clip && spec.w_star.l1_norm() + spec.noise_halfwidth > 1.0 + 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "||w*||_1 + noise = {} can push y outside [-1, 1]; enable clipping or rescale",
                spec.w_star.l1_norm() + spec.noise_halfwidth
            )));
        }
        Ok(spec)
    }
}

/// Sample m examples from the linear testbed.
pub fn gen_linear(
    spec: &LinearTaskSpec,
    d: usize,
    m: usize,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if spec.w_star.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: spec.w_star.dim(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidSpec("m must be >= 1".into()));
    }
    let h = spec.noise_halfwidth;
    let mut examples = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = (0..d).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let mut y = spec.w_star.dot(&x)?;
        if h > 0.0 {
            y += rng.uniform_in(-h, h);
        }
        if spec.clip {
            y = y.clamp(-1.0, 1.0);
        }
        examples.push(LabeledExample::new(x, y)?);
    }
    Dataset::new(examples)
}

/// Exact risk floor of any predictor that sees only the attributes in
/// `visible` (plus an intercept) at prediction time, under the distribution
/// x uniform on {-1,+1}^d with deterministic target y = <w*, x>.
///
/// Brute force: enumerate all 2^d sign patterns, solve the least-squares
/// problem for the visible attributes, and return the minimal mean squared
/// error.
pub fn prediction_floor(w_star: &WeightVector, visible: &[usize]) -> Result<f64> {
    let d = w_star.dim();
    if d > 20 {
        return Err(Error::InvalidArgument(
            "floor enumeration supports d <= 20".into(),
        ));
    }
    for &i in visible {
        if i >= d {
            return Err(Error::IndexOutOfBounds { index: i, d });
        }
    }
    let n = visible.len() + 1; // visible attributes plus intercept
    let patterns = 1usize << d;

    // normal equations over the uniform distribution on sign patterns
    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut features = vec![0.0; n];
    for bits in 0..patterns {
        let x: Vec<f64> = (0..d)
            .map(|i| if bits >> i & 1 == 0 { -1.0 } else { 1.0 })
            .collect();
        let y = w_star.dot(&x)?;
        for (slot, &i) in features.iter_mut().zip(visible) {
            *slot = x[i];
        }
        features[n - 1] = 1.0;
        for r in 0..n {
            for c in 0..n {
                gram[r * n + c] += features[r] * features[c];
            }
            rhs[r] += features[r] * y;
        }
    }
    let scale = 1.0 / patterns as f64;
    for v in gram.iter_mut() {
        *v *= scale;
    }
    for v in rhs.iter_mut() {
        *v *= scale;
    }

    let beta = solve_dense(&mut gram, &mut rhs, n)?;
    // evaluate the residual risk directly over all patterns
    let mut risk = 0.0;
    for bits in 0..patterns {
        let x: Vec<f64> = (0..d)
            .map(|i| if bits >> i & 1 == 0 { -1.0 } else { 1.0 })
            .collect();
        let y = w_star.dot(&x)?;
        let mut pred = beta[n - 1];
        for (b, &i) in beta.iter().zip(visible) {
            pred += b * x[i];
        }
        risk += (pred - y) * (pred - y);
    }
    Ok(risk / patterns as f64)
}

/// The fixed floor instance: w* = (1/3, 1/3, 1/3), y = <w*, x> exactly
/// realizable with all three attributes, yet any predictor restricted to two
/// attributes at prediction time has risk at least 1/9.
pub fn two_attribute_floor() -> f64 {
    let w_star = WeightVector::new(vec![1.0 / 3.0; 3]).expect("finite");
    prediction_floor(&w_star, &[0, 1]).expect("fixed instance is valid")
}

/// Gaussian elimination with partial pivoting on a dense n x n system.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .abs()
                    .partial_cmp(&a[s * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row * n + col].abs() < 1e-12 {
            return Err(Error::InvalidArgument(
                "singular system in floor computation".into(),
            ));
        }
        if pivot_row != col {
            for c in 0..n {
                a.swap(col * n + c, pivot_row * n + c);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[row * n + c] -= factor * a[col * n + c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in (row + 1)..n {
            acc -= a[row * n + c] * x[c];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Shuffle the dataset with the given stream and split off `test_fraction`
/// of it (rounded to the nearest count) as the test set.
pub fn split(
    dataset: &Dataset,
    test_fraction: f64,
    rng: &mut RngStream,
) -> Result<(Dataset, Dataset)> {
    if test_fraction.is_nan() || test_fraction <= 0.0 || test_fraction >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let m = dataset.len();
    let mut order: Vec<usize> = (0..m).collect();
    for i in 0..m.saturating_sub(1) {
        let j = i + rng.uniform_index(m - i);
        order.swap(i, j);
    }
    let test_count = ((m as f64) * test_fraction).round() as usize;
    let test_count = test_count.min(m);
    let examples = dataset.examples();
    let test: Vec<LabeledExample> = order[..test_count]
        .iter()
        .map(|&i| examples[i].clone())
        .collect();
    let train: Vec<LabeledExample> = order[test_count..]
        .iter()
        .map(|&i| examples[i].clone())
        .collect();
    Ok((
        Dataset::with_dimension(dataset.dim(), train)?,
        Dataset::with_dimension(dataset.dim(), test)?,
    ))
}

/// Write a dataset as CSV with header `y,x0,...,x{d-1}`, one example per
/// row, shortest round-tripping decimal per value.
pub fn write_csv<P: AsRef<Path>>(dataset: &Dataset, path: P) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    write!(out, "y")?;
    for i in 0..dataset.dim() {
        write!(out, ",x{i}")?;
    }
    writeln!(out)?;
    for ex in dataset.iter() {
        write!(out, "{}", ex.target())?;
        for v in ex.attributes() {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Read a dataset written by [`write_csv`].
pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?;
    if headers.is_empty() || &headers[0] != "y" {
        return Err(Error::Parse("first csv column must be `y`".into()));
    }
    let d = headers.len() - 1;
    if d == 0 {
        return Err(Error::Parse("csv has no attribute columns".into()));
    }
    let mut examples = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("csv row {}: {e}", row_idx + 2)))?;
        if record.len() != d + 1 {
            return Err(Error::Parse(format!(
                "csv row {}: expected {} fields, got {}",
                row_idx + 2,
                d + 1,
                record.len()
            )));
        }
        let mut fields = record.iter().map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("csv row {}: `{s}`: {e}", row_idx + 2)))
        });
        let y = fields.next().unwrap()?;
        let x = fields.collect::<Result<Vec<f64>>>()?;
        examples.push(LabeledExample::new(x, y)?);
    }
    Dataset::with_dimension(d, examples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate_loss;

    #[test]
    fn lowerbound_spec_validation() {
        assert!(LowerBoundSpec::new(4, 4, 0.1).is_err());
        assert!(LowerBoundSpec::new(4, 0, 0.5).is_err());
        assert!(LowerBoundSpec::new(4, 0, -0.1).is_err());
        assert!(LowerBoundSpec::new(4, 3, 0.0).is_ok());
    }

    #[test]
    fn lowerbound_high_correlation_limit() {
        let spec = LowerBoundSpec::new(6, 2, 0.499).unwrap();
        let mut rng = RngStream::new(10);
        let data = gen_lowerbound(&spec, 50_000, &mut rng).unwrap();
        let agree = data
            .iter()
            .filter(|e| e.target() == e.attributes()[2])
            .count();
        let f = agree as f64 / data.len() as f64;
        assert!((f - 0.999).abs() < 0.002, "agreement {f}");
    }

    #[test]
    fn lowerbound_zero_correlation_and_symmetry() {
        let spec = LowerBoundSpec::new(4, 1, 0.0).unwrap();
        let mut rng = RngStream::new(3);
        let data = gen_lowerbound(&spec, 100_000, &mut rng).unwrap();
        let m = data.len() as f64;
        let corr: f64 = data
            .iter()
            .map(|e| e.target() * e.attributes()[1])
            .sum::<f64>()
            / m;
        assert!(corr.abs() < 0.01, "corr {corr}");
        for i in 0..4 {
            let mean: f64 = data.iter().map(|e| e.attributes()[i]).sum::<f64>() / m;
            assert!(mean.abs() < 0.01, "mean of x{i} = {mean}");
            assert!(data.iter().all(|e| e.attributes()[i].abs() == 1.0));
        }
    }

    #[test]
    fn closed_form_risk_values() {
        let spec = LowerBoundSpec::new(5, 2, 0.25).unwrap();
        // optimal predictor
        let opt = spec.optimal_weights();
        let r = risk_lowerbound(&opt, &spec).unwrap();
        assert!((r - spec.optimal_risk()).abs() < 1e-15);
        assert!((r - (1.0 - 4.0 * 0.0625)).abs() < 1e-15);
        // zero predictor
        let r0 = risk_lowerbound(&WeightVector::zeros(5), &spec).unwrap();
        assert_eq!(r0, 1.0);
        // unit vector on the good feature: 1 + 1 - 4*0.25 = 1
        let mut e2 = WeightVector::zeros(5);
        e2.as_mut_slice()[2] = 1.0;
        assert!((risk_lowerbound(&e2, &spec).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_task_requires_bounded_targets() {
        let w = WeightVector::new(vec![0.8, 0.4]).unwrap();
        assert!(LinearTaskSpec::new(w.clone(), 0.0, false).is_err());
        assert!(LinearTaskSpec::new(w, 0.0, true).is_ok());
        let ok = WeightVector::new(vec![0.5, 0.3]).unwrap();
        assert!(LinearTaskSpec::new(ok, 0.2, false).is_ok());
    }

    #[test]
    fn linear_noiseless_realizable() {
        let w = WeightVector::new(vec![1.0 / 3.0; 3]).unwrap();
        let spec = LinearTaskSpec::new(w.clone(), 0.0, false).unwrap();
        let mut rng = RngStream::new(6);
        let data = gen_linear(&spec, 3, 500, &mut rng).unwrap();
        for e in data.iter() {
            assert!(evaluate_loss(&w, e).unwrap() < 1e-28);
        }
    }

    #[test]
    fn linear_noise_variance() {
        let w = WeightVector::new(vec![0.3, 0.2]).unwrap();
        let h = 0.3;
        let spec = LinearTaskSpec::new(w.clone(), h, false).unwrap();
        let mut rng = RngStream::new(8);
        let data = gen_linear(&spec, 2, 100_000, &mut rng).unwrap();
        let mean_loss: f64 = data
            .iter()
            .map(|e| evaluate_loss(&w, e).unwrap())
            .sum::<f64>()
            / data.len() as f64;
        assert!((mean_loss - h * h / 3.0).abs() < 0.005, "{mean_loss}");
    }

    #[test]
    fn floor_values() {
        let f2 = two_attribute_floor();
        assert!((f2 - 1.0 / 9.0).abs() < 1e-12, "{f2}");

        let w_star = WeightVector::new(vec![1.0 / 3.0; 3]).unwrap();
        let f3 = prediction_floor(&w_star, &[0, 1, 2]).unwrap();
        assert!(f3.abs() < 1e-12, "{f3}");

        for i in 0..3 {
            let f1 = prediction_floor(&w_star, &[i]).unwrap();
            assert!((f1 - 2.0 / 9.0).abs() < 1e-12, "{f1}");
        }
    }

    #[test]
    fn split_sizes_and_partition() {
        let mut rng = RngStream::new(40);
        let w = WeightVector::new(vec![0.5]).unwrap();
        let spec = LinearTaskSpec::new(w, 0.2, false).unwrap();
        let data = gen_linear(&spec, 1, 100, &mut rng).unwrap();
        let (train, test) = split(&data, 0.1, &mut rng).unwrap();
        assert_eq!(train.len(), 90);
        assert_eq!(test.len(), 10);
        // disjoint union: multiset of targets matches
        let mut all: Vec<f64> = train
            .iter()
            .chain(test.iter())
            .map(|e| e.target())
            .collect();
        let mut orig: Vec<f64> = data.iter().map(|e| e.target()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        orig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(all, orig);
        // same seed, same split
        let mut r1 = RngStream::new(9);
        let mut r2 = RngStream::new(9);
        let (tr1, _) = split(&data, 0.25, &mut r1).unwrap();
        let (tr2, _) = split(&data, 0.25, &mut r2).unwrap();
        assert_eq!(
            tr1.iter().map(|e| e.target()).collect::<Vec<_>>(),
            tr2.iter().map(|e| e.target()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let mut rng = RngStream::new(15);
        let w = WeightVector::new(vec![0.4, -0.3, 0.1]).unwrap();
        let spec = LinearTaskSpec::new(w, 0.15, false).unwrap();
        let data = gen_linear(&spec, 3, 50, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_csv(&data, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.len(), 50);
        for (a, b) in data.iter().zip(back.iter()) {
            assert_eq!(a, b, "round trip must be bit-exact");
        }
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "z,x0\n0.5,0.1\n").unwrap();
        assert!(read_csv(&path).is_err());
        std::fs::write(&path, "y,x0\n0.5\n").unwrap();
        assert!(read_csv(&path).is_err());
        std::fs::write(&path, "y,x0\nabc,0.1\n").unwrap();
        assert!(read_csv(&path).is_err());
        std::fs::write(&path, "y,x0\n7.0,0.1\n").unwrap();
        assert!(read_csv(&path).is_err(), "out-of-range target");
    }
}
