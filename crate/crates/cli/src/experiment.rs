//! Experiment configs: one JSON file describes the dataset, splits,
//! algorithms, optional tuning grid, and prefix schedule needed to
//! regenerate a full learning-curve CSV.

use std::path::Path;

use serde::Deserialize;

use attreg::datasets::{read_csv, split};
use attreg::error::Error;
use attreg::evaluation::{
    cross_validate, learning_curve, Algorithm, CurvePoint, LambdaChoice, TrainSpec, TuningGrid,
};
use attreg::rng::RngStream;

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrKeyword {
    Num(f64),
    Word(String),
}

#[derive(Deserialize)]
struct GridSection {
    b: Vec<f64>,
    #[serde(default)]
    lambda: Vec<f64>,
    #[serde(default)]
    lambda_auto_multipliers: Vec<f64>,
    #[serde(default = "default_folds")]
    folds: usize,
}

fn default_folds() -> usize {
    10
}

#[derive(Deserialize)]
struct ParamsSection {
    #[serde(default = "default_b")]
    b: f64,
    #[serde(default)]
    lambda: Option<NumberOrKeyword>,
    #[serde(default)]
    b2: Option<NumberOrKeyword>,
}

fn default_b() -> f64 {
    1.0
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            b: 1.0,
            lambda: None,
            b2: None,
        }
    }
}

#[derive(Deserialize)]
struct ExperimentConfig {
    dataset: String,
    #[serde(default = "default_fraction")]
    test_fraction: f64,
    seeds: Vec<u64>,
    k: usize,
    algorithms: Vec<String>,
    #[serde(default)]
    prefixes: Vec<usize>,
    #[serde(default)]
    grid: Option<GridSection>,
    #[serde(default)]
    params: ParamsSection,
}

fn default_fraction() -> f64 {
    0.1
}

fn parse_err(msg: String) -> Error {
    Error::Parse(msg)
}

pub fn run_from_file(path: &Path) -> Result<Vec<CurvePoint>, Error> {
    let text = std::fs::read_to_string(path)?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| parse_err(format!("experiment config: {e}")))?;
    run(&config, path)
}

fn run(config: &ExperimentConfig, config_path: &Path) -> Result<Vec<CurvePoint>, Error> {
    if config.seeds.is_empty() {
        return Err(Error::InvalidArgument("experiment needs seeds".into()));
    }
    let algorithms: Vec<Algorithm> = config
        .algorithms
        .iter()
        .map(|s| Algorithm::from_name(s))
        .collect::<Result<_, _>>()?;
    if algorithms.is_empty() {
        return Err(Error::InvalidArgument("experiment needs algorithms".into()));
    }

    // dataset path is relative to the config file's directory
    let data_path = if Path::new(&config.dataset).is_absolute() {
        std::path::PathBuf::from(&config.dataset)
    } else {
        config_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&config.dataset)
    };
    let dataset = read_csv(&data_path)?;

    let mut points = Vec::new();
    for &seed in &config.seeds {
        let mut split_rng = RngStream::new(seed);
        let (train, test) = split(&dataset, config.test_fraction, &mut split_rng)?;
        for (algo_idx, &algo) in algorithms.iter().enumerate() {
            let spec = resolve_spec(config, algo, &train, seed, algo_idx as u64)?;
            let prefixes: Vec<usize> = if config.prefixes.is_empty() {
                vec![train.len()]
            } else {
                config
                    .prefixes
                    .iter()
                    .copied()
                    .filter(|&p| p <= train.len())
                    .collect()
            };
            if prefixes.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "no prefix fits the training size {}",
                    train.len()
                )));
            }
            points.extend(learning_curve(&train, &test, &spec, &prefixes, &[seed])?);
        }
    }
    Ok(points)
}

fn resolve_spec(
    config: &ExperimentConfig,
    algo: Algorithm,
    train: &attreg::model::Dataset,
    seed: u64,
    algo_idx: u64,
) -> Result<TrainSpec, Error> {
    let mut spec = TrainSpec::new(algo, config.k, config.params.b);
    if let Some(grid_section) = &config.grid {
        let mut lambda_choices: Vec<LambdaChoice> = grid_section
            .lambda
            .iter()
            .map(|&v| LambdaChoice::Fixed(v))
            .collect();
        lambda_choices.extend(
            grid_section
                .lambda_auto_multipliers
                .iter()
                .map(|&c| LambdaChoice::AutoTimes(c)),
        );
        let grid = TuningGrid {
            b_values: grid_section.b.clone(),
            lambda_choices,
            folds: grid_section.folds,
        };
        let mut cv_rng = RngStream::new(seed).child(algo_idx);
        let outcome = cross_validate(train, algo, &grid, config.k, &mut cv_rng)?;
        if let Some(b) = outcome.b {
            spec.b = b;
        }
        spec.lambda = outcome.lambda;
    } else {
        spec.lambda = match &config.params.lambda {
            None => None,
            Some(NumberOrKeyword::Num(v)) => Some(LambdaChoice::Fixed(*v)),
            Some(NumberOrKeyword::Word(w)) if w == "auto" => Some(LambdaChoice::AutoTimes(1.0)),
            Some(NumberOrKeyword::Word(w)) => {
                return Err(parse_err(format!(
                    "params.lambda: `{w}` is not a number or `auto`"
                )))
            }
        };
        spec.b2 = match &config.params.b2 {
            None => None,
            Some(NumberOrKeyword::Num(v)) => Some(*v),
            Some(NumberOrKeyword::Word(w)) if w == "dense" => {
                Some(spec.b / (train.dim() as f64).sqrt())
            }
            Some(NumberOrKeyword::Word(w)) => {
                return Err(parse_err(format!(
                    "params.b2: `{w}` is not a number or `dense`"
                )))
            }
        };
    }
    Ok(spec)
}
