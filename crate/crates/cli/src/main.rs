//! Command-line surface for the partial-information regression toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/runtime error.

mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use attreg::datasets::{
    gen_linear, gen_lowerbound, load_idx_images, load_idx_labels, make_pair_task, prediction_floor,
    read_csv, two_attribute_floor, write_csv, LinearTaskSpec, LowerBoundSpec,
};
use attreg::evaluation::{
    cross_validate, test_classification_error, test_squared_error, Algorithm, LambdaChoice, Model,
    TrainSpec, TuningGrid,
};
use attreg::model::WeightVector;
use attreg::rng::RngStream;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(attreg::Error),
}

impl From<attreg::Error> for CliError {
    fn from(e: attreg::Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "attreg",
    about = "Linear regression from partially observed attributes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV
    GenSynth(GenSynthArgs),
    /// Build a digit-pair regression task from MNIST IDX files
    ImportMnist(ImportMnistArgs),
    /// Train one model and write it as JSON
    Train(TrainArgs),
    /// Evaluate a model file on a dataset
    Eval(EvalArgs),
    /// Cross-validate hyperparameters over a grid file
    Tune(TuneArgs),
    /// Run a full experiment config and write learning-curve CSV
    Experiment(ExperimentArgs),
    /// Print the two-attribute test-time risk floor
    DemoFloor,
}

#[derive(Args)]
struct GenSynthArgs {
    /// lowerbound | linear
    #[arg(long)]
    dist: String,
    /// Dimension
    #[arg(long)]
    d: usize,
    /// Good-feature index (lowerbound)
    #[arg(long)]
    j: Option<usize>,
    /// Label correlation in [0, 1/2) (lowerbound)
    #[arg(long)]
    p: Option<f64>,
    /// Target weights: comma-separated values, or `dense:<l1norm>` (linear)
    #[arg(long)]
    wstar: Option<String>,
    /// Uniform label-noise halfwidth (linear)
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Clamp out-of-range targets into [-1,1] (linear)
    #[arg(long, default_value_t = false)]
    clip: bool,
    /// Number of examples
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportMnistArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Digit mapped to target -1
    #[arg(long)]
    digit_a: u8,
    /// Digit mapped to target +1
    #[arg(long)]
    digit_b: u8,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// baseline | aer | naive | lasso | ridge
    #[arg(long)]
    algo: String,
    #[arg(long)]
    data: PathBuf,
    /// Per-example attribute budget (partial-information learners)
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Norm-ball radius
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Number or `auto` (stochastic learner only)
    #[arg(long)]
    lambda: Option<String>,
    /// Number or `dense` (= B/sqrt(d)); denominator of the auto lambda
    #[arg(long)]
    b2: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Write metrics as JSON here as well
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    algo: String,
    #[arg(long)]
    data: PathBuf,
    /// Grid JSON: {"b": [...], "lambda": [...], "lambda_auto_multipliers": [...]}
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the chosen cell as JSON here as well
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for independent evaluation jobs
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_algo(s: &str) -> CliResult<Algorithm> {
    Algorithm::from_name(s).map_err(|_| {
        CliError::Usage(format!(
            "unknown algorithm `{s}` (expected baseline|aer|naive|lasso|ridge)"
        ))
    })
}

fn parse_lambda(s: &str) -> CliResult<LambdaChoice> {
    if s == "auto" {
        return Ok(LambdaChoice::AutoTimes(1.0));
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(LambdaChoice::Fixed(v)),
        _ => usage(format!(
            "--lambda must be a positive number or `auto`, got `{s}`"
        )),
    }
}

fn parse_b2(s: &str, b: f64, d: usize) -> CliResult<f64> {
    if s == "dense" {
        return Ok(b / (d as f64).sqrt());
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(v),
        _ => usage(format!(
            "--b2 must be a positive number or `dense`, got `{s}`"
        )),
    }
}

fn parse_wstar(s: &str, d: usize) -> CliResult<WeightVector> {
    if let Some(norm) = s.strip_prefix("dense:") {
        let Ok(l1) = norm.parse::<f64>() else {
            return usage(format!("bad dense weight norm `{norm}`"));
        };
        return Ok(WeightVector::new(vec![l1 / d as f64; d])?);
    }
    let values: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == d => Ok(WeightVector::new(v)?),
        Ok(v) => usage(format!("--wstar has {} values but --d is {d}", v.len())),
        Err(e) => usage(format!("bad --wstar: {e}")),
    }
}

fn cmd_gen_synth(args: GenSynthArgs) -> CliResult<()> {
    let mut rng = RngStream::new(args.seed);
    let dataset = match args.dist.as_str() {
        "lowerbound" => {
            let (Some(j), Some(p)) = (args.j, args.p) else {
                return usage("--dist lowerbound requires --j and --p");
            };
            let spec = LowerBoundSpec::new(args.d, j, p)?;
            gen_lowerbound(&spec, args.m, &mut rng)?
        }
        "linear" => {
            let Some(wstar) = &args.wstar else {
                return usage("--dist linear requires --wstar");
            };
            let w = parse_wstar(wstar, args.d)?;
            let spec = LinearTaskSpec::new(w, args.noise, args.clip)?;
            gen_linear(&spec, args.d, args.m, &mut rng)?
        }
        other => return usage(format!("unknown distribution `{other}`")),
    };
    write_csv(&dataset, &args.out)?;
    println!(
        "wrote {} examples of dimension {} to {}",
        dataset.len(),
        dataset.dim(),
        args.out.display()
    );
    Ok(())
}

fn cmd_import_mnist(args: ImportMnistArgs) -> CliResult<()> {
    let images = load_idx_images(&args.images)?;
    let labels = load_idx_labels(&args.labels)?;
    let task = make_pair_task(&images, &labels, args.digit_a, args.digit_b)?;
    write_csv(&task, &args.out)?;
    println!(
        "wrote {} examples ({} vs {}) of dimension {} to {}",
        task.len(),
        args.digit_a,
        args.digit_b,
        task.dim(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let algo = parse_algo(&args.algo)?;
    let data = read_csv(&args.data)?;
    let mut spec = TrainSpec::new(algo, args.k, args.b);
    if let Some(l) = &args.lambda {
        spec.lambda = Some(parse_lambda(l)?);
    }
    if let Some(b2) = &args.b2 {
        spec.b2 = Some(parse_b2(b2, args.b, data.dim())?);
    }
    let model = attreg::evaluation::train_model(&spec, &data, args.seed)?;
    model.save_json(&args.model_out)?;
    println!(
        "trained {} on {} examples (d={}): ||w||_1 = {:.6}, attributes consumed = {}, model -> {}",
        algo,
        data.len(),
        data.dim(),
        model.weights.l1_norm(),
        model.attributes_consumed,
        args.model_out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let model = Model::load_json(&args.model)?;
    let data = read_csv(&args.data)?;
    let sq = test_squared_error(&model, &data)?;
    let cls = match test_classification_error(&model, &data) {
        Ok(e) => Some(e),
        Err(attreg::Error::NonBinaryLabels) => None,
        Err(e) => return Err(e.into()),
    };
    println!("squared error: {sq}");
    match cls {
        Some(c) => println!("classification error: {c}"),
        None => println!("classification error: n/a (labels not in {{-1,+1}})"),
    }
    if let Some(path) = &args.metrics {
        let json = serde_json::json!({
            "sq_error": sq,
            "cls_error": cls,
            "m": data.len(),
            "d": data.dim(),
        });
        std::fs::write(path, serde_json::to_string_pretty(&json).unwrap())
            .map_err(attreg::Error::from)?;
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct GridFile {
    b: Vec<f64>,
    #[serde(default)]
    lambda: Vec<f64>,
    #[serde(default)]
    lambda_auto_multipliers: Vec<f64>,
}

fn load_grid(path: &PathBuf, folds: usize) -> CliResult<TuningGrid> {
    let text = std::fs::read_to_string(path).map_err(attreg::Error::from)?;
    let file: GridFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(attreg::Error::Parse(format!("grid json: {e}"))))?;
    let mut lambda_choices: Vec<LambdaChoice> = file
        .lambda
        .iter()
        .map(|&v| LambdaChoice::Fixed(v))
        .collect();
    lambda_choices.extend(
        file.lambda_auto_multipliers
            .iter()
            .map(|&c| LambdaChoice::AutoTimes(c)),
    );
    Ok(TuningGrid {
        b_values: file.b,
        lambda_choices,
        folds,
    })
}

fn lambda_choice_json(choice: &Option<LambdaChoice>) -> serde_json::Value {
    match choice {
        None => serde_json::Value::Null,
        Some(LambdaChoice::Fixed(v)) => serde_json::json!({ "fixed": v }),
        Some(LambdaChoice::AutoTimes(c)) => serde_json::json!({ "auto_times": c }),
    }
}

fn describe_cell(b: &Option<f64>, lambda: &Option<LambdaChoice>) -> String {
    let b_part = match b {
        Some(v) => format!("b={v}"),
        None => "b=-".into(),
    };
    let l_part = match lambda {
        Some(LambdaChoice::Fixed(v)) => format!(" lambda={v}"),
        Some(LambdaChoice::AutoTimes(c)) => format!(" lambda=auto*{c}"),
        None => String::new(),
    };
    format!("{b_part}{l_part}")
}

fn cmd_tune(args: TuneArgs) -> CliResult<()> {
    let algo = parse_algo(&args.algo)?;
    let data = read_csv(&args.data)?;
    let grid = load_grid(&args.grid, args.folds)?;
    let mut rng = RngStream::new(args.seed);
    let outcome = cross_validate(&data, algo, &grid, args.k, &mut rng)?;
    for cell in &outcome.cells {
        println!(
            "cell {}: cv error {:.6}",
            describe_cell(&cell.b, &cell.lambda),
            cell.mean_error
        );
    }
    println!(
        "best: {} cv error {:.6}",
        describe_cell(&outcome.b, &outcome.lambda),
        outcome.cv_error
    );
    if let Some(path) = &args.out {
        let json = serde_json::json!({
            "algo": algo.name(),
            "b": outcome.b,
            "lambda": lambda_choice_json(&outcome.lambda),
            "cv_error": outcome.cv_error,
        });
        std::fs::write(path, serde_json::to_string_pretty(&json).unwrap())
            .map_err(attreg::Error::from)?;
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult<()> {
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return usage("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let points = experiment::run_from_file(&args.config)?;
    attreg::evaluation::write_curve_csv(&points, &args.out)?;
    println!(
        "wrote {} curve points to {}",
        points.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_demo_floor() -> CliResult<()> {
    let floor = two_attribute_floor();
    let w_star = WeightVector::new(vec![1.0 / 3.0; 3])?;
    let full = prediction_floor(&w_star, &[0, 1, 2])?;
    println!("two-attribute prediction floor: {floor} (= 1/9)");
    println!("all-attribute prediction floor: {full}");
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenSynth(args) => cmd_gen_synth(args),
        Command::ImportMnist(args) => cmd_import_mnist(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::DemoFloor => cmd_demo_floor(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, not usage errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
