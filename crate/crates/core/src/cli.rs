//! Command-line front end and experiment orchestration.
//!
//! An experiment is a grid of cells `(method, labeled count, unlabeled count,
//! alpha, repeat)`. Every cell derives its split, mask, subset, tuning and
//! training seeds from `(base seed, purpose, repeat)` only, so cells that
//! differ in method or alpha within one repeat see identical data and
//! initial weights. Cells run independently and the CSV is assembled in grid
//! order afterwards, so output does not depend on `--jobs`.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::data::{self, Dataset, SplitSpec, ADULT_FEATURES, ADULT_SAMPLES};
use crate::error::{Error, Result};
use crate::losses::{AlphaMode, FairnessKind};
use crate::metrics::{self, MetricsRecord};
use crate::nn::ModelParams;
use crate::seed::derive_seed;
use crate::train::{self, Seeds, TrainConfig, TrainHistory, BETA_GRID};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const DEFAULT_REPEATS: usize = 5;

/// Trade-off grid: one point per decade from 1e-7 to 1, plus the
/// unlabeled-sweep values and extra points near 1.
pub const DEFAULT_ALPHA_GRID: [f64; 13] = [
    1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 2.5e-3, 5e-3, 1e-2, 1e-1, 0.5, 0.9, 0.99, 1.0,
];
pub const DEFAULT_SWEEP_UNLABELED_ALPHAS: [f64; 3] = [0.001, 0.0025, 0.005];
pub const DEFAULT_LABELED_COUNTS: [usize; 3] = [100, 200, 300];

/// How many unlabeled training samples a cell keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnlabeledCount {
    Count(usize),
    All,
}

impl UnlabeledCount {
    fn limit(self) -> Option<usize> {
        match self {
            UnlabeledCount::Count(n) => Some(n),
            UnlabeledCount::All => None,
        }
    }
}

impl FromStr for UnlabeledCount {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            Ok(UnlabeledCount::All)
        } else {
            s.parse()
                .map(UnlabeledCount::Count)
                .map_err(|_| format!("expected a count or \"all\", got {s:?}"))
        }
    }
}

impl fmt::Display for UnlabeledCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnlabeledCount::Count(n) => write!(f, "{n}"),
            UnlabeledCount::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Single,
    SweepAlpha,
    SweepUnlabeled,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Single => "single",
            ExperimentKind::SweepAlpha => "sweep-alpha",
            ExperimentKind::SweepUnlabeled => "sweep-unlabeled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Labeled plus pseudo-labeled unlabeled data.
    SsFair,
    /// Same model and objective with unlabeled samples discarded.
    SupervisedOnly,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::SsFair => "ssfair",
            Method::SupervisedOnly => "supervised",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BetaChoice {
    Fixed(f64),
    Tuned(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub methods: Vec<Method>,
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<UnlabeledCount>,
    pub alphas: Vec<f64>,
    pub repeats: usize,
    pub base_seed: u64,
    pub beta: BetaChoice,
    pub train_fraction: f64,
    /// Hyperparameters shared by every cell; alpha, beta, seeds and
    /// `supervised_only` are overridden per cell.
    pub template: TrainConfig,
    pub jobs: usize,
}

impl ExperimentSpec {
    /// Checks every cell for feasibility before any training starts.
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        let cfg = |m: &str| Err(Error::Config(m.to_string()));
        if self.repeats == 0 {
            return cfg("repeats must be at least 1");
        }
        if self.methods.is_empty() || self.labeled.is_empty() || self.unlabeled.is_empty() || self.alphas.is_empty() {
            return cfg("experiment grid has an empty axis");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return cfg("train fraction must lie in (0, 1]");
        }
        if let BetaChoice::Tuned(grid) = &self.beta {
            if grid.is_empty() {
                return cfg("beta grid is empty");
            }
        }
        for &alpha in &self.alphas {
            TrainConfig {
                alpha,
                beta: 0.0,
                ..self.template
            }
            .validate()?;
        }
        if let BetaChoice::Fixed(beta) = self.beta {
            TrainConfig { beta, ..self.template }.validate()?;
        }
        let n_train = (self.train_fraction * dataset.len() as f64).floor() as usize;
        for &l in &self.labeled {
            if l > n_train {
                return Err(Error::Config(format!(
                    "{l} labeled samples requested but the training split has {n_train}"
                )));
            }
            if matches!(self.beta, BetaChoice::Tuned(_)) && l < train::MIN_LABELED_FOR_TUNING {
                return Err(Error::Config(format!(
                    "beta tuning needs at least {} labeled samples, got {l}",
                    train::MIN_LABELED_FOR_TUNING
                )));
            }
            for u in &self.unlabeled {
                if let UnlabeledCount::Count(n) = u {
                    if l + n > n_train {
                        return Err(Error::Config(format!(
                            "{l} labeled + {n} unlabeled exceeds the training split of {n_train}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Cells in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &method in &self.methods {
            for &n_labeled in &self.labeled {
                let unlabeled: &[UnlabeledCount] = match method {
                    Method::SsFair => &self.unlabeled,
                    Method::SupervisedOnly => &[UnlabeledCount::Count(0)],
                };
                for &unlabeled in unlabeled {
                    for &alpha in &self.alphas {
                        for repeat in 0..self.repeats {
                            cells.push(Cell {
                                method,
                                n_labeled,
                                unlabeled,
                                alpha,
                                repeat,
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub n_labeled: usize,
    pub unlabeled: UnlabeledCount,
    pub alpha: f64,
    pub repeat: usize,
}

/// Everything produced by one training run.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub cell: Cell,
    pub seed: u64,
    pub n_unlabeled: usize,
    pub beta: f64,
    pub metrics: MetricsRecord,
    pub params: ModelParams,
    pub history: TrainHistory,
    pub seconds: f64,
}

/// Seed identifying repeat `repeat` of an experiment.
pub fn repeat_seed(base: u64, repeat: usize) -> u64 {
    derive_seed(base, "repeat", repeat as u64)
}

/// Train and test splits shared by every cell of one repeat.
pub fn prepare_split(
    dataset: &Dataset,
    train_fraction: f64,
    n_labeled: usize,
    repeat_seed: u64,
) -> Result<(Dataset, Dataset)> {
    SplitSpec {
        train_fraction,
        n_labeled,
        seed: derive_seed(repeat_seed, "split", 0),
    }
    .apply(dataset)
}

pub fn run_cell(spec: &ExperimentSpec, dataset: &Dataset, cell: Cell) -> Result<CellOutcome> {
    let start = Instant::now();
    let seed = repeat_seed(spec.base_seed, cell.repeat);
    let (train_split, test) = prepare_split(dataset, spec.train_fraction, cell.n_labeled, seed)?;
    let train_set = match cell.method {
        Method::SsFair => data::keep_unlabeled(&train_split, cell.unlabeled.limit(), derive_seed(seed, "unlabeled", 0))?,
        Method::SupervisedOnly => train_split.drop_unlabeled(),
    };
    let mut config = TrainConfig {
        alpha: cell.alpha,
        seeds: Seeds::from_base(derive_seed(seed, "train", 0)),
        supervised_only: cell.method == Method::SupervisedOnly,
        ..spec.template
    };
    config.beta = match &spec.beta {
        BetaChoice::Fixed(b) => *b,
        BetaChoice::Tuned(grid) => train::tune_beta(&config, &train_set, grid, derive_seed(seed, "tune", 0))?.beta,
    };
    let (params, history) = train::train(&config, &train_set)?;
    let metrics = metrics::evaluate(&params, &test)?;
    Ok(CellOutcome {
        cell,
        seed,
        n_unlabeled: train_set.len() - train_set.n_labeled(),
        beta: config.beta,
        metrics,
        params,
        history,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub method: Method,
    pub fairness: FairnessKind,
    pub alpha: f64,
    pub alpha_mode: AlphaMode,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    /// `None` for the mean row.
    pub repeat: Option<usize>,
    pub seed: u64,
    pub beta: f64,
    pub accuracy: f64,
    pub fairness_value: f64,
    pub fairness_dp: f64,
    pub fairness_opp: f64,
    pub fairness_odd: f64,
    pub seconds: f64,
}

pub const RESULTS_HEADER: &str = "experiment,method,fairness,alpha,alpha_mode,n_labeled,n_unlabeled,repeat,seed,beta,accuracy,fairness_value,fairness_dp,fairness_opp,fairness_odd";

impl ResultRow {
    fn from_outcome(spec: &ExperimentSpec, o: &CellOutcome) -> Self {
        let m = &o.metrics;
        ResultRow {
            experiment: spec.kind,
            method: o.cell.method,
            fairness: spec.template.fairness,
            alpha: o.cell.alpha,
            alpha_mode: spec.template.alpha_mode,
            n_labeled: o.cell.n_labeled,
            n_unlabeled: o.n_unlabeled,
            repeat: Some(o.cell.repeat),
            seed: o.seed,
            beta: o.beta,
            accuracy: m.accuracy,
            fairness_value: m.fairness(spec.template.fairness),
            fairness_dp: m.fairness_dp,
            fairness_opp: m.fairness_opp,
            fairness_odd: m.fairness_odd,
            seconds: o.seconds,
        }
    }

    /// Arithmetic mean of a group of repeat rows.
    pub fn mean(rows: &[ResultRow], base_seed: u64) -> ResultRow {
        let n = rows.len() as f64;
        let avg = |f: fn(&ResultRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        ResultRow {
            repeat: None,
            seed: base_seed,
            beta: avg(|r| r.beta),
            accuracy: avg(|r| r.accuracy),
            fairness_value: avg(|r| r.fairness_value),
            fairness_dp: avg(|r| r.fairness_dp),
            fairness_opp: avg(|r| r.fairness_opp),
            fairness_odd: avg(|r| r.fairness_odd),
            seconds: rows.iter().map(|r| r.seconds).sum(),
            ..rows[0].clone()
        }
    }

    pub fn to_csv(&self, wall_clock: bool) -> String {
        let repeat = self.repeat.map_or_else(|| "mean".to_string(), |r| r.to_string());
        let mut line = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment.as_str(),
            self.method.as_str(),
            self.fairness,
            self.alpha,
            self.alpha_mode,
            self.n_labeled,
            self.n_unlabeled,
            repeat,
            self.seed,
            self.beta,
            self.accuracy,
            self.fairness_value,
            self.fairness_dp,
            self.fairness_opp,
            self.fairness_odd
        );
        if wall_clock {
            line.push_str(&format!(",{}", self.seconds));
        }
        line
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

/// Runs every cell and returns repeat rows, each group followed by its mean
/// row.
pub fn run_experiment(spec: &ExperimentSpec, dataset: &Dataset) -> Result<Vec<ResultRow>> {
    spec.validate(dataset)?;
    let cells = spec.cells();
    let total = cells.len();
    let outcomes: Vec<ResultRow> = thread_pool(spec.jobs)?.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &cell)| {
                let o = run_cell(spec, dataset, cell)?;
                eprintln!(
                    "[{}/{total}] {} labeled={} unlabeled={} alpha={} repeat={} beta={} acc={:.4} {}={:.4} ({:.1}s)",
                    i + 1,
                    cell.method.as_str(),
                    cell.n_labeled,
                    o.n_unlabeled,
                    cell.alpha,
                    cell.repeat,
                    o.beta,
                    o.metrics.accuracy,
                    spec.template.fairness,
                    o.metrics.fairness(spec.template.fairness),
                    o.seconds
                );
                Ok(ResultRow::from_outcome(spec, &o))
            })
            .collect::<Result<_>>()
    })?;

    let mut rows = Vec::with_capacity(total + total / spec.repeats);
    for group in outcomes.chunks(spec.repeats) {
        rows.extend_from_slice(group);
        rows.push(ResultRow::mean(group, spec.base_seed));
    }
    Ok(rows)
}

pub fn write_results(path: &Path, rows: &[ResultRow], wall_clock: bool) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let header = if wall_clock {
        format!("{RESULTS_HEADER},seconds")
    } else {
        RESULTS_HEADER.to_string()
    };
    writeln!(out, "{header}").map_err(io)?;
    for r in rows {
        writeln!(out, "{}", r.to_csv(wall_clock)).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Loads, encodes and writes the Adult corpus; fails unless the result has
/// the expected 45,222 × 112 shape.
pub fn preprocess(inputs: &[PathBuf], out: &Path) -> Result<(usize, usize)> {
    let records = data::load_raw_files(inputs)?;
    let ds = data::encode(&records)?;
    let shape = (ds.len(), ds.n_features());
    if shape != (ADULT_SAMPLES, ADULT_FEATURES) {
        return Err(Error::Assertion(format!(
            "expected {ADULT_SAMPLES}x{ADULT_FEATURES}, got {}x{}",
            shape.0, shape.1
        )));
    }
    data::write_dataset(out, &ds)?;
    Ok(shape)
}

// ---------------------------------------------------------------------------
// Argument parsing

#[derive(Debug, Parser)]
#[command(name = "ssfair", version, about = "Semi-supervised fair classification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode the raw Adult files into a dataset file.
    Preprocess(PreprocessArgs),
    /// Train one model and report its test metrics.
    Train(TrainArgs),
    /// Evaluate a saved model on the test split.
    Evaluate(EvaluateArgs),
    /// Accuracy/fairness trade-off over alpha, semi-supervised vs supervised-only.
    SweepAlpha(SweepAlphaArgs),
    /// Effect of the number of unlabeled samples at a fixed labeled count.
    SweepUnlabeled(SweepUnlabeledArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw Adult files (train and test), in order.
    #[arg(long = "data", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Preprocessed dataset file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "convex")]
    pub alpha_mode: AlphaMode,
    /// Fixed regularization weight; tuned on a validation split when absent.
    #[arg(long, conflicts_with = "tune_beta")]
    pub beta: Option<f64>,
    /// Select beta from the standard grid by validation accuracy.
    #[arg(long)]
    pub tune_beta: bool,
    #[arg(long, default_value_t = train::DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value = "dp")]
    pub fairness: FairnessKind,
    #[arg(long, default_value_t = train::DEFAULT_EPOCHS)]
    pub epochs: usize,
    #[arg(long, default_value_t = train::DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    #[arg(long, default_value_t = crate::optim::DEFAULT_LR)]
    pub lr: f64,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Append a wall-clock seconds column (output is then not reproducible).
    #[arg(long)]
    pub wall_clock: bool,
}

impl RunArgs {
    fn template(&self) -> TrainConfig {
        TrainConfig {
            alpha_mode: self.alpha_mode,
            lambda: self.lambda,
            fairness: self.fairness,
            lr: self.lr,
            epochs: self.epochs,
            batch_size: self.batch_size,
            ..TrainConfig::default()
        }
    }

    fn beta(&self) -> BetaChoice {
        match self.beta {
            Some(b) => BetaChoice::Fixed(b),
            None => BetaChoice::Tuned(BETA_GRID.to_vec()),
        }
    }

    fn spec(&self, kind: ExperimentKind, methods: Vec<Method>) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            methods,
            labeled: Vec::new(),
            unlabeled: Vec::new(),
            alphas: Vec::new(),
            repeats: DEFAULT_REPEATS,
            base_seed: self.seed,
            beta: self.beta(),
            train_fraction: self.train_fraction,
            template: self.template(),
            jobs: self.jobs,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 0.0025)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100)]
    pub labeled: usize,
    /// Unlabeled samples to keep, or "all".
    #[arg(long, default_value = "all")]
    pub unlabeled: UnlabeledCount,
    #[arg(long)]
    pub supervised_only: bool,
    /// Write the trained model checkpoint here.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Write the per-epoch loss history here.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Base seed the model was trained with; selects the test split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
}

#[derive(Debug, Args)]
pub struct SweepAlphaArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHA_GRID.to_vec())]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LABELED_COUNTS.to_vec())]
    pub labeled: Vec<usize>,
    /// Unlabeled samples kept by the semi-supervised runs, or "all".
    #[arg(long, default_value = "all")]
    pub unlabeled: UnlabeledCount,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
}

#[derive(Debug, Args)]
pub struct SweepUnlabeledArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_UNLABELED_ALPHAS.to_vec())]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub labeled: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = [
            UnlabeledCount::Count(0),
            UnlabeledCount::Count(1000),
            UnlabeledCount::Count(5000),
            UnlabeledCount::Count(10000),
            UnlabeledCount::Count(20000),
            UnlabeledCount::All,
        ]
    )]
    pub unlabeled: Vec<UnlabeledCount>,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
}

fn write_text(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    f(&mut out).map_err(io)?;
    out.flush().map_err(io)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(a) => {
            let (n, d) = preprocess(&a.inputs, &a.out)?;
            println!("{n}x{d}");
        }
        Command::Train(a) => {
            let dataset = data::read_dataset(&a.run.data)?;
            let method = if a.supervised_only {
                Method::SupervisedOnly
            } else {
                Method::SsFair
            };
            let spec = ExperimentSpec {
                labeled: vec![a.labeled],
                unlabeled: vec![a.unlabeled],
                alphas: vec![a.alpha],
                repeats: 1,
                ..a.run.spec(ExperimentKind::Single, vec![method])
            };
            spec.validate(&dataset)?;
            let cell = spec.cells()[0];
            let outcome = run_cell(&spec, &dataset, cell)?;
            if let Some(path) = &a.model {
                outcome.params.save(path)?;
            }
            if let Some(path) = &a.history {
                write_text(path, |w| outcome.history.write_csv(w))?;
            }
            write_results(&a.run.out, &[ResultRow::from_outcome(&spec, &outcome)], a.run.wall_clock)?;
            println!("{}", MetricsRecord::CSV_HEADER);
            println!("{}", outcome.metrics.to_csv_row());
        }
        Command::Evaluate(a) => {
            let dataset = data::read_dataset(&a.data)?;
            let params = ModelParams::load(&a.model)?;
            let (_, test) = prepare_split(&dataset, a.train_fraction, 0, repeat_seed(a.seed, 0))?;
            let m = metrics::evaluate(&params, &test)?;
            write_text(&a.out, |w| {
                writeln!(w, "{}", MetricsRecord::CSV_HEADER)?;
                writeln!(w, "{}", m.to_csv_row())
            })?;
            println!("{}", m.to_csv_row());
        }
        Command::SweepAlpha(a) => {
            let dataset = data::read_dataset(&a.run.data)?;
            let spec = ExperimentSpec {
                labeled: a.labeled,
                unlabeled: vec![a.unlabeled],
                alphas: a.alpha,
                repeats: a.repeats,
                ..a.run.spec(
                    ExperimentKind::SweepAlpha,
                    vec![Method::SsFair, Method::SupervisedOnly],
                )
            };
            let rows = run_experiment(&spec, &dataset)?;
            write_results(&a.run.out, &rows, a.run.wall_clock)?;
        }
        Command::SweepUnlabeled(a) => {
            let dataset = data::read_dataset(&a.run.data)?;
            let spec = ExperimentSpec {
                labeled: vec![a.labeled],
                unlabeled: a.unlabeled,
                alphas: a.alpha,
                repeats: a.repeats,
                ..a.run.spec(ExperimentKind::SweepUnlabeled, vec![Method::SsFair])
            };
            let rows = run_experiment(&spec, &dataset)?;
            write_results(&a.run.out, &rows, a.run.wall_clock)?;
        }
    }
    Ok(())
}
