//! Experiment runners: the XOR decision-surface demo, the Iris hidden-size
//! sweep and stratified cross-validation with inner model selection.
//!
//! Every unit of work (trial, fold, grid point) draws its own seed from the
//! run seed via [`derive_seed`], so results do not depend on execution order
//! and parallel runs reproduce serial ones exactly. Wall-clock fields all end
//! in `_secs`; everything else in a report is a pure function of the config.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{check_gradient, train_gd, unsaturated_network, GdConfig};
use crate::data::{first_n_per_class, stratified_folds, Dataset, FoldPlan, Scaling};
use crate::error::{Error, Result};
use crate::kar::{self, HiddenMode, KarConfig};
use crate::linalg::{residual_sse, Matrix};
use crate::metrics::{accuracy, classify, error_rate, mean};
use crate::network::{InitScheme, Network, NetworkSpec};
use crate::report::TrainReport;

/// Hidden sizes searched by inner cross-validation unless overridden.
pub const DEFAULT_GRID: [usize; 12] = [1, 2, 3, 5, 10, 20, 30, 50, 80, 100, 200, 500];

/// Mixes a base seed with a path of indices (splitmix64 finalizer per step).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut s = base;
    for &p in path {
        s = splitmix(s ^ splitmix(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    s
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `[2^{L-1}·h, …, 2h, h]`: widths doubling towards the input.
pub fn exponential_layers(h: usize, hidden_layers: usize) -> Vec<usize> {
    (0..hidden_layers).rev().map(|i| h << i).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainerKind {
    Kar,
    Gd,
    /// Predicts the most frequent training class; a reference floor.
    Majority,
}

impl std::str::FromStr for TrainerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kar" => Ok(TrainerKind::Kar),
            "gd" => Ok(TrainerKind::Gd),
            "majority" => Ok(TrainerKind::Majority),
            other => Err(Error::Config(format!("unknown trainer {other:?} (expected kar or gd)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerSettings {
    pub kind: TrainerKind,
    pub hidden_mode: HiddenMode,
    pub init: InitScheme,
    pub rcond: Option<f64>,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub sse_tolerance: f64,
    pub gradient_clip: Option<f64>,
}

impl TrainerSettings {
    pub fn kar() -> Self {
        Self {
            kind: TrainerKind::Kar,
            hidden_mode: HiddenMode::Solve,
            init: InitScheme::Uniform01,
            rcond: None,
            learning_rate: 1e-3,
            max_iters: 500,
            sse_tolerance: 1e-8,
            gradient_clip: Some(10.0),
        }
    }

    pub fn gd() -> Self {
        Self {
            kind: TrainerKind::Gd,
            init: InitScheme::Centered,
            ..Self::kar()
        }
    }

    pub fn for_kind(kind: TrainerKind) -> Self {
        match kind {
            TrainerKind::Kar => Self::kar(),
            TrainerKind::Gd => Self::gd(),
            TrainerKind::Majority => Self {
                kind,
                ..Self::kar()
            },
        }
    }
}

/// A trained predictor. Few of these exist at once, so the size gap between
/// variants is left alone.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum Model {
    Net { network: Network, report: TrainReport },
    Majority { class: usize, classes: usize },
}

impl Model {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        match self {
            Model::Net { network, .. } => Ok(classify(&network.forward(x)?)),
            Model::Majority { class, .. } => Ok(vec![*class; x.rows()]),
        }
    }

    pub fn train_sse(&self) -> f64 {
        match self {
            Model::Net { report, .. } => report.train_sse,
            Model::Majority { .. } => 0.0,
        }
    }

    pub fn wall_time_secs(&self) -> f64 {
        match self {
            Model::Net { report, .. } => report.wall_time_secs,
            Model::Majority { .. } => 0.0,
        }
    }
}

/// Trains the configured model on an already scaled dataset.
pub fn fit_model(train: &Dataset, hidden: &[usize], seed: u64, settings: &TrainerSettings) -> Result<Model> {
    let spec = NetworkSpec::new(train.feature_count(), hidden.to_vec(), train.target_count(), seed)
        .with_init(settings.init);
    match settings.kind {
        TrainerKind::Kar => {
            let cfg = KarConfig::new(spec)
                .with_hidden_mode(settings.hidden_mode)
                .with_rcond(settings.rcond);
            let fit = kar::train(&train.x, &train.y, &cfg)?;
            Ok(Model::Net {
                network: fit.network,
                report: fit.report,
            })
        }
        TrainerKind::Gd => {
            let cfg = GdConfig {
                spec,
                learning_rate: settings.learning_rate,
                max_iters: settings.max_iters,
                sse_tolerance: settings.sse_tolerance,
                gradient_clip: settings.gradient_clip,
            };
            let fit = train_gd(&train.x, &train.y, &cfg)?;
            Ok(Model::Net {
                network: fit.network,
                report: fit.report,
            })
        }
        TrainerKind::Majority => {
            let labels = train
                .labels
                .as_ref()
                .ok_or_else(|| Error::Config("majority predictor needs class labels".into()))?;
            let classes = train.class_names.len();
            let mut counts = vec![0usize; classes];
            for &l in labels {
                counts[l] += 1;
            }
            // Lowest index wins ties.
            let class = (0..classes).fold(0, |best, c| if counts[c] > counts[best] { c } else { best });
            Ok(Model::Majority { class, classes })
        }
    }
}

/// Train/test datasets for one fold, both scaled with the training ranges.
pub fn fold_pair(ds: &Dataset, plan: &FoldPlan, fold: usize, epsilon: f64) -> Result<(Dataset, Dataset)> {
    split_scaled(ds, &plan.train_indices(fold), &plan.test_indices(fold), epsilon)
}

pub fn split_scaled(ds: &Dataset, train_idx: &[usize], test_idx: &[usize], epsilon: f64) -> Result<(Dataset, Dataset)> {
    let train = ds.subset(train_idx)?;
    let test = ds.subset(test_idx)?;
    let scaling = Scaling::fit(&train.x, epsilon)?;
    Ok((train.with_scaling(&scaling)?, test.with_scaling(&scaling)?))
}

fn labels_of(ds: &Dataset) -> Result<&[usize]> {
    ds.labels
        .as_deref()
        .ok_or_else(|| Error::Config("dataset has no class labels".into()))
}

/// Output-space scores of a network on a labelled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub samples: usize,
    pub sse: f64,
    pub error_rate: f64,
    pub accuracy: f64,
}

pub fn evaluate(net: &Network, ds: &Dataset) -> Result<Evaluation> {
    let out = net.forward(&ds.x)?;
    let predicted = classify(&out);
    let truth = match &ds.labels {
        Some(l) => l.clone(),
        None => classify(&ds.y),
    };
    Ok(Evaluation {
        samples: ds.len(),
        sse: residual_sse(&out, &ds.y)?,
        error_rate: error_rate(&predicted, &truth),
        accuracy: accuracy(&predicted, &truth),
    })
}

// ---------------------------------------------------------------------------
// XOR demo

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XorDemoConfig {
    pub seed: u64,
    pub perturbed: bool,
    /// Grid points per axis over [0, 1].
    pub resolution: usize,
}

impl Default for XorDemoConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            perturbed: true,
            resolution: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XorRun {
    pub hidden: Vec<usize>,
    pub outputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub max_abs_error: f64,
    pub train_sse: f64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XorReport {
    pub seed: u64,
    pub two_layer: XorRun,
    pub five_layer: XorRun,
}

/// Forward values of both networks over a regular grid on [0, 1]².
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub points: Vec<[f64; 4]>,
}

impl SurfaceGrid {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,two_layer,five_layer\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p[0], p[1], p[2], p[3]));
        }
        out
    }
}

pub struct XorDemo {
    pub report: XorReport,
    pub surface: SurfaceGrid,
    pub two_layer: Network,
    pub five_layer: Network,
}

pub fn run_xor_demo(cfg: &XorDemoConfig) -> Result<XorDemo> {
    if cfg.resolution < 2 {
        return Err(Error::Config("surface resolution must be at least 2".into()));
    }
    let ds = crate::data::make_xor(cfg.perturbed);
    let run = |hidden: Vec<usize>| -> Result<(XorRun, Network)> {
        let spec = NetworkSpec::new(2, hidden.clone(), 1, cfg.seed);
        let fit = kar::train(&ds.x, &ds.y, &KarConfig::new(spec))?;
        let outputs = fit.network.forward(&ds.x)?.column(0);
        let targets = ds.y.column(0);
        let max_abs_error = outputs
            .iter()
            .zip(&targets)
            .map(|(o, t)| (o - t).abs())
            .fold(0.0, f64::max);
        Ok((
            XorRun {
                hidden,
                outputs,
                targets,
                max_abs_error,
                train_sse: fit.report.train_sse,
                wall_time_secs: fit.report.wall_time_secs,
            },
            fit.network,
        ))
    };
    let (two, two_net) = run(vec![2])?;
    let (five, five_net) = run(vec![3, 3, 3, 3])?;

    let n = cfg.resolution;
    let step = 1.0 / (n - 1) as f64;
    let grid = Matrix::from_fn(n * n, 2, |r, c| {
        let (i, j) = (r / n, r % n);
        step * if c == 0 { i } else { j } as f64
    })?;
    let g2 = two_net.forward(&grid)?;
    let g5 = five_net.forward(&grid)?;
    let points = (0..grid.rows())
        .map(|r| [grid.get(r, 0), grid.get(r, 1), g2.get(r, 0), g5.get(r, 0)])
        .collect();

    Ok(XorDemo {
        report: XorReport {
            seed: cfg.seed,
            two_layer: two,
            five_layer: five,
        },
        surface: SurfaceGrid { points },
        two_layer: two_net,
        five_layer: five_net,
    })
}

// ---------------------------------------------------------------------------
// Iris hidden-size sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub hidden_sizes: Vec<usize>,
    /// Hidden layers per network, each of the swept width.
    pub hidden_layers: usize,
    pub trials: usize,
    pub seed: u64,
    pub per_class_train: usize,
    pub scaling_epsilon: f64,
    pub trainer: TrainerSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: (79..=93).collect(),
            hidden_layers: 1,
            trials: 10,
            seed: 0,
            per_class_train: 30,
            scaling_epsilon: 0.01,
            trainer: TrainerSettings {
                hidden_mode: HiddenMode::Random,
                init: InitScheme::Centered,
                ..TrainerSettings::kar()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub hidden: usize,
    pub trial: usize,
    pub seed: u64,
    pub train_sse: f64,
    pub train_sse_transformed: f64,
    pub train_error_rate: f64,
    pub test_error_rate: f64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub hidden: usize,
    pub mean_train_sse: f64,
    pub max_train_sse: f64,
    pub min_train_sse: f64,
    pub mean_train_error_rate: f64,
    pub mean_test_error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub train_samples: usize,
    pub test_samples: usize,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

impl SweepReport {
    /// One line per (hidden size, trial); wall times are left out.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,trial,seed,sse,sse_transformed,train_err,test_err\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.hidden, r.trial, r.seed, r.train_sse, r.train_sse_transformed, r.train_error_rate, r.test_error_rate
            ));
        }
        out
    }
}

pub fn run_iris_sweep(ds: &Dataset, cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.trials == 0 || cfg.hidden_sizes.is_empty() || cfg.hidden_layers == 0 {
        return Err(Error::Config("sweep needs at least one trial, hidden size and hidden layer".into()));
    }
    let labels = labels_of(ds)?;
    let (train_idx, test_idx) = first_n_per_class(labels, cfg.per_class_train);
    if test_idx.is_empty() {
        return Err(Error::Config("no samples left for testing after the per-class split".into()));
    }
    let (train, test) = split_scaled(ds, &train_idx, &test_idx, cfg.scaling_epsilon)?;
    let train_labels = labels_of(&train)?;
    let test_labels = labels_of(&test)?;

    let units: Vec<(usize, usize)> = cfg
        .hidden_sizes
        .iter()
        .flat_map(|&h| (0..cfg.trials).map(move |t| (h, t)))
        .collect();
    let rows = units
        .par_iter()
        .map(|&(h, trial)| {
            let seed = derive_seed(cfg.seed, &[trial as u64]);
            let hidden = vec![h; cfg.hidden_layers];
            let model = fit_model(&train, &hidden, seed, &cfg.trainer)?;
            let Model::Net { network, report } = &model else {
                return Err(Error::Config("the sweep needs a network trainer".into()));
            };
            Ok(SweepRow {
                hidden: h,
                trial,
                seed,
                train_sse: report.train_sse,
                train_sse_transformed: report.train_sse_transformed,
                train_error_rate: error_rate(&classify(&network.forward(&train.x)?), train_labels),
                test_error_rate: error_rate(&classify(&network.forward(&test.x)?), test_labels),
                wall_time_secs: report.wall_time_secs,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = cfg
        .hidden_sizes
        .iter()
        .map(|&h| {
            let of_h: Vec<&SweepRow> = rows.iter().filter(|r| r.hidden == h).collect();
            let sse: Vec<f64> = of_h.iter().map(|r| r.train_sse).collect();
            SweepSummary {
                hidden: h,
                mean_train_sse: mean(&sse),
                max_train_sse: sse.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                min_train_sse: sse.iter().copied().fold(f64::INFINITY, f64::min),
                mean_train_error_rate: mean(&of_h.iter().map(|r| r.train_error_rate).collect::<Vec<_>>()),
                mean_test_error_rate: mean(&of_h.iter().map(|r| r.test_error_rate).collect::<Vec<_>>()),
            }
        })
        .collect();

    Ok(SweepReport {
        config: cfg.clone(),
        train_samples: train.len(),
        test_samples: test.len(),
        rows,
        summary,
    })
}

// ---------------------------------------------------------------------------
// Cross-validation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    /// Fixed hidden sizes; no inner search.
    Fixed(Vec<usize>),
    /// Pick `h` from `grid` by inner cross-validation; the network has
    /// `hidden_layers` hidden layers shaped by [`exponential_layers`].
    Search { grid: Vec<usize>, hidden_layers: usize },
}

impl Architecture {
    pub fn search_default() -> Self {
        Architecture::Search {
            grid: DEFAULT_GRID.to_vec(),
            hidden_layers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub trainer: TrainerSettings,
    pub architecture: Architecture,
    pub trials: usize,
    pub folds: usize,
    pub inner_folds: usize,
    pub seed: u64,
    pub scaling_epsilon: f64,
    pub parallel: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            trainer: TrainerSettings::kar(),
            architecture: Architecture::search_default(),
            trials: 10,
            folds: 10,
            inner_folds: 10,
            seed: 0,
            scaling_epsilon: 0.01,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub trial: usize,
    pub fold: usize,
    pub plan_seed: u64,
    pub model_seed: u64,
    pub hidden: Vec<usize>,
    pub test_samples: usize,
    pub accuracy: f64,
    pub error_rate: f64,
    pub train_sse: f64,
    pub train_wall_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: CvConfig,
    pub samples: usize,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub mean_error_rate: f64,
    pub mean_train_wall_secs: f64,
    pub total_train_wall_secs: f64,
}

/// Fold plan for a given trial; identical for every trainer kind.
pub fn trial_plan(labels: &[usize], cfg: &CvConfig, trial: usize) -> Result<FoldPlan> {
    stratified_folds(labels, cfg.folds, derive_seed(cfg.seed, &[trial as u64]))
}

pub fn run_cv(ds: &Dataset, cfg: &CvConfig) -> Result<CvReport> {
    if cfg.trials == 0 {
        return Err(Error::Config("cross-validation needs at least one trial".into()));
    }
    let labels = labels_of(ds)?;
    let plans = (0..cfg.trials)
        .map(|t| trial_plan(labels, cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let units: Vec<(usize, usize)> = (0..cfg.trials)
        .flat_map(|t| (0..cfg.folds).map(move |f| (t, f)))
        .collect();

    let run_unit = |&(trial, fold): &(usize, usize)| -> Result<FoldResult> {
        let plan = &plans[trial];
        let (train, test) = fold_pair(ds, plan, fold, cfg.scaling_epsilon)?;
        let unit_seed = derive_seed(cfg.seed, &[trial as u64, fold as u64]);
        let hidden = match &cfg.architecture {
            Architecture::Fixed(h) => h.clone(),
            Architecture::Search { grid, hidden_layers } => {
                let h = select_hidden(ds, &plan.train_indices(fold), grid, *hidden_layers, unit_seed, cfg)?;
                exponential_layers(h, *hidden_layers)
            }
        };
        let model_seed = derive_seed(unit_seed, &[u64::MAX]);
        let model = fit_model(&train, &hidden, model_seed, &cfg.trainer)?;
        let predicted = model.predict(&test.x)?;
        let truth = labels_of(&test)?;
        Ok(FoldResult {
            trial,
            fold,
            plan_seed: plan.seed,
            model_seed,
            hidden,
            test_samples: test.len(),
            accuracy: accuracy(&predicted, truth),
            error_rate: error_rate(&predicted, truth),
            train_sse: model.train_sse(),
            train_wall_secs: model.wall_time_secs(),
        })
    };

    let folds = if cfg.parallel {
        units.par_iter().map(run_unit).collect::<Result<Vec<_>>>()?
    } else {
        units.iter().map(run_unit).collect::<Result<Vec<_>>>()?
    };

    let accs: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let errs: Vec<f64> = folds.iter().map(|f| f.error_rate).collect();
    let times: Vec<f64> = folds.iter().map(|f| f.train_wall_secs).collect();
    Ok(CvReport {
        config: cfg.clone(),
        samples: ds.len(),
        mean_accuracy: mean(&accs),
        mean_error_rate: mean(&errs),
        mean_train_wall_secs: mean(&times),
        total_train_wall_secs: times.iter().sum(),
        folds,
    })
}

/// Inner cross-validation on the outer training indices. Returns the grid
/// value with the best mean accuracy; ties go to the smaller size.
fn select_hidden(
    ds: &Dataset,
    outer_train: &[usize],
    grid: &[usize],
    hidden_layers: usize,
    seed: u64,
    cfg: &CvConfig,
) -> Result<usize> {
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let Some(&smallest) = grid.first() else {
        return Err(Error::Config("hidden-size grid is empty".into()));
    };
    let inner = ds.subset(outer_train)?;
    let inner_labels = labels_of(&inner)?;
    let plan = stratified_folds(inner_labels, cfg.inner_folds, derive_seed(seed, &[0]))?;

    let mut best = (smallest, f64::NEG_INFINITY);
    for &h in &grid {
        let hidden = exponential_layers(h, hidden_layers);
        let mut accs = Vec::with_capacity(cfg.inner_folds);
        for fold in 0..cfg.inner_folds {
            let (train, test) = fold_pair(&inner, &plan, fold, cfg.scaling_epsilon)?;
            let model_seed = derive_seed(seed, &[1, h as u64, fold as u64]);
            let model = fit_model(&train, &hidden, model_seed, &cfg.trainer)?;
            accs.push(accuracy(&model.predict(&test.x)?, labels_of(&test)?));
        }
        let score = mean(&accs);
        if score > best.1 {
            best = (h, score);
        }
    }
    Ok(best.0)
}

// ---------------------------------------------------------------------------
// Gradient check

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub samples: usize,
    pub nets: usize,
    pub seed: u64,
}

impl Default for GradientCheckConfig {
    fn default() -> Self {
        Self {
            input_dim: 3,
            hidden: vec![4, 3],
            output_dim: 2,
            samples: 8,
            nets: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub config: GradientCheckConfig,
    /// Worst relative error per network, in seed order.
    pub relative_errors: Vec<f64>,
    pub max_relative_error: f64,
}

/// Compares backprop against finite differences on `nets` unsaturated random
/// networks, each with its own uniform `[0, 1]` inputs and `(0, 1)` targets.
pub fn run_gradient_check(cfg: &GradientCheckConfig) -> Result<GradientCheckReport> {
    if cfg.nets == 0 || cfg.samples == 0 {
        return Err(Error::Config("gradient check needs at least one network and one sample".into()));
    }
    let relative_errors = (0..cfg.nets)
        .map(|i| {
            let seed = derive_seed(cfg.seed, &[i as u64]);
            let spec = NetworkSpec::new(cfg.input_dim, cfg.hidden.clone(), cfg.output_dim, seed);
            let net = unsaturated_network(&spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
            let x = Matrix::from_fn(cfg.samples, cfg.input_dim, |_, _| rng.gen::<f64>())?;
            let y = Matrix::from_fn(cfg.samples, cfg.output_dim, |_, _| rng.gen_range(0.05..0.95))?;
            check_gradient(&net, &x, &y)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientCheckReport {
        config: cfg.clone(),
        max_relative_error: relative_errors.iter().copied().fold(0.0, f64::max),
        relative_errors,
    })
}
