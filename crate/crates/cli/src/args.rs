//! Command-line surface and `key = value` config-file merging.
//!
//! A config file supplies defaults for the same long flags the subcommand
//! accepts (`layers = 3,3,3,3` stands for `--layers 3,3,3,3`). Its entries are
//! spliced in ahead of the real arguments, and because every option overrides
//! itself the explicit flags win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use karnet_core::experiment::TrainerKind;
use karnet_core::kar::HiddenMode;
use karnet_core::InitScheme;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "karnet", version, about = "Analytic (pseudoinverse) training of feedforward networks")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one network on a dataset and write weights.json + report.json.
    Train(TrainArgs),
    /// Score a saved weights file on a dataset.
    Eval(EvalArgs),
    /// Stratified k-fold cross-validation, optionally with inner model selection.
    Cv(CvArgs),
    /// Fit 2-layer and 5-layer nets to XOR and dump the decision surface.
    XorDemo(XorArgs),
    /// Sweep hidden-layer width on a fixed per-class train/test split.
    IrisSweep(SweepArgs),
    /// Compare backprop against finite differences on random networks.
    GradientCheck(GradCheckArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV path, or a builtin: iris, xor, xor-perturbed.
    #[arg(long, default_value = "iris")]
    pub data: String,
    /// Zero-based label column; defaults to the last column.
    #[arg(long)]
    pub label_col: Option<usize>,
    /// Whether the CSV's first row is a header.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub header: bool,
    /// Features are mapped into [eps, 1 - eps] using training ranges; 0 disables.
    #[arg(long, default_value_t = 0.01)]
    pub scale_eps: f64,
}

#[derive(Debug, Args)]
pub struct TrainerArgs {
    #[arg(long, default_value = "kar")]
    pub trainer: TrainerKind,
    #[arg(long, default_value = "solve")]
    pub hidden_mode: HiddenMode,
    /// uniform01 or centered; defaults to uniform01 for kar and centered for gd.
    #[arg(long)]
    pub init: Option<InitScheme>,
    /// Relative singular-value cutoff for the pseudoinverse.
    #[arg(long)]
    pub rcond: Option<f64>,
    /// Gradient-descent step size.
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Gradient-descent iteration cap.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Global gradient-norm clip for gradient descent; 0 disables.
    #[arg(long, default_value_t = 10.0)]
    pub clip: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub trainer: TrainerArgs,
    /// Hidden widths, comma separated; "none" for a single layer.
    #[arg(long, default_value = "10", value_parser = layers_arg)]
    pub layers: Widths,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// weights.json written by `train`.
    #[arg(long)]
    pub weights: PathBuf,
    /// report.json from `train`; its feature scaling is reused. Without it the
    /// data are used as given.
    #[arg(long)]
    pub scaling: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub trainer: TrainerArgs,
    /// Fixed hidden widths; when absent the width is chosen from --grid.
    #[arg(long, value_parser = layers_arg)]
    pub layers: Option<Widths>,
    /// Candidate widths for inner selection, e.g. "1,2,5,10-20".
    #[arg(long, value_parser = grid_arg)]
    pub grid: Option<Widths>,
    /// Hidden layers in searched networks, widths doubling towards the input.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub inner_folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub parallel: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct XorArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the exact unit-square corners instead of the perturbed points.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub exact: bool,
    /// Grid points per axis for surface.csv.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Hidden widths to sweep, e.g. "79-93".
    #[arg(long, default_value = "79-93", value_parser = grid_arg)]
    pub grid: Widths,
    /// Hidden layers, all of the swept width.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training samples taken per class in file order; the rest are test.
    #[arg(long, default_value_t = 30)]
    pub per_class: usize,
    #[arg(long, default_value = "random")]
    pub hidden_mode: HiddenMode,
    #[arg(long, default_value = "centered")]
    pub init: InitScheme,
    #[arg(long)]
    pub rcond: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    /// Hidden widths of the checked networks.
    #[arg(long, default_value = "4,3", value_parser = layers_arg)]
    pub layers: Widths,
    #[arg(long, default_value_t = 3)]
    pub inputs: usize,
    #[arg(long, default_value_t = 2)]
    pub outputs: usize,
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    #[arg(long, default_value_t = 20)]
    pub nets: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest acceptable relative error; exceeding it exits with status 4.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// A list of layer widths. Wrapped so clap treats it as one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Widths(pub Vec<usize>);

fn layers_arg(s: &str) -> Result<Widths, String> {
    parse_layers(s).map(Widths)
}

fn grid_arg(s: &str) -> Result<Widths, String> {
    parse_grid(s).map(Widths)
}

pub fn parse_layers(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    if s.is_empty() || s == "none" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            let part = part.trim();
            match part.parse::<usize>() {
                Ok(0) => Err("hidden widths must be positive".to_string()),
                Ok(n) => Ok(n),
                Err(_) => Err(format!("invalid layer width {part:?}")),
            }
        })
        .collect()
}

/// Comma-separated widths where `a-b` expands to the inclusive range.
pub fn parse_grid(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("invalid grid entry {part:?}");
        if let Some((a, b)) = part.split_once('-') {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(format!("grid {s:?} must list positive widths"));
    }
    Ok(out)
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", n + 1));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key {key:?}", n + 1));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

/// Removes `--config <path>` from `argv` and splices the file's entries in
/// directly after the subcommand name.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let Some(sub) = rest.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 2) else {
        return Err(CliError::Usage("--config given without a subcommand".into()));
    };
    let injected = read_config(&path)?
        .into_iter()
        .flat_map(|(k, v)| [format!("--{k}"), v]);
    let tail = rest.split_off(sub);
    rest.extend(injected);
    rest.extend(tail);
    Ok(rest)
}
