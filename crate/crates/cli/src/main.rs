//! `karnet`: training, evaluation and experiment runs from the command line.
//!
//! Exit status: 0 on success, 2 for bad arguments or configuration, 3 for
//! unreadable or malformed data, 4 for numerical failures.

mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use karnet_core::data::{builtin, load_csv};
use karnet_core::experiment::{
    self, Architecture, CvConfig, GradientCheckConfig, Model, SweepConfig, TrainerSettings,
    XorDemoConfig, DEFAULT_GRID,
};
use karnet_core::{Dataset, ErrorCategory, Network, Scaling};
use serde::Serialize;
use serde_json::json;

use args::{Cli, Command, DataArgs, TrainerArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] karnet_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Numerical => 4,
            },
            CliError::Usage(_) => 2,
            CliError::Read { .. } | CliError::Write { .. } => 3,
            CliError::Check(_) => 4,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let argv = match args::expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests also land here, with a zero exit code.
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Cv(a) => cv(a),
        Command::XorDemo(a) => xor_demo(a),
        Command::IrisSweep(a) => iris_sweep(a),
        Command::GradientCheck(a) => gradient_check(a),
    }
}

fn train(a: args::TrainArgs) -> CliResult<()> {
    let raw = load_data(&a.data)?;
    let scaling = fit_scaling(&raw, a.data.scale_eps)?;
    let ds = match &scaling {
        Some(s) => raw.with_scaling(s)?,
        None => raw,
    };
    let settings = trainer_settings(&a.trainer)?;
    let Model::Net { network, report } = experiment::fit_model(&ds, &a.layers.0, a.seed, &settings)? else {
        return Err(CliError::Usage("the majority predictor has no weights to train; use it with `cv`".into()));
    };
    let evaluation = experiment::evaluate(&network, &ds)?;
    println!(
        "trained {} net {:?} on {} samples: sse {:.6e}, error rate {:.4}, {:.3}s",
        report.trainer,
        network.spec().layer_sizes(),
        ds.len(),
        report.train_sse,
        evaluation.error_rate,
        report.wall_time_secs
    );
    write_text(&a.out, "weights.json", &network.to_json())?;
    write_json(
        &a.out,
        "report.json",
        &json!({
            "command": "train",
            "data": a.data.data,
            "scaling": scaling,
            "train": report,
            "evaluation": evaluation,
        }),
    )
}

fn eval(a: args::EvalArgs) -> CliResult<()> {
    let text = read_text(&a.weights)?;
    let network = Network::from_json(&text)?;
    let raw = load_data(&a.data)?;
    let ds = match &a.scaling {
        Some(path) => match read_scaling(path)? {
            Some(s) => raw.with_scaling(&s)?,
            None => raw,
        },
        None => raw,
    };
    let evaluation = experiment::evaluate(&network, &ds)?;
    println!(
        "{} samples: sse {:.6e}, error rate {:.4}, accuracy {:.4}",
        evaluation.samples, evaluation.sse, evaluation.error_rate, evaluation.accuracy
    );
    write_json(
        &a.out,
        "report.json",
        &json!({
            "command": "eval",
            "data": a.data.data,
            "weights": a.weights,
            "evaluation": evaluation,
        }),
    )
}

fn cv(a: args::CvArgs) -> CliResult<()> {
    let ds = load_data(&a.data)?;
    let architecture = match (a.layers, a.grid) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--layers and --grid are mutually exclusive".into())),
        (Some(layers), None) => Architecture::Fixed(layers.0),
        (None, grid) => Architecture::Search {
            grid: grid.map_or_else(|| DEFAULT_GRID.to_vec(), |g| g.0),
            hidden_layers: a.depth,
        },
    };
    if a.data.scale_eps <= 0.0 {
        return Err(CliError::Usage("cross-validation always scales features; --scale-eps must be positive".into()));
    }
    let cfg = CvConfig {
        trainer: trainer_settings(&a.trainer)?,
        architecture,
        trials: a.trials,
        folds: a.folds,
        inner_folds: a.inner_folds,
        seed: a.seed,
        scaling_epsilon: a.data.scale_eps,
        parallel: a.parallel,
    };
    let report = experiment::run_cv(&ds, &cfg)?;
    println!(
        "{} trial(s) x {} folds: mean accuracy {:.4}, mean error rate {:.4}, training time {:.3}s total",
        cfg.trials, cfg.folds, report.mean_accuracy, report.mean_error_rate, report.total_train_wall_secs
    );
    write_json(&a.out, "report.json", &report)
}

fn xor_demo(a: args::XorArgs) -> CliResult<()> {
    let demo = experiment::run_xor_demo(&XorDemoConfig {
        seed: a.seed,
        perturbed: !a.exact,
        resolution: a.resolution,
    })?;
    for (name, run) in [("two-layer", &demo.report.two_layer), ("five-layer", &demo.report.five_layer)] {
        println!(
            "{name} {:?}: outputs {:?}, max |error| {:.3e}",
            run.hidden, run.outputs, run.max_abs_error
        );
    }
    write_text(&a.out, "surface.csv", &demo.surface.to_csv())?;
    write_json(&a.out, "report.json", &demo.report)
}

fn iris_sweep(a: args::SweepArgs) -> CliResult<()> {
    let ds = load_data(&a.data)?;
    if a.data.scale_eps <= 0.0 {
        return Err(CliError::Usage("the sweep always scales features; --scale-eps must be positive".into()));
    }
    let cfg = SweepConfig {
        hidden_sizes: a.grid.0,
        hidden_layers: a.depth,
        trials: a.trials,
        seed: a.seed,
        per_class_train: a.per_class,
        scaling_epsilon: a.data.scale_eps,
        trainer: TrainerSettings {
            hidden_mode: a.hidden_mode,
            init: a.init,
            rcond: a.rcond,
            ..TrainerSettings::kar()
        },
    };
    let report = experiment::run_iris_sweep(&ds, &cfg)?;
    println!("{:>5} {:>12} {:>12} {:>9} {:>9}", "h", "mean sse", "max sse", "train err", "test err");
    for s in &report.summary {
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>9.4} {:>9.4}",
            s.hidden, s.mean_train_sse, s.max_train_sse, s.mean_train_error_rate, s.mean_test_error_rate
        );
    }
    write_text(&a.out, "sweep.csv", &report.to_csv())?;
    write_json(&a.out, "report.json", &report)
}

fn gradient_check(a: args::GradCheckArgs) -> CliResult<()> {
    let report = experiment::run_gradient_check(&GradientCheckConfig {
        input_dim: a.inputs,
        hidden: a.layers.0,
        output_dim: a.outputs,
        samples: a.samples,
        nets: a.nets,
        seed: a.seed,
    })?;
    let passed = report.max_relative_error <= a.tolerance;
    println!(
        "{} networks: max relative error {:.3e} (tolerance {:.1e}) {}",
        a.nets,
        report.max_relative_error,
        a.tolerance,
        if passed { "ok" } else { "FAILED" }
    );
    write_json(&a.out, "report.json", &json!({ "tolerance": a.tolerance, "passed": passed, "check": report }))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "gradient check exceeded tolerance: {:.3e} > {:.1e}",
            report.max_relative_error, a.tolerance
        )))
    }
}

fn trainer_settings(a: &TrainerArgs) -> CliResult<TrainerSettings> {
    if a.clip < 0.0 {
        return Err(CliError::Usage("--clip must be non-negative".into()));
    }
    let base = TrainerSettings::for_kind(a.trainer);
    Ok(TrainerSettings {
        hidden_mode: a.hidden_mode,
        init: a.init.unwrap_or(base.init),
        rcond: a.rcond,
        learning_rate: a.lr,
        max_iters: a.iters,
        gradient_clip: (a.clip > 0.0).then_some(a.clip),
        ..base
    })
}

/// A path that exists is read as CSV; otherwise the name must be a builtin.
fn load_data(a: &DataArgs) -> CliResult<Dataset> {
    let path = Path::new(&a.data);
    if !path.exists() {
        if let Some(ds) = builtin(&a.data) {
            return Ok(ds);
        }
    }
    let label = match a.label_col {
        Some(c) => c,
        None => column_count(path)?.saturating_sub(1),
    };
    Ok(load_csv(path, label, a.header)?)
}

fn column_count(path: &Path) -> CliResult<usize> {
    let text = read_text(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    Ok(first.split(',').count())
}

fn fit_scaling(ds: &Dataset, eps: f64) -> CliResult<Option<Scaling>> {
    if eps == 0.0 {
        return Ok(None);
    }
    Ok(Some(Scaling::fit(&ds.x, eps)?))
}

fn read_scaling(path: &Path) -> CliResult<Option<Scaling>> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a JSON report: {e}", path.display())))?;
    let scaling = value.get("scaling").cloned().unwrap_or(serde_json::Value::Null);
    serde_json::from_value(scaling)
        .map_err(|e| CliError::Usage(format!("{}: malformed scaling entry: {e}", path.display())))
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::create_dir_all(dir)
        .and_then(|()| std::fs::write(&path, text))
        .map_err(|source| CliError::Write { path, source })
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_text(dir, name, &text)
}
