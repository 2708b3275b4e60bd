//! Gradient-free training by kernel-and-range (pseudoinverse) solves.
//!
//! For an `n`-layer network `G = f([1, f(⋯[1, f([1, X] W_1)] W_2 ⋯)] W_n)` and
//! an invertible activation `f` with inverse `φ`, setting `G = Y` and
//! peeling one layer at a time gives a chain of linear systems:
//!
//! ```text
//! T_n     = φ(Y)
//! T_{k-1} = φ( [T_k − 1·w_kᵀ] · pinv(𝖶_k) )        k = n, …, 2
//! W_1     = pinv([1, X]) · T_1
//! W_k     = pinv([1, H_{k-1}]) · T_k               k = 2, …, n
//! ```
//!
//! where `w_kᵀ` is the bias row of `W_k` and `𝖶_k` the remaining node rows.
//! The targets `T_k` are built once from randomly drawn `W_2 … W_n`; the
//! forward sweep then re-solves every layer against its target using the
//! already re-solved layers below it. One pass, no iteration.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ActivationPair};
use crate::error::{Error, Result};
use crate::linalg::{pinv, Matrix};
use crate::network::{random_init, Network, NetworkSpec};
use crate::report::{SolveTally, TrainReport};

/// What happens to the hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiddenMode {
    /// Solve every layer with the peeled targets.
    #[default]
    Solve,
    /// Keep the randomly drawn hidden layers; only the output layer is solved.
    Random,
}

impl std::str::FromStr for HiddenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solve" => Ok(HiddenMode::Solve),
            "random" => Ok(HiddenMode::Random),
            other => Err(Error::Config(format!("unknown hidden mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KarConfig {
    pub spec: NetworkSpec,
    /// Relative singular-value cutoff; `None` uses `max(m, n)·ε`.
    pub rcond: Option<f64>,
    /// Target transform `φ`.
    pub transform: ActivationKind,
    pub hidden_mode: HiddenMode,
}

impl KarConfig {
    pub fn new(spec: NetworkSpec) -> Self {
        Self {
            transform: spec.activation,
            spec,
            rcond: None,
            hidden_mode: HiddenMode::Solve,
        }
    }

    pub fn with_hidden_mode(mut self, mode: HiddenMode) -> Self {
        self.hidden_mode = mode;
        self
    }

    pub fn with_rcond(mut self, rcond: Option<f64>) -> Self {
        self.rcond = rcond;
        self
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed
    }
}

#[derive(Debug, Clone)]
pub struct KarFit {
    pub network: Network,
    pub report: TrainReport,
}

/// `W_1 = pinv([1, X]) · φ(Y)`.
pub fn train_single_layer(x: &Matrix, y: &Matrix, cfg: &KarConfig) -> Result<Network> {
    check_inputs(x, y, cfg)?;
    if cfg.spec.layer_count() != 1 {
        return Err(Error::Config(format!(
            "single-layer training needs no hidden layers, spec has {:?}",
            cfg.spec.hidden
        )));
    }
    let mut tally = SolveTally::default();
    fit(x, y, cfg, &mut tally)
}

/// The cross-coupled two-layer solve: random `W_2`, then `W_1` from the
/// peeled target, then `W_2` re-solved on the new hidden activations.
pub fn train_two_layer(x: &Matrix, y: &Matrix, cfg: &KarConfig) -> Result<Network> {
    check_inputs(x, y, cfg)?;
    if cfg.spec.layer_count() != 2 {
        return Err(Error::Config(format!(
            "two-layer training needs exactly one hidden layer, spec has {:?}",
            cfg.spec.hidden
        )));
    }
    let mut tally = SolveTally::default();
    fit(x, y, cfg, &mut tally)
}

pub fn train_n_layer(x: &Matrix, y: &Matrix, cfg: &KarConfig) -> Result<Network> {
    check_inputs(x, y, cfg)?;
    if cfg.spec.layer_count() < 2 {
        return Err(Error::Config("n-layer training needs at least one hidden layer".into()));
    }
    let mut tally = SolveTally::default();
    fit(x, y, cfg, &mut tally)
}

/// Trains any depth and measures the result.
pub fn train(x: &Matrix, y: &Matrix, cfg: &KarConfig) -> Result<KarFit> {
    check_inputs(x, y, cfg)?;
    let mut tally = SolveTally::default();
    let start = Instant::now();
    let network = fit(x, y, cfg, &mut tally)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut report = TrainReport::measure("kar", &network, x, y, elapsed)?;
    report.solves = Some(tally);
    Ok(KarFit { network, report })
}

fn check_inputs(x: &Matrix, y: &Matrix, cfg: &KarConfig) -> Result<()> {
    cfg.spec.validate()?;
    if x.rows() != y.rows() {
        return Err(Error::dimension(
            "kar::train",
            format!("{} target rows", x.rows()),
            format!("{}", y.rows()),
        ));
    }
    if x.cols() != cfg.spec.input_dim || y.cols() != cfg.spec.output_dim {
        return Err(Error::dimension(
            "kar::train",
            format!("x with {} cols, y with {} cols", cfg.spec.input_dim, cfg.spec.output_dim),
            format!("x with {} cols, y with {} cols", x.cols(), y.cols()),
        ));
    }
    Ok(())
}

fn fit(x: &Matrix, y: &Matrix, cfg: &KarConfig, tally: &mut SolveTally) -> Result<Network> {
    let mut net = random_init(&cfg.spec)?;
    let f = *net.activation();
    let phi = cfg.transform.pair();
    let n = net.layer_count();
    let target = phi.apply_phi(y);

    if cfg.hidden_mode == HiddenMode::Random || n == 1 {
        let mut h = x.clone();
        for (k, w) in net.weights()[..n - 1].iter().enumerate() {
            h = f.apply_f(&stage(k + 1, "hidden forward", h.with_ones_column().matmul(w))?);
        }
        let w_n = solve_layer(n, &h, &target, cfg.rcond, tally)?;
        net.set_weights(n - 1, w_n)?;
        return Ok(net);
    }

    let targets = peel_targets(&net, target, &phi, cfg.rcond, tally)?;
    let mut h = x.clone();
    for (k, t) in targets.iter().enumerate() {
        let w = solve_layer(k + 1, &h, t, cfg.rcond, tally)?;
        if k + 1 < n {
            h = f.apply_f(&stage(k + 1, "forward sweep", h.with_ones_column().matmul(&w))?);
        }
        net.set_weights(k, w)?;
    }
    Ok(net)
}

/// Builds `[T_1, …, T_n]` from the current (random) `W_2 … W_n`.
fn peel_targets(
    net: &Network,
    top: Matrix,
    phi: &ActivationPair,
    rcond: Option<f64>,
    tally: &mut SolveTally,
) -> Result<Vec<Matrix>> {
    let n = net.layer_count();
    let mut targets = vec![top];
    for k in (2..=n).rev() {
        let (bias, node) = net.weights()[k - 1].split_first_row();
        let node = node.expect("hidden width >= 1 gives a node block");
        let t_k = targets.last().expect("non-empty");
        let shifted = stage(k, "bias removal", t_k.sub(&Matrix::broadcast_row(&bias, t_k.rows())?))?;
        let inv = pinv(&node, rcond)?;
        tally.peel_inverses += 1;
        if inv.rank == 0 {
            return Err(Error::RankDeficient {
                layer: k,
                tolerance: inv.tolerance,
            });
        }
        let pulled = stage(k, "target peeling", shifted.matmul(&inv.pinv))?;
        targets.push(phi.apply_phi(&pulled));
    }
    targets.reverse();
    Ok(targets)
}

/// `W_k = pinv([1, input]) · target`.
fn solve_layer(
    layer: usize,
    input: &Matrix,
    target: &Matrix,
    rcond: Option<f64>,
    tally: &mut SolveTally,
) -> Result<Matrix> {
    let a = input.with_ones_column();
    let inv = pinv(&a, rcond)?;
    tally.weight_solves += 1;
    if inv.rank == 0 {
        return Err(Error::RankDeficient {
            layer,
            tolerance: inv.tolerance,
        });
    }
    stage(layer, "weight solve", inv.pinv.matmul(target))
}

fn stage(layer: usize, stage: &'static str, r: Result<Matrix>) -> Result<Matrix> {
    r.map_err(|e| match e {
        Error::NonFinite { .. } => Error::NumericalFailure { layer, stage },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::residual_sse;

    fn spec(d: usize, hidden: Vec<usize>, q: usize, seed: u64) -> NetworkSpec {
        NetworkSpec::new(d, hidden, q, seed)
    }

    #[test]
    fn single_layer_exact_when_square() {
        let x = Matrix::from_rows(&[[0.1, 0.7], [0.8, 0.2], [0.4, 0.9]]).unwrap();
        let y = Matrix::from_rows(&[[0.2, 0.6], [0.9, 0.1], [0.5, 0.35]]).unwrap();
        let net = train_single_layer(&x, &y, &KarConfig::new(spec(2, vec![], 2, 0))).unwrap();
        assert!(net.forward(&x).unwrap().max_abs_diff(&y) < 1e-6);
    }

    #[test]
    fn single_layer_fits_constant_targets() {
        let x = Matrix::from_fn(12, 3, |r, c| ((r * 5 + c * 11) % 13) as f64 / 13.0).unwrap();
        let y = Matrix::filled(12, 2, 0.3).unwrap();
        let net = train_single_layer(&x, &y, &KarConfig::new(spec(3, vec![], 2, 0))).unwrap();
        assert!(net.forward(&x).unwrap().max_abs_diff(&y) < 1e-6);
    }

    #[test]
    fn depth_mismatch_is_a_config_error() {
        let x = Matrix::zeros(3, 2).unwrap();
        let y = Matrix::zeros(3, 1).unwrap();
        let cfg = KarConfig::new(spec(2, vec![2], 1, 0));
        assert!(matches!(train_single_layer(&x, &y, &cfg), Err(Error::Config(_))));
        let cfg = KarConfig::new(spec(2, vec![2, 2], 1, 0));
        assert!(matches!(train_two_layer(&x, &y, &cfg), Err(Error::Config(_))));
        let cfg = KarConfig::new(spec(2, vec![], 1, 0));
        assert!(matches!(train_n_layer(&x, &y, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn shape_mismatch_is_a_dimension_error() {
        let cfg = KarConfig::new(spec(2, vec![3], 1, 0));
        let err = train(&Matrix::zeros(4, 2).unwrap(), &Matrix::zeros(3, 1).unwrap(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        let err = train(&Matrix::zeros(4, 3).unwrap(), &Matrix::zeros(4, 1).unwrap(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn zero_input_block_is_not_degenerate_because_of_bias() {
        // [1, 0] still has rank 1, so the solve goes through.
        let x = Matrix::zeros(4, 2).unwrap();
        let y = Matrix::column_vector(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        let fit = train(&x, &y, &KarConfig::new(spec(2, vec![2], 1, 3))).unwrap();
        assert!(fit.report.train_sse.is_finite());
    }

    #[test]
    fn peeling_uses_counted_solves() {
        let x = Matrix::from_fn(10, 3, |r, c| ((r * 3 + c * 7) % 11) as f64 / 11.0).unwrap();
        let y = Matrix::from_fn(10, 2, |r, c| ((r + c) % 2) as f64).unwrap();
        for n_hidden in 1..5 {
            let cfg = KarConfig::new(spec(3, vec![4; n_hidden], 2, 1));
            let fit = train(&x, &y, &cfg).unwrap();
            let n = n_hidden + 1;
            assert_eq!(
                fit.report.solves,
                Some(SolveTally {
                    weight_solves: n,
                    peel_inverses: n - 1
                })
            );
        }
        let cfg = KarConfig::new(spec(3, vec![4, 4], 2, 1)).with_hidden_mode(HiddenMode::Random);
        let fit = train(&x, &y, &cfg).unwrap();
        assert_eq!(fit.report.solves.unwrap().weight_solves, 1);
        assert_eq!(fit.report.solves.unwrap().peel_inverses, 0);
    }

    #[test]
    fn random_mode_keeps_hidden_weights() {
        let x = Matrix::from_fn(8, 2, |r, c| ((r * 3 + c) % 5) as f64 / 5.0).unwrap();
        let y = Matrix::from_fn(8, 1, |r, _| (r % 2) as f64).unwrap();
        let s = spec(2, vec![6], 1, 11);
        let init = random_init(&s).unwrap();
        let net = train_two_layer(&x, &y, &KarConfig::new(s).with_hidden_mode(HiddenMode::Random)).unwrap();
        assert_eq!(net.weights()[0], init.weights()[0]);
        assert_ne!(net.weights()[1], init.weights()[1]);
    }

    #[test]
    fn output_layer_is_least_squares_optimal() {
        let x = Matrix::from_fn(30, 3, |r, c| ((r * 7 + c * 5) % 17) as f64 / 17.0).unwrap();
        let y = Matrix::from_fn(30, 2, |r, c| ((r + 2 * c) % 3 == 0) as u8 as f64).unwrap();
        let cfg = KarConfig::new(spec(3, vec![5], 2, 4));
        let net = train_two_layer(&x, &y, &cfg).unwrap();
        let phi_y = net.activation().apply_phi(&y);
        let base = residual_sse(&net.output_preactivation(&x).unwrap(), &phi_y).unwrap();
        let mut probe = net.clone();
        for i in 0..50 {
            let w = &net.weights()[1];
            let delta = Matrix::from_fn(w.rows(), w.cols(), |r, c| {
                (((r * 31 + c * 17 + i * 13) % 19) as f64 - 9.0) * 1e-3
            })
            .unwrap();
            probe.set_weights(1, w.add(&delta).unwrap()).unwrap();
            let perturbed = residual_sse(&probe.output_preactivation(&x).unwrap(), &phi_y).unwrap();
            assert!(perturbed >= base - 1e-12, "perturbation {i} lowered SSE");
        }
    }

    #[test]
    fn n2_general_path_matches_two_layer() {
        let x = Matrix::from_fn(6, 2, |r, c| ((r * 3 + c * 2) % 7) as f64 / 7.0).unwrap();
        let y = Matrix::from_fn(6, 1, |r, _| (r % 2) as f64).unwrap();
        let cfg = KarConfig::new(spec(2, vec![3], 1, 21));
        let a = train_two_layer(&x, &y, &cfg).unwrap();
        let b = train_n_layer(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
