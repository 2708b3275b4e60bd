//! Full-batch gradient descent on output-space SSE, over the same network and
//! activation as the analytic trainer. Used as the iterative comparison point.
//!
//! The logit derivative `1 / (x(1 − x))` is evaluated at the clamped
//! pre-activation, matching the forward pass, so saturated units still get a
//! (bounded) gradient. An optional global-norm clip guards against the steep
//! edges of the domain.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{random_init, InitScheme, Network, NetworkSpec};
use crate::report::TrainReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub spec: NetworkSpec,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub sse_tolerance: f64,
    pub gradient_clip: Option<f64>,
}

impl GdConfig {
    pub fn new(spec: NetworkSpec) -> Self {
        Self {
            spec,
            learning_rate: 1e-3,
            max_iters: 500,
            sse_tolerance: 1e-8,
            gradient_clip: Some(10.0),
        }
    }

    fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if let Some(c) = self.gradient_clip {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Config(format!("gradient clip must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GdFit {
    pub network: Network,
    pub report: TrainReport,
    /// SSE before each update, plus the final value.
    pub loss_history: Vec<f64>,
}

pub fn train_gd(x: &Matrix, y: &Matrix, cfg: &GdConfig) -> Result<GdFit> {
    cfg.validate()?;
    check_shapes(cfg.spec.input_dim, cfg.spec.output_dim, x, y)?;
    let start = Instant::now();
    let net = random_init(&cfg.spec)?;
    let mut weights: Vec<DMatrix<f64>> = net.weights().iter().map(|w| w.as_dmatrix().clone()).collect();
    let pair = *net.activation();

    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (loss, grads) = loss_and_gradient(&weights, &pair, x.as_dmatrix(), y.as_dmatrix());
        if !loss.is_finite() {
            return Err(Error::Diverged {
                iteration: iterations,
                loss,
            });
        }
        history.push(loss);
        if loss < cfg.sse_tolerance || iterations == cfg.max_iters {
            break;
        }
        let mut step = cfg.learning_rate;
        if let Some(clip) = cfg.gradient_clip {
            let norm = grads.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
            if norm > clip {
                step *= clip / norm;
            }
        }
        for (w, g) in weights.iter_mut().zip(&grads) {
            *w -= g * step;
        }
        iterations += 1;
    }

    let weights = weights
        .into_iter()
        .map(Matrix::from_dmatrix)
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::Diverged {
            iteration: iterations,
            loss: f64::NAN,
        })?;
    let network = Network::new(cfg.spec.clone(), weights)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut report = TrainReport::measure("gd", &network, x, y, elapsed)?;
    report.iterations = Some(iterations);
    Ok(GdFit {
        network,
        report,
        loss_history: history,
    })
}

/// Analytic gradient of output-space SSE with respect to every `W_k`.
pub fn sse_gradient(net: &Network, x: &Matrix, y: &Matrix) -> Result<Vec<Matrix>> {
    check_shapes(net.spec().input_dim, net.spec().output_dim, x, y)?;
    let weights: Vec<DMatrix<f64>> = net.weights().iter().map(|w| w.as_dmatrix().clone()).collect();
    let (_, grads) = loss_and_gradient(&weights, net.activation(), x.as_dmatrix(), y.as_dmatrix());
    grads.into_iter().map(Matrix::from_dmatrix).collect()
}

/// Largest relative discrepancy between the backprop gradient and central
/// finite differences (step `1e-5`) over all weights.
///
/// Relative error is `|a − n| / max(|a|, |n|, 1e-6)`; the floor keeps
/// near-zero components from dominating through round-off.
pub fn check_gradient(net: &Network, x: &Matrix, y: &Matrix) -> Result<f64> {
    const STEP: f64 = 1e-5;
    let analytic = sse_gradient(net, x, y)?;
    let mut weights: Vec<DMatrix<f64>> = net.weights().iter().map(|w| w.as_dmatrix().clone()).collect();
    let pair = *net.activation();
    let (xd, yd) = (x.as_dmatrix(), y.as_dmatrix());

    let mut worst = 0.0f64;
    for k in 0..weights.len() {
        for idx in 0..weights[k].len() {
            let original = weights[k][idx];
            weights[k][idx] = original + STEP;
            let plus = loss(&weights, &pair, xd, yd);
            weights[k][idx] = original - STEP;
            let minus = loss(&weights, &pair, xd, yd);
            weights[k][idx] = original;
            let numeric = (plus - minus) / (2.0 * STEP);
            let a = analytic[k].as_dmatrix()[idx];
            let denom = a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

/// Random network whose pre-activations stay inside 0.5 ± 0.4 for inputs in
/// `[0, 1]`, so no unit touches the clamp and finite differences see the same
/// slope as the analytic derivative.
///
/// Bias entries are 0.5; node weights are centered draws rescaled to at most
/// `0.4 / (fan_in · bound)` in magnitude, where `bound` is 1 for the input
/// layer and 3 for hidden outputs (`|logit(z)| < 2.2` on that band).
pub fn unsaturated_network(spec: &NetworkSpec) -> Result<Network> {
    let net = random_init(&spec.clone().with_init(InitScheme::Centered))?;
    let weights = net
        .weights()
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let fan_in = (w.rows() - 1) as f64;
            let input_bound = if k == 0 { 1.0 } else { 3.0 };
            let limit = 0.4 / (fan_in * input_bound);
            let half_width = 0.5 / fan_in.sqrt();
            Matrix::from_fn(w.rows(), w.cols(), |r, c| {
                if r == 0 { 0.5 } else { w.get(r, c) / half_width * limit }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Network::new(net.spec().clone(), weights)
}

fn check_shapes(d: usize, q: usize, x: &Matrix, y: &Matrix) -> Result<()> {
    if x.rows() != y.rows() || x.cols() != d || y.cols() != q {
        return Err(Error::dimension(
            "gradient descent",
            format!("x: m x {d}, y: m x {q}"),
            format!("x: {:?}, y: {:?}", x.shape(), y.shape()),
        ));
    }
    Ok(())
}

fn augment(h: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = h.shape();
    let mut out = DMatrix::from_element(rows, cols + 1, 1.0);
    out.columns_mut(1, cols).copy_from(h);
    out
}

fn loss(weights: &[DMatrix<f64>], pair: &crate::activation::ActivationPair, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let mut h = x.clone();
    for w in weights {
        h = (augment(&h) * w).map(|z| pair.f(z));
    }
    (h - y).norm_squared()
}

fn loss_and_gradient(
    weights: &[DMatrix<f64>],
    pair: &crate::activation::ActivationPair,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> (f64, Vec<DMatrix<f64>>) {
    // inputs[k] = [1, H_k], pre[k] = inputs[k] W_{k+1}
    let mut inputs = Vec::with_capacity(weights.len());
    let mut pre = Vec::with_capacity(weights.len());
    let mut h = x.clone();
    for w in weights {
        let a = augment(&h);
        let z = &a * w;
        h = z.map(|v| pair.f(v));
        inputs.push(a);
        pre.push(z);
    }
    let residual = &h - y;
    let loss = residual.norm_squared();

    let mut grads = vec![DMatrix::zeros(0, 0); weights.len()];
    let mut upstream = residual * 2.0;
    for k in (0..weights.len()).rev() {
        let dz = upstream.zip_map(&pre[k], |g, z| g * pair.f_prime(z));
        grads[k] = inputs[k].transpose() * &dz;
        if k > 0 {
            let node = weights[k].rows(1, weights[k].nrows() - 1);
            upstream = &dz * node.transpose();
        }
    }
    (loss, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_problem() -> (Matrix, Matrix) {
        let x = Matrix::from_rows(&[
            [0.1, 0.2],
            [0.2, 0.1],
            [0.15, 0.3],
            [0.3, 0.25],
            [0.25, 0.15],
            [0.7, 0.8],
            [0.8, 0.7],
            [0.75, 0.9],
            [0.9, 0.85],
            [0.85, 0.75],
        ])
        .unwrap();
        let y = Matrix::column_vector(&[0., 0., 0., 0., 0., 1., 1., 1., 1., 1.]).unwrap();
        (x, y)
    }

    fn centered(d: usize, hidden: Vec<usize>, q: usize, seed: u64) -> NetworkSpec {
        NetworkSpec::new(d, hidden, q, seed).with_init(InitScheme::Centered)
    }

    #[test]
    fn sse_strictly_decreases_early_on() {
        let (x, y) = small_problem();
        let mut cfg = GdConfig::new(centered(2, vec![3], 1, 5));
        cfg.learning_rate = 1e-3;
        cfg.max_iters = 10;
        cfg.sse_tolerance = 0.0;
        let fit = train_gd(&x, &y, &cfg).unwrap();
        assert_eq!(fit.report.iterations, Some(10));
        assert_eq!(fit.loss_history.len(), 11);
        for w in fit.loss_history.windows(2) {
            assert!(w[1] < w[0], "{:?}", fit.loss_history);
        }
    }

    #[test]
    fn zero_learning_rate_leaves_weights_alone() {
        let (x, y) = small_problem();
        let mut cfg = GdConfig::new(centered(2, vec![3], 1, 8));
        cfg.learning_rate = 0.0;
        cfg.max_iters = 25;
        let fit = train_gd(&x, &y, &cfg).unwrap();
        assert_eq!(fit.network, random_init(&cfg.spec).unwrap());
    }

    #[test]
    fn already_fitted_targets_stop_immediately() {
        let (x, _) = small_problem();
        let spec = centered(2, vec![3], 1, 2);
        let y = random_init(&spec).unwrap().forward(&x).unwrap();
        let fit = train_gd(&x, &y, &GdConfig::new(spec.clone())).unwrap();
        assert_eq!(fit.report.iterations, Some(0));
        assert_eq!(fit.report.train_sse, 0.0);
        assert_eq!(fit.network, random_init(&spec).unwrap());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = small_problem();
        for seed in 0..5 {
            let net = unsaturated_network(&NetworkSpec::new(2, vec![3, 2], 1, seed)).unwrap();
            let err = check_gradient(&net, &x, &y).unwrap();
            assert!(err <= 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn single_row_gradient_check() {
        let x = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        let y = Matrix::from_rows(&[[1.0]]).unwrap();
        let net = unsaturated_network(&NetworkSpec::new(2, vec![2], 1, 3)).unwrap();
        assert!(check_gradient(&net, &x, &y).unwrap() <= 1e-4);
    }

    #[test]
    fn gradient_vanishes_at_exact_fit() {
        let (x, _) = small_problem();
        let net = random_init(&centered(2, vec![4], 2, 6)).unwrap();
        let y = net.forward(&x).unwrap();
        let norm: f64 = sse_gradient(&net, &x, &y)
            .unwrap()
            .iter()
            .map(|g| g.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(norm <= 1e-8);
    }

    #[test]
    fn rejects_bad_config() {
        let (x, y) = small_problem();
        let mut cfg = GdConfig::new(centered(2, vec![3], 1, 0));
        cfg.max_iters = 0;
        assert!(matches!(train_gd(&x, &y, &cfg), Err(Error::Config(_))));
        cfg.max_iters = 1;
        cfg.learning_rate = -1.0;
        assert!(matches!(train_gd(&x, &y, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn huge_rate_without_clip_reports_divergence_or_finishes_finite() {
        let (x, y) = small_problem();
        let mut cfg = GdConfig::new(centered(2, vec![3], 1, 0));
        cfg.learning_rate = 1e300;
        cfg.gradient_clip = None;
        cfg.max_iters = 50;
        cfg.sse_tolerance = 0.0;
        match train_gd(&x, &y, &cfg) {
            Err(Error::Diverged { .. }) => {}
            Ok(fit) => assert!(fit.report.train_sse.is_finite()),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
