//! Fully-connected feedforward networks with a leading bias row per layer.
//!
//! Layer `k` maps an `m x h_{k-1}` activation matrix `H` to `f([1, H] W_k)`,
//! where `W_k` is `(h_{k-1} + 1) x h_k`. The first row of every `W_k` holds
//! the bias weights and the remaining rows the node weights.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ActivationPair};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// How `random_init` draws weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Every entry i.i.d. uniform on (0, 1).
    #[default]
    Uniform01,
    /// Bias row fixed at 0.5, node weights uniform on `±0.5 / sqrt(fan_in)`.
    /// Keeps pre-activations near the middle of the logit domain, which random
    /// (unsolved) hidden layers need to stay full rank.
    Centered,
}

impl std::str::FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform01" => Ok(InitScheme::Uniform01),
            "centered" => Ok(InitScheme::Centered),
            other => Err(Error::Config(format!("unknown init scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub activation: ActivationKind,
    pub seed: u64,
    #[serde(default)]
    pub init: InitScheme,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize, seed: u64) -> Self {
        Self {
            input_dim,
            hidden,
            output_dim,
            activation: ActivationKind::LogitSigmoid,
            seed,
            init: InitScheme::default(),
        }
    }

    pub fn with_init(mut self, init: InitScheme) -> Self {
        self.init = init;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of weight layers `n` (hidden layers + output layer).
    pub fn layer_count(&self) -> usize {
        self.hidden.len() + 1
    }

    /// `[d, h_1, …, h_{n-1}, q]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(self.output_dim);
        sizes
    }

    /// Shape of `W_k` for each layer, 0-based.
    pub fn weight_shapes(&self) -> Vec<(usize, usize)> {
        self.layer_sizes().windows(2).map(|w| (w[0] + 1, w[1])).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes().contains(&0) {
            return Err(Error::Config(format!(
                "all layer sizes must be >= 1, got {:?}",
                self.layer_sizes()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    activation: ActivationPair,
    weights: Vec<Matrix>,
}

impl Network {
    pub fn new(spec: NetworkSpec, weights: Vec<Matrix>) -> Result<Self> {
        spec.validate()?;
        let shapes = spec.weight_shapes();
        if shapes.len() != weights.len() {
            return Err(Error::dimension(
                "Network::new",
                format!("{} weight matrices", shapes.len()),
                format!("{}", weights.len()),
            ));
        }
        for (k, (w, expected)) in weights.iter().zip(&shapes).enumerate() {
            if w.shape() != *expected {
                return Err(Error::dimension(
                    "Network::new",
                    format!("W{} of shape {:?}", k + 1, expected),
                    format!("{:?}", w.shape()),
                ));
            }
        }
        Ok(Self {
            activation: spec.activation.pair(),
            spec,
            weights,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn activation(&self) -> &ActivationPair {
        &self.activation
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    /// Replaces `W_{index+1}`; the shape must not change.
    pub fn set_weights(&mut self, index: usize, w: Matrix) -> Result<()> {
        let current = &self.weights[index];
        if current.shape() != w.shape() {
            return Err(Error::dimension(
                "Network::set_weights",
                format!("{:?}", current.shape()),
                format!("{:?}", w.shape()),
            ));
        }
        self.weights[index] = w;
        Ok(())
    }

    pub fn weight_count(&self) -> usize {
        self.weights.iter().map(|w| w.rows() * w.cols()).sum()
    }

    pub fn weight_norms(&self) -> Vec<f64> {
        self.weights.iter().map(Matrix::frobenius_norm).collect()
    }

    /// Network output `G` (`m x q`) for raw inputs `x` (`m x d`).
    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_trace(x)?.pop().expect("at least one layer"))
    }

    /// Pre-activation of the last layer, `[1, H_{n-1}] W_n`.
    pub fn output_preactivation(&self, x: &Matrix) -> Result<Matrix> {
        let n = self.weights.len();
        let input = if n == 1 {
            x.clone()
        } else {
            self.forward_trace_upto(x, n - 1)?.pop().expect("non-empty")
        };
        input.with_ones_column().matmul(&self.weights[n - 1])
    }

    /// Outputs of every layer, `[H_1, …, H_n]`.
    pub fn forward_trace(&self, x: &Matrix) -> Result<Vec<Matrix>> {
        self.forward_trace_upto(x, self.weights.len())
    }

    fn forward_trace_upto(&self, x: &Matrix, layers: usize) -> Result<Vec<Matrix>> {
        if x.cols() != self.spec.input_dim {
            return Err(Error::dimension(
                "Network::forward",
                format!("{} input columns", self.spec.input_dim),
                format!("{}", x.cols()),
            ));
        }
        let mut outputs = Vec::with_capacity(layers);
        let mut h = x.clone();
        for w in &self.weights[..layers] {
            h = self.activation.apply_f(&h.with_ones_column().matmul(w)?);
            outputs.push(h.clone());
        }
        Ok(outputs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&WeightFile::from(self)).expect("weight file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightFile =
            serde_json::from_str(text).map_err(|e| Error::WeightFile(e.to_string()))?;
        file.into_network()
    }
}

/// Draws every `W_k` from a ChaCha8 stream seeded by `spec.seed`, layer by
/// layer in row-major order.
pub fn random_init(spec: &NetworkSpec) -> Result<Network> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = spec
        .weight_shapes()
        .into_iter()
        .map(|(rows, cols)| draw_weights(&mut rng, spec.init, rows, cols))
        .collect::<Result<Vec<_>>>()?;
    Network::new(spec.clone(), weights)
}

fn draw_weights(rng: &mut ChaCha8Rng, init: InitScheme, rows: usize, cols: usize) -> Result<Matrix> {
    let mut data = Vec::with_capacity(rows * cols);
    match init {
        InitScheme::Uniform01 => {
            for _ in 0..rows * cols {
                data.push(open_unit(rng));
            }
        }
        InitScheme::Centered => {
            let fan_in = (rows - 1).max(1) as f64;
            let half_width = 0.5 / fan_in.sqrt();
            data.extend(std::iter::repeat_n(0.5, cols));
            for _ in cols..rows * cols {
                data.push(half_width * (2.0 * open_unit(rng) - 1.0));
            }
        }
    }
    Matrix::new(rows, cols, data)
}

/// Uniform on the open interval (0, 1).
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.gen();
        if v > 0.0 {
            return v;
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightFile {
    format: String,
    spec: NetworkSpec,
    layers: Vec<LayerWeights>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerWeights {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

const WEIGHT_FORMAT: &str = "karnet-weights/1";

impl From<&Network> for WeightFile {
    fn from(net: &Network) -> Self {
        WeightFile {
            format: WEIGHT_FORMAT.to_owned(),
            spec: net.spec.clone(),
            layers: net
                .weights
                .iter()
                .map(|w| LayerWeights {
                    rows: w.rows(),
                    cols: w.cols(),
                    values: w.to_row_major(),
                })
                .collect(),
        }
    }
}

impl WeightFile {
    fn into_network(self) -> Result<Network> {
        if self.format != WEIGHT_FORMAT {
            return Err(Error::WeightFile(format!("unsupported format {:?}", self.format)));
        }
        let weights = self
            .layers
            .into_iter()
            .map(|l| Matrix::new(l.rows, l.cols, l.values))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::WeightFile(e.to_string()))?;
        Network::new(self.spec, weights).map_err(|e| Error::WeightFile(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pinv;
    use proptest::prelude::*;

    #[test]
    fn shapes_follow_bias_augmentation() {
        let net = random_init(&NetworkSpec::new(4, vec![90], 3, 1)).unwrap();
        assert_eq!(net.weights()[0].shape(), (5, 90));
        assert_eq!(net.weights()[1].shape(), (91, 3));
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let spec = NetworkSpec::new(2, vec![3, 3], 1, 42);
        let a = random_init(&spec).unwrap();
        let b = random_init(&spec).unwrap();
        assert_eq!(a, b);
        let c = random_init(&spec.clone().with_seed(43)).unwrap();
        assert_ne!(a.weights()[0], c.weights()[0]);
    }

    #[test]
    fn uniform_init_is_inside_unit_interval() {
        let net = random_init(&NetworkSpec::new(3, vec![20], 2, 7)).unwrap();
        for w in net.weights() {
            assert!(w.iter().all(|v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn centered_init_fixes_bias_row() {
        let spec = NetworkSpec::new(4, vec![16], 2, 3).with_init(InitScheme::Centered);
        let net = random_init(&spec).unwrap();
        let w1 = &net.weights()[0];
        assert!(w1.row(0).iter().all(|&v| v == 0.5));
        assert!((1..5).all(|r| w1.row(r).iter().all(|v| v.abs() <= 0.25)));
    }

    #[test]
    fn zero_weights_give_constant_output() {
        let spec = NetworkSpec::new(2, vec![3], 2, 0);
        let weights = spec
            .weight_shapes()
            .into_iter()
            .map(|(r, c)| Matrix::zeros(r, c).unwrap())
            .collect();
        let net = Network::new(spec, weights).unwrap();
        let x = Matrix::from_rows(&[[0.1, 0.2], [0.9, 0.4], [0.5, 0.5]]).unwrap();
        let g = net.forward(&x).unwrap();
        let pair = net.activation();
        let expected = pair.f(0.0);
        assert!(g.iter().all(|v| v == expected));
        assert_eq!(expected, (pair.epsilon() / (1.0 - pair.epsilon())).ln());
    }

    #[test]
    fn exact_single_layer_solution_reproduces_targets() {
        // A = [1, X] is 3x3 and invertible, so W = A⁻¹ φ(Y) reproduces Y.
        let x = Matrix::from_rows(&[[0.1, 0.7], [0.8, 0.2], [0.4, 0.9]]).unwrap();
        let y = Matrix::from_rows(&[[0.2, 1.3], [-0.5, 0.4], [0.9, -1.1]]).unwrap();
        let spec = NetworkSpec::new(2, vec![], 2, 0);
        let pair = spec.activation.pair();
        let w = pinv(&x.with_ones_column(), None)
            .unwrap()
            .pinv
            .matmul(&pair.apply_phi(&y))
            .unwrap();
        let net = Network::new(spec, vec![w]).unwrap();
        assert!(net.forward(&x).unwrap().max_abs_diff(&y) < 1e-6);
    }

    #[test]
    fn forward_rejects_wrong_input_width() {
        let net = random_init(&NetworkSpec::new(4, vec![5], 3, 0)).unwrap();
        let err = net.forward(&Matrix::zeros(2, 3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn network_new_checks_shapes() {
        let spec = NetworkSpec::new(2, vec![3], 1, 0);
        let bad = vec![Matrix::zeros(3, 3).unwrap(), Matrix::zeros(3, 1).unwrap()];
        assert!(Network::new(spec, bad).is_err());
        assert!(NetworkSpec::new(2, vec![0], 1, 0).validate().is_err());
    }

    #[test]
    fn weight_file_roundtrips_bit_exactly() {
        let net = random_init(&NetworkSpec::new(3, vec![4, 2], 2, 9)).unwrap();
        let back = Network::from_json(&net.to_json()).unwrap();
        for (a, b) in net.weights().iter().zip(back.weights()) {
            let bits_a: Vec<u64> = a.iter().map(f64::to_bits).collect();
            let bits_b: Vec<u64> = b.iter().map(f64::to_bits).collect();
            assert_eq!(bits_a, bits_b);
        }
        assert_eq!(net.spec(), back.spec());
    }

    #[test]
    fn weight_file_rejects_garbage() {
        assert!(matches!(Network::from_json("{}"), Err(Error::WeightFile(_))));
        let mut v: serde_json::Value =
            serde_json::from_str(&random_init(&NetworkSpec::new(1, vec![], 1, 0)).unwrap().to_json()).unwrap();
        v["layers"][0]["rows"] = 5.into();
        assert!(Network::from_json(&v.to_string()).is_err());
    }

    proptest! {
        #[test]
        fn forward_shape_is_m_by_q(
            d in 1usize..6,
            hidden in proptest::collection::vec(1usize..6, 0..4),
            q in 1usize..4,
            m in 1usize..8,
            seed in any::<u64>(),
        ) {
            let net = random_init(&NetworkSpec::new(d, hidden, q, seed)).unwrap();
            let x = Matrix::from_fn(m, d, |r, c| ((r * 7 + c * 3) % 10) as f64 / 10.0).unwrap();
            let g = net.forward(&x).unwrap();
            prop_assert_eq!(g.shape(), (m, q));
            prop_assert_eq!(g, net.forward(&x).unwrap());
        }
    }
}
