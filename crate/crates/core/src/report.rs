use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{residual_sse, Matrix};
use crate::metrics::{classify, error_rate};
use crate::network::{Network, NetworkSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveTally {
    /// Least-squares solves that produced a weight matrix (one per layer).
    pub weight_solves: usize,
    /// Pseudoinverses of node-weight blocks taken while peeling the target
    /// back to the first layer.
    pub peel_inverses: usize,
}

/// Summary of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub trainer: String,
    pub spec: NetworkSpec,
    pub seed: u64,
    /// SSE between network output and target.
    pub train_sse: f64,
    /// SSE between the last layer's pre-activation and `φ(Y)`.
    pub train_sse_transformed: f64,
    pub train_error_rate: f64,
    pub weight_norms: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solves: Option<SolveTally>,
    pub wall_time_secs: f64,
}

impl TrainReport {
    pub(crate) fn measure(
        trainer: &str,
        net: &Network,
        x: &Matrix,
        y: &Matrix,
        wall_time_secs: f64,
    ) -> Result<Self> {
        let outputs = net.forward(x)?;
        let pre = net.output_preactivation(x)?;
        let target_t = net.activation().apply_phi(y);
        Ok(Self {
            trainer: trainer.to_owned(),
            spec: net.spec().clone(),
            seed: net.spec().seed,
            train_sse: residual_sse(&outputs, y)?,
            train_sse_transformed: residual_sse(&pre, &target_t)?,
            train_error_rate: error_rate(&classify(&outputs), &classify(y)),
            weight_norms: net.weight_norms(),
            iterations: None,
            solves: None,
            wall_time_secs,
        })
    }
}
