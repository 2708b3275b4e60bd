//! Invertible activation pairs `(f, φ)` applied elementwise.
//!
//! `f` is the layer activation and `φ` its inverse, used to pull targets back
//! through a layer. Inputs to `f` and outputs of `φ` are clamped to
//! `[lo + ε, hi − ε]` so that both sides stay finite at the domain edges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DEFAULT_CLAMP_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivationKind {
    /// `f(x) = ln(x / (1 − x))` on `(0, 1)`, `φ(y) = 1 / (1 + e^{−y})`.
    #[serde(rename = "logit-sigmoid")]
    LogitSigmoid,
}

impl ActivationKind {
    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::LogitSigmoid => "logit-sigmoid",
        }
    }

    pub fn pair(self) -> ActivationPair {
        ActivationPair::new(self, DEFAULT_CLAMP_EPSILON)
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logit-sigmoid" | "logit" => Ok(ActivationKind::LogitSigmoid),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationPair {
    kind: ActivationKind,
    lo: f64,
    hi: f64,
    epsilon: f64,
}

impl ActivationPair {
    pub fn new(kind: ActivationKind, epsilon: f64) -> Self {
        let (lo, hi) = match kind {
            ActivationKind::LogitSigmoid => (0.0, 1.0),
        };
        assert!(
            epsilon > 0.0 && 2.0 * epsilon < hi - lo,
            "clamp epsilon {epsilon} does not fit the domain ({lo}, {hi})"
        );
        Self { kind, lo, hi, epsilon }
    }

    pub fn logit_sigmoid() -> Self {
        ActivationKind::LogitSigmoid.pair()
    }

    pub fn kind(&self) -> ActivationKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// The open forward domain `(lo, hi)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Clamps into `[lo + ε, hi − ε]`.
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo + self.epsilon, self.hi - self.epsilon)
    }

    pub fn f(&self, x: f64) -> f64 {
        let x = self.clamp(x);
        match self.kind {
            ActivationKind::LogitSigmoid => (x / (1.0 - x)).ln(),
        }
    }

    pub fn phi(&self, y: f64) -> f64 {
        let v = match self.kind {
            ActivationKind::LogitSigmoid => 1.0 / (1.0 + (-y).exp()),
        };
        self.clamp(v)
    }

    /// Derivative of `f` evaluated at the clamped input.
    pub fn f_prime(&self, x: f64) -> f64 {
        let x = self.clamp(x);
        match self.kind {
            ActivationKind::LogitSigmoid => 1.0 / (x * (1.0 - x)),
        }
    }

    pub fn apply_f(&self, m: &Matrix) -> Matrix {
        m.map(|x| self.f(x))
            .expect("clamped activation output is finite")
    }

    pub fn apply_phi(&self, m: &Matrix) -> Matrix {
        m.map(|y| self.phi(y))
            .expect("clamped transform output is finite")
    }
}

impl Default for ActivationPair {
    fn default() -> Self {
        Self::logit_sigmoid()
    }
}
