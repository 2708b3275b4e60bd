//! Analytic, gradient-free training of fully-connected feedforward networks.
//!
//! Each layer's weights come from a least-squares solve against a target
//! pulled back through the invertible activation, so a network of any depth
//! is trained in a single pass of pseudoinverse computations. A small
//! gradient-descent trainer over the same model is included for comparison,
//! together with the data handling and experiment runners used to evaluate
//! both.
//!
//! ```
//! use karnet_core::{data, kar, NetworkSpec};
//!
//! let xor = data::make_xor(true);
//! let cfg = kar::KarConfig::new(NetworkSpec::new(2, vec![2], 1, 0));
//! let fit = kar::train(&xor.x, &xor.y, &cfg).unwrap();
//! assert!(fit.report.train_sse.is_finite());
//! ```

pub mod activation;
pub mod baseline;
pub mod data;
pub mod error;
pub mod experiment;
pub mod kar;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod report;

pub use activation::{ActivationKind, ActivationPair};
pub use data::{Dataset, FoldPlan, Scaling};
pub use error::{Error, ErrorCategory, Result};
pub use linalg::{pinv, solve_least_squares, sse, Matrix, PinvResult};
pub use network::{random_init, InitScheme, Network, NetworkSpec};
pub use report::{SolveTally, TrainReport};
