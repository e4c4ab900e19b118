//! Capacity measurement for perceptron networks.
//!
//! Two halves live in this crate:
//!
//! - exact theory: threshold-function counts ([`counting`]), parameter
//!   counting and the lossless-memory / MacKay bounds ([`theory`]);
//! - measurement: a small feed-forward classifier ([`mlp`]) trained with
//!   L-BFGS ([`optim`]) inside a shattering protocol ([`harness`]), with an
//!   LP-based linear separability oracle ([`oracle`]) as ground truth for
//!   single perceptrons.
//!
//! [`report`] holds the serializable outputs shared with the command-line
//! front end.

pub mod counting;
pub mod data;
pub mod error;
pub mod harness;
pub mod mlp;
pub mod optim;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod theory;

pub use counting::{BigCount, CurvePoint};
pub use data::Dataset;
pub use error::{Error, Result};
pub use harness::{CapacityMeasurement, HarnessConfig, MeasureKind};
pub use mlp::{Activation, LabeledSet, Params};
pub use optim::{OptimizeResult, OptimizerConfig, Termination};
pub use theory::{ArchitectureSpec, CapacityBounds};
