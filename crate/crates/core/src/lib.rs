//! Approximation algorithms for the (weighted) tree augmentation problem:
//! exact rational LPs, k-wide decomposition and rounding, and the harness
//! that drives them.

pub mod config;
pub mod decompose;
pub mod error;
pub mod exact;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod rounding;
pub mod scalar;
pub mod weighted;

pub use config::Limits;
pub use error::{Result, TapError};
pub use instance::{EdgeId, EdgeSet, Link, LinkId, LinkSet, TapInstance, Tree, Vertex};
pub use scalar::{Radical, Rational, Scalar};

/// LP models over exact rationals, the scalar the pipeline runs on.
pub type ExactLp = lp::LpModel<Rational>;
/// Floating-point models, for quick experiments.
pub type FloatLp = lp::LpModel<f64>;
