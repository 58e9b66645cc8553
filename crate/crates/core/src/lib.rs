//! Real and complex diagonal state space models.
//!
//! Single-input single-output systems `x(t) = a ⊙ x(t-1) + b u(t)`,
//! `y(t) = Re(c · x(t))`, together with exact constructors, lower bounds on
//! the parameter magnitudes a real system needs to approximate a target,
//! quantization-robustness estimates and a gradient-descent trainer.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod constructors;
pub mod error;
pub mod linalg;
pub mod quantization;
pub mod rng;
pub mod series;
pub mod ssm;
pub mod targets;
pub mod training;

pub use num_complex::Complex64;

pub use bounds::{BoundConvention, BoundQuery, BoundReport, Parity};
pub use constructors::{construct_complex_dft, construct_real_vandermonde, ConstructionResult};
pub use error::{Result, SsmError};
pub use quantization::{QuantizationReport, QuantizationSpec, RobustnessEstimate};
pub use series::{approximation_error, convolve_truncated, ScalarSeries};
pub use ssm::{bilinear_discretize, DiagonalSsm, Mode, StateTrace};
pub use targets::{normalized_error, TargetKind, TargetSpec};
pub use training::{TrainConfig, TrainTrace};
