//! Statevector simulation and training of small variational quantum circuits.
//!
//! The simulator core ([`state`], [`gates`], [`circuit`], [`gradient`]) is
//! generic over the real scalar type; the aliases below fix it to `f64` or
//! `f32`. Encoders, classical baselines and the XOR experiment run in `f64`.

pub mod circuit;
pub mod classical;
pub mod encoders;
pub mod error;
pub mod gates;
pub mod gradient;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod text;
pub mod xor;

pub use circuit::{Angle, Circuit, CircuitBuilder, GateKind, GateOp, ShotResult};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type StateVector = state::StateVector<f64>;
pub type StateVector32 = state::StateVector<f32>;
pub type HermitianObservable = state::HermitianObservable<f64>;
pub type HermitianObservable32 = state::HermitianObservable<f32>;
pub type GateMatrix = gates::GateMatrix<f64>;
pub type GateMatrix32 = gates::GateMatrix<f32>;
pub type CMatrix = linalg::CMatrix<f64>;
pub type CMatrix32 = linalg::CMatrix<f32>;
pub type ZyzDecomposition = gates::ZyzDecomposition<f64>;
pub type GradientEstimate = gradient::GradientEstimate<f64>;
pub type GeneratorPair = gradient::stochastic::GeneratorPair<f64>;
