//! The single-neuron XOR classifier and its hybrid training loop.
//!
//! Two circuits are available:
//!
//! * `Original`: one qubit, `H`, `RZ(θ₁x₁ + α)`, `RX(θ₂x₂ + α)`.
//! * `Modified`: three qubits. The inputs are angle-encoded with `RX(π·xᵢ)` on
//!   qubits 1 and 2; the readout qubit 0 gets `H`, `CRZ(θ₁)` controlled by
//!   qubit 1, `RZ(α₁)`, `CRX(θ₂)` controlled by qubit 2 and `RX(α₂)`.
//!
//! Both read `⟨Z⟩` on qubit 0; `⟨Z⟩ ≥ 0` is class 0.

use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::circuit::{exact_expectation, sample_expectation, Circuit, CircuitBuilder, GateKind};
use crate::error::{Error, Result};
use crate::gradient::{sampled_shift_gradient, shift_gradient_with};
use crate::rng::{rng_from_seed, subseed, subseed_path};
use crate::state::{HermitianObservable, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XorVariant {
    Original,
    Modified,
}

impl XorVariant {
    pub fn name(self) -> &'static str {
        match self {
            XorVariant::Original => "original",
            XorVariant::Modified => "modified",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "original" => Some(XorVariant::Original),
            "modified" => Some(XorVariant::Modified),
            _ => None,
        }
    }

    /// Number of independent trainable parameters.
    pub fn num_params(self) -> usize {
        match self {
            XorVariant::Original => 3,
            XorVariant::Modified => 4,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            XorVariant::Original => 1,
            XorVariant::Modified => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XorSample {
    pub x1: f64,
    pub x2: f64,
    pub label: u8,
}

/// Class 0 when both coordinates sit on the same side of 0.5.
pub fn xor_label(x1: f64, x2: f64) -> u8 {
    u8::from((x1 > 0.5) != (x2 > 0.5))
}

impl XorSample {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self {
            x1,
            x2,
            label: xor_label(x1, x2),
        }
    }

    /// `+1` for class 0, `−1` for class 1: the `Z` eigenvalue of the target state.
    pub fn target(&self) -> f64 {
        if self.label == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XorDataset {
    pub train: Vec<XorSample>,
    pub validation: Vec<XorSample>,
    pub test: Vec<XorSample>,
}

impl XorDataset {
    pub fn all(&self) -> impl Iterator<Item = &XorSample> {
        self.train.iter().chain(&self.validation).chain(&self.test)
    }
}

/// Train / validation / test sizes in the proportions 750 : 63 : 187.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = (n as f64 * 0.75).round() as usize;
    let val = (n as f64 * 0.063).round() as usize;
    (train, val, n - train - val)
}

/// Uniform points in the open unit square. Coordinates within 1e-9 of the
/// class boundary 0.5 are redrawn.
pub fn generate_xor_dataset(n: usize, seed: u64) -> Result<XorDataset> {
    if n < 10 {
        return Err(Error::InvalidInput(format!("need at least 10 samples, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut coord = || loop {
        let v: f64 = rng.random();
        if v > 0.0 && (v - 0.5).abs() > 1e-9 {
            break v;
        }
    };
    let samples: Vec<XorSample> = (0..n)
        .map(|_| {
            let x1 = coord();
            let x2 = coord();
            XorSample::new(x1, x2)
        })
        .collect();
    let (a, b, _) = split_sizes(n);
    Ok(XorDataset {
        train: samples[..a].to_vec(),
        validation: samples[a..a + b].to_vec(),
        test: samples[a + b..].to_vec(),
    })
}

/// Trainable angles. For the original circuit `alpha1 == alpha2` is the single
/// shared offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XorModel {
    pub variant: XorVariant,
    pub theta1: f64,
    pub theta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl XorModel {
    pub fn original(theta1: f64, theta2: f64, alpha: f64) -> Self {
        Self {
            variant: XorVariant::Original,
            theta1,
            theta2,
            alpha1: alpha,
            alpha2: alpha,
        }
    }

    pub fn modified(theta1: f64, theta2: f64, alpha1: f64, alpha2: f64) -> Self {
        Self {
            variant: XorVariant::Modified,
            theta1,
            theta2,
            alpha1,
            alpha2,
        }
    }

    /// The independent parameters: `[θ₁, θ₂, α]` or `[θ₁, θ₂, α₁, α₂]`.
    pub fn trainable(&self) -> Vec<f64> {
        match self.variant {
            XorVariant::Original => vec![self.theta1, self.theta2, self.alpha1],
            XorVariant::Modified => vec![self.theta1, self.theta2, self.alpha1, self.alpha2],
        }
    }

    pub fn from_trainable(variant: XorVariant, p: &[f64]) -> Result<Self> {
        if p.len() != variant.num_params() {
            return Err(Error::DimensionMismatch {
                expected: variant.num_params(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite XOR parameter".into()));
        }
        Ok(match variant {
            XorVariant::Original => Self::original(p[0], p[1], p[2]),
            XorVariant::Modified => Self::modified(p[0], p[1], p[2], p[3]),
        })
    }

    /// `[θ₁, θ₂, α₁, α₂]` for either variant.
    pub fn all_four(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.alpha1, self.alpha2]
    }
}

/// `H, RZ(θ₁x₁ + α), RX(θ₂x₂ + α)` with literal angles.
pub fn build_original_xor_circuit(model: &XorModel, x1: f64, x2: f64) -> Result<Circuit> {
    let [t1, t2, a, _] = model.all_four();
    CircuitBuilder::new(1)
        .fixed(GateKind::H, &[0])?
        .rotation(GateKind::RZ, &[0], t1 * x1 + a)?
        .rotation(GateKind::RX, &[0], t2 * x2 + a)?
        .build()
}

/// The original circuit with its two gate angles as slots `$0` (Z) and `$1` (X).
pub fn original_gate_template() -> Circuit {
    CircuitBuilder::new(1)
        .fixed(GateKind::H, &[0])
        .and_then(|b| b.slot(GateKind::RZ, &[0], 0))
        .and_then(|b| b.slot(GateKind::RX, &[0], 1))
        .and_then(|b| b.build())
        .expect("static circuit")
}

fn original_gate_angles(p: &[f64], x1: f64, x2: f64) -> [f64; 2] {
    [p[0] * x1 + p[2], p[1] * x2 + p[2]]
}

fn modified_builder(x1: f64, x2: f64) -> Result<CircuitBuilder> {
    CircuitBuilder::new(3)
        .rotation(GateKind::RX, &[1], PI * x1)?
        .rotation(GateKind::RX, &[2], PI * x2)?
        .fixed(GateKind::H, &[0])
}

/// The modified circuit for one input with `θ₁, θ₂, α₁, α₂` in slots `$0..$3`.
pub fn modified_template(x1: f64, x2: f64) -> Result<Circuit> {
    modified_builder(x1, x2)?
        .slot(GateKind::CRZ, &[1, 0], 0)?
        .slot(GateKind::RZ, &[0], 2)?
        .slot(GateKind::CRX, &[2, 0], 1)?
        .slot(GateKind::RX, &[0], 3)?
        .build()
}

/// The modified circuit with every angle literal.
pub fn build_modified_xor_circuit(model: &XorModel, x1: f64, x2: f64) -> Result<Circuit> {
    let [t1, t2, a1, a2] = model.all_four();
    modified_builder(x1, x2)?
        .rotation(GateKind::CRZ, &[1, 0], t1)?
        .rotation(GateKind::RZ, &[0], a1)?
        .rotation(GateKind::CRX, &[2, 0], t2)?
        .rotation(GateKind::RX, &[0], a2)?
        .build()
}

/// The model's circuit for one input, literal angles.
pub fn build_xor_circuit(model: &XorModel, x1: f64, x2: f64) -> Result<Circuit> {
    match model.variant {
        XorVariant::Original => build_original_xor_circuit(model, x1, x2),
        XorVariant::Modified => build_modified_xor_circuit(model, x1, x2),
    }
}

fn readout(variant: XorVariant) -> HermitianObservable<f64> {
    HermitianObservable::pauli_z(variant.num_qubits(), 0).expect("qubit 0 exists")
}

/// Output state of the model's circuit from `|0…0⟩`.
pub fn xor_output_state(model: &XorModel, x1: f64, x2: f64) -> Result<StateVector<f64>> {
    let c = build_xor_circuit(model, x1, x2)?;
    crate::circuit::apply(&c, &[], &StateVector::zero(c.num_qubits()))
}

/// `⟨Z⟩` on the readout qubit.
pub fn xor_expectation(model: &XorModel, x1: f64, x2: f64) -> Result<f64> {
    let c = build_xor_circuit(model, x1, x2)?;
    exact_expectation(&c, &[], &StateVector::zero(c.num_qubits()), &readout(model.variant))
}

/// Class 0 for `⟨Z⟩ ≥ 0`, class 1 otherwise.
pub fn classify_expectation(z: f64) -> u8 {
    u8::from(z < 0.0)
}

pub fn classify(model: &XorModel, x1: f64, x2: f64) -> Result<u8> {
    Ok(classify_expectation(xor_expectation(model, x1, x2)?))
}

pub fn accuracy(model: &XorModel, samples: &[XorSample]) -> Result<f64> {
    let hits = samples
        .par_iter()
        .map(|s| Ok(u8::from(classify(model, s.x1, s.x2)? == s.label)))
        .collect::<Result<Vec<u8>>>()?;
    Ok(hits.iter().map(|&h| f64::from(h)).sum::<f64>() / samples.len().max(1) as f64)
}

/// `⟨Z⟩` and its gradient with respect to the trainable parameters, for one
/// sample. With `shots`, every expectation is a finite-sample estimate.
pub fn expectation_and_gradient(
    variant: XorVariant,
    p: &[f64],
    x1: f64,
    x2: f64,
    shift: f64,
    shots: Option<(u64, u64)>,
) -> Result<(f64, Vec<f64>)> {
    let (circuit, params) = match variant {
        XorVariant::Original => (original_gate_template(), original_gate_angles(p, x1, x2).to_vec()),
        XorVariant::Modified => (modified_template(x1, x2)?, p.to_vec()),
    };
    let psi = StateVector::zero(circuit.num_qubits());
    let (z, g) = match shots {
        None => {
            let obs = readout(variant);
            let z = exact_expectation(&circuit, &params, &psi, &obs)?;
            (z, shift_gradient_with(&circuit, &params, &psi, &obs, shift)?.values)
        }
        Some((n, seed)) => {
            let z = sample_expectation(&circuit, &params, &psi, 0, n, subseed(seed, 0))?
                .empirical_expectation;
            let g = sampled_shift_gradient(&circuit, &params, &psi, 0, shift, n, subseed(seed, 1))?;
            (z, g.values)
        }
    };
    let grad = match variant {
        // Chain rule from the two gate angles back to θ₁, θ₂, α.
        XorVariant::Original => vec![x1 * g[0], x2 * g[1], g[0] + g[1]],
        XorVariant::Modified => g,
    };
    Ok((z, grad))
}

/// Per-sample loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XorLoss {
    /// `(y − ⟨Z⟩)²`.
    Mse,
    /// `½(y − ⟨Z⟩)²`.
    HalfMse,
}

impl XorLoss {
    pub fn name(self) -> &'static str {
        match self {
            XorLoss::Mse => "mse",
            XorLoss::HalfMse => "half-mse",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mse" => Some(XorLoss::Mse),
            "half-mse" => Some(XorLoss::HalfMse),
            _ => None,
        }
    }

    fn scale(self) -> f64 {
        match self {
            XorLoss::Mse => 1.0,
            XorLoss::HalfMse => 0.5,
        }
    }

    /// Loss of one sample with residual `r = y − ⟨Z⟩`.
    pub fn value(self, r: f64) -> f64 {
        self.scale() * r * r
    }

    /// `∂loss/∂⟨Z⟩`.
    pub fn slope(self, r: f64) -> f64 {
        -2.0 * self.scale() * r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub variant: XorVariant,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Parameter-shift distance.
    pub shift: f64,
    pub seed: u64,
    pub loss: XorLoss,
    /// Estimate expectations from this many shots instead of exactly.
    pub shots: Option<u64>,
    /// Fraction of (batch, parameter) pairs whose gradient is cross-checked
    /// against central differences of the batch loss. Exact mode only.
    pub audit_fraction: f64,
}

impl TrainConfig {
    pub fn new(variant: XorVariant, seed: u64) -> Self {
        Self {
            variant,
            epochs: 150,
            batch_size: 25,
            learning_rate: 0.025,
            shift: PI / 2.0,
            seed,
            loss: XorLoss::Mse,
            shots: None,
            audit_fraction: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidInput("epochs and batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidInput("learning rate must be positive".into()));
        }
        if !self.shift.is_finite() || self.shift.sin().abs() < 1e-6 {
            return Err(Error::InvalidInput("shift must have sin(shift) != 0".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidInput("shots must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.audit_fraction) {
            return Err(Error::InvalidInput("audit fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchRecord {
    pub epoch: usize,
    /// Mean loss over the batch, before the update.
    pub loss: f64,
    /// Validation accuracy after the update.
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuditSummary {
    pub checks: usize,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRun {
    pub config: TrainConfig,
    pub history: Vec<BatchRecord>,
    /// `[θ₁, θ₂, α₁, α₂]` before training and after every batch.
    pub trajectory: Vec<[f64; 4]>,
    pub model: XorModel,
    pub test_accuracy: f64,
    /// Predicted class per test sample.
    pub test_predictions: Vec<(XorSample, u8)>,
    pub audit: AuditSummary,
}

impl TrainRun {
    pub fn batches_per_epoch(&self) -> usize {
        self.history.len() / self.config.epochs
    }
}

/// Abort when the epoch loss stays above this multiple of the initial loss ...
pub const DIVERGENCE_FACTOR: f64 = 10.0;
/// ... for this many consecutive epochs.
pub const DIVERGENCE_EPOCHS: usize = 5;

/// Step `h` of the central differences used by the gradient audit.
pub const AUDIT_STEP: f64 = 1e-5;

fn batch_loss(variant: XorVariant, loss: XorLoss, p: &[f64], batch: &[XorSample]) -> Result<f64> {
    let model = XorModel::from_trainable(variant, p)?;
    let mut total = 0.0;
    for s in batch {
        total += loss.value(s.target() - xor_expectation(&model, s.x1, s.x2)?);
    }
    Ok(total / batch.len() as f64)
}

/// Mini-batch gradient descent on the batch-mean loss.
///
/// Per batch, the samples are evaluated in parallel into fixed slots and then
/// reduced in batch order, so the run depends only on `config.seed`.
pub fn train_quantum(data: &XorDataset, config: &TrainConfig) -> Result<TrainRun> {
    config.validate()?;
    if data.train.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let variant = config.variant;
    let mut init_rng = rng_from_seed(subseed(config.seed, 1));
    let mut p: Vec<f64> = (0..variant.num_params())
        .map(|_| init_rng.random_range(0.0..TAU))
        .collect();
    let initial_loss = batch_loss(variant, config.loss, &p, &data.train)?;

    let batches = data.train.len().div_ceil(config.batch_size);
    let mut history = Vec::with_capacity(config.epochs * batches);
    let mut trajectory = Vec::with_capacity(config.epochs * batches + 1);
    trajectory.push(XorModel::from_trainable(variant, &p)?.all_four());
    let mut audit = AuditSummary::default();
    let mut audit_rng = rng_from_seed(subseed(config.seed, 3));
    let mut over_limit = 0;
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut batch_index = 0u64;

    for epoch in 0..config.epochs {
        let mut shuffle_rng = rng_from_seed(subseed_path(config.seed, &[2, epoch as u64]));
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<XorSample> = chunk.iter().map(|&i| data.train[i]).collect();
            let per_sample = batch
                .par_iter()
                .enumerate()
                .map(|(k, s)| {
                    let shots = config
                        .shots
                        .map(|n| (n, subseed_path(config.seed, &[4, batch_index, k as u64])));
                    expectation_and_gradient(variant, &p, s.x1, s.x2, config.shift, shots)
                })
                .collect::<Result<Vec<_>>>()?;
            let m = batch.len() as f64;
            let mut loss = 0.0;
            let mut grad = vec![0.0; p.len()];
            for (s, (z, dz)) in batch.iter().zip(&per_sample) {
                let r = s.target() - z;
                loss += config.loss.value(r);
                let slope = config.loss.slope(r);
                for (g, d) in grad.iter_mut().zip(dz) {
                    *g += slope * d;
                }
            }
            loss /= m;
            grad.iter_mut().for_each(|g| *g /= m);

            if config.shots.is_none() && config.audit_fraction > 0.0 {
                for (j, &g) in grad.iter().enumerate() {
                    if audit_rng.random::<f64>() < config.audit_fraction {
                        let mut up = p.clone();
                        let mut down = p.clone();
                        up[j] += AUDIT_STEP;
                        down[j] -= AUDIT_STEP;
                        let fd = (batch_loss(variant, config.loss, &up, &batch)?
                            - batch_loss(variant, config.loss, &down, &batch)?)
                            / (2.0 * AUDIT_STEP);
                        audit.checks += 1;
                        audit.max_abs_error = audit.max_abs_error.max((fd - g).abs());
                    }
                }
            }

            p = crate::classical::gd_step(&p, &grad, config.learning_rate)?;
            let model = XorModel::from_trainable(variant, &p)?;
            let val_accuracy = accuracy(&model, &data.validation)?;
            history.push(BatchRecord {
                epoch,
                loss,
                val_accuracy,
            });
            trajectory.push(model.all_four());
            epoch_loss += loss;
            batch_index += 1;
        }
        epoch_loss /= batches as f64;
        if epoch_loss > DIVERGENCE_FACTOR * initial_loss {
            over_limit += 1;
            if over_limit >= DIVERGENCE_EPOCHS {
                return Err(Error::Diverged {
                    epoch,
                    loss: epoch_loss,
                    initial: initial_loss,
                });
            }
        } else {
            over_limit = 0;
        }
    }

    let model = XorModel::from_trainable(variant, &p)?;
    let test_predictions = data
        .test
        .par_iter()
        .map(|s| Ok((*s, classify(&model, s.x1, s.x2)?)))
        .collect::<Result<Vec<_>>>()?;
    let hits = test_predictions.iter().filter(|(s, c)| s.label == *c).count();
    Ok(TrainRun {
        config: *config,
        history,
        trajectory,
        model,
        test_accuracy: hits as f64 / data.test.len().max(1) as f64,
        test_predictions,
        audit,
    })
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
