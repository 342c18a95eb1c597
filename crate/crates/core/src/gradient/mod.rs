//! Gradients of circuit expectations.
//!
//! [`shift_gradient`] is exact for every parametric gate in the library. Plain
//! rotations `R_P(θ) = exp(−iθ/2·P)` are differentiated by shifting their angle.
//! A controlled rotation is the product of two commuting Pauli-product
//! exponentials,
//!
//! ```text
//! CR_P(θ) = exp(−i(θ/2)/2 · I⊗P) · exp(−i(θ/2)/2 · (−Z⊗P)),
//! ```
//!
//! so each occurrence contributes two shift pairs, applied by inserting
//! `exp(∓is/2·G)` right after the gate.

pub mod identities;
pub mod stochastic;

use rayon::prelude::*;

use crate::circuit::{apply_tweaked, tweaked_expectation, Circuit, GateKind, ShotResult, Tweak};
use crate::error::{Error, Result};
use crate::gates::{self, GateMatrix, PauliAxis};
use crate::linalg::CMatrix;
use crate::rng::subseed;
use crate::scalar::Scalar;
use crate::state::{HermitianObservable, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMethod {
    Shift,
    StochasticShift,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate<T> {
    /// `∂C/∂θ_k` for every slot `k`.
    pub values: Vec<T>,
    pub method: GradientMethod,
    /// Number of circuit executions spent.
    pub evaluations: usize,
    pub seed: Option<u64>,
}

/// The Pauli-product exponentials making up a parametric gate, as
/// `(coefficient, generator)` with `gate(θ) = Π exp(−i·coefficient·θ/2·G)`.
///
/// `None` means the gate has no such form and the shift rule does not apply.
fn generator_terms<T: Scalar>(kind: GateKind) -> Option<Vec<(T, GeneratorShape)>> {
    let axis = kind.rotation_axis()?;
    if kind.is_controlled_rotation() {
        let half = T::lit(0.5);
        Some(vec![
            (half, GeneratorShape::TargetOnly(axis)),
            (half, GeneratorShape::NegControlZ(axis)),
        ])
    } else {
        Some(vec![(T::one(), GeneratorShape::Single(axis))])
    }
}

#[derive(Debug, Clone, Copy)]
enum GeneratorShape {
    /// `P` on a one-qubit gate.
    Single(PauliAxis),
    /// `I ⊗ P` on (control, target).
    TargetOnly(PauliAxis),
    /// `−Z ⊗ P` on (control, target).
    NegControlZ(PauliAxis),
}

/// `exp(−iφ/2·G)` for a two-qubit generator shape.
fn generator_exp<T: Scalar>(shape: GeneratorShape, phi: T) -> GateMatrix<T> {
    let block = |u0: &GateMatrix<T>, u1: &GateMatrix<T>| {
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = u0.matrix()[(i, j)];
                m[(i + 2, j + 2)] = u1.matrix()[(i, j)];
            }
        }
        GateMatrix::known(2, m)
    };
    match shape {
        GeneratorShape::Single(axis) => gates::rotation(axis, phi),
        GeneratorShape::TargetOnly(axis) => {
            let r = gates::rotation(axis, phi);
            block(&r, &r)
        }
        GeneratorShape::NegControlZ(axis) => {
            block(&gates::rotation(axis, -phi), &gates::rotation(axis, phi))
        }
    }
}

/// One shifted evaluation: `weight · C(tweak)` contributes to `slot`.
struct ShiftTerm<T> {
    slot: usize,
    weight: T,
    tweak: Tweak<T>,
}

fn shift_terms<T: Scalar>(circuit: &Circuit, shift: T) -> Result<Vec<ShiftTerm<T>>> {
    let denom = T::lit(2.0) * shift.sin();
    let mut terms = Vec::new();
    for (i, op) in circuit.ops().iter().enumerate() {
        let Some(slot) = op.slot() else { continue };
        let generators = generator_terms::<T>(op.kind).ok_or(Error::UnsupportedGate {
            slot,
            gate: op.kind.name(),
        })?;
        for (coef, shape) in generators {
            for sign in [T::one(), -T::one()] {
                let tweak = match shape {
                    GeneratorShape::Single(_) => Tweak::ShiftAngle {
                        op: i,
                        delta: sign * shift,
                    },
                    _ => Tweak::InsertAfter {
                        op: i,
                        targets: op.targets.clone(),
                        gate: generator_exp(shape, sign * shift),
                    },
                };
                terms.push(ShiftTerm {
                    slot,
                    weight: sign * coef / denom,
                    tweak,
                });
            }
        }
    }
    Ok(terms)
}

/// Exact gradient from shifted evaluations at `±π/2`.
pub fn shift_gradient<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
) -> Result<GradientEstimate<T>> {
    shift_gradient_with(circuit, params, input, obs, T::FRAC_PI_2())
}

/// Shift rule with a general shift `s`:
/// `∂C/∂φ = [C(φ+s) − C(φ−s)] / (2 sin s)`, exact for any `s` with `sin s ≠ 0`.
///
/// Evaluations run on the current rayon pool; each lands in a fixed position and
/// the per-slot sums are taken in circuit order, so the result does not depend
/// on the number of threads.
pub fn shift_gradient_with<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
    shift: T,
) -> Result<GradientEstimate<T>> {
    if !shift.is_finite() || shift.sin().abs() < T::lit(1e-6) {
        return Err(Error::InvalidInput(format!(
            "shift {shift} leaves sin(shift) ~ 0"
        )));
    }
    // Validates widths, slot count and normalization up front.
    tweaked_expectation(circuit, params, input, obs, &Tweak::None)?;
    let terms = shift_terms(circuit, shift)?;
    let costs: Vec<T> = terms
        .par_iter()
        .map(|t| tweaked_expectation(circuit, params, input, obs, &t.tweak))
        .collect::<Result<_>>()?;
    let mut values = vec![T::zero(); circuit.num_params()];
    for (term, c) in terms.iter().zip(&costs) {
        values[term.slot] += term.weight * *c;
    }
    Ok(GradientEstimate {
        values,
        method: GradientMethod::Shift,
        evaluations: terms.len(),
        seed: None,
    })
}

/// Shift rule where every evaluation is estimated from `shots` simulated `Z`
/// measurements of `readout`. Evaluation `i` draws from subseed `(seed, i)`.
pub fn sampled_shift_gradient<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    readout: usize,
    shift: T,
    shots: u64,
    seed: u64,
) -> Result<GradientEstimate<T>> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be >= 1".into()));
    }
    if readout >= circuit.num_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: readout,
            num_qubits: circuit.num_qubits(),
        });
    }
    if !shift.is_finite() || shift.sin().abs() < T::lit(1e-6) {
        return Err(Error::InvalidInput(format!(
            "shift {shift} leaves sin(shift) ~ 0"
        )));
    }
    apply_tweaked(circuit, params, input, &Tweak::None)?;
    let terms = shift_terms(circuit, shift)?;
    let costs: Vec<f64> = terms
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let out = apply_tweaked(circuit, params, input, &t.tweak)?;
            let p1 = out.prob_one(readout).to_f64().unwrap_or(f64::NAN).clamp(0.0, 1.0);
            Ok(ShotResult::sample(p1, shots, subseed(seed, i as u64)).empirical_expectation)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![T::zero(); circuit.num_params()];
    for (term, c) in terms.iter().zip(&costs) {
        values[term.slot] += term.weight * T::lit(*c);
    }
    Ok(GradientEstimate {
        values,
        method: GradientMethod::Shift,
        evaluations: terms.len(),
        seed: Some(seed),
    })
}

/// Central differences `[C(θ+h) − C(θ−h)] / (2h)` per slot.
pub fn finite_difference_gradient<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
    h: T,
) -> Result<GradientEstimate<T>> {
    if h <= T::zero() || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step h = {h} must be positive")));
    }
    tweaked_expectation(circuit, params, input, obs, &Tweak::None)?;
    let values = (0..circuit.num_params())
        .into_par_iter()
        .map(|k| {
            let at = |delta: T| {
                let mut p = params.to_vec();
                p[k] += delta;
                tweaked_expectation(circuit, &p, input, obs, &Tweak::None)
            };
            Ok((at(h)? - at(-h)?) / (T::lit(2.0) * h))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(GradientEstimate {
        evaluations: 2 * values.len(),
        values,
        method: GradientMethod::FiniteDifference,
        seed: None,
    })
}

/// Number of circuit executions [`shift_gradient`] will spend.
pub fn shift_evaluation_count(circuit: &Circuit) -> usize {
    circuit
        .ops()
        .iter()
        .filter(|op| op.slot().is_some())
        .map(|op| if op.kind.is_controlled_rotation() { 4 } else { 2 })
        .sum()
}
