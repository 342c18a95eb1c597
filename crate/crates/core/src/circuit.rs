//! Gate sequences, their action on statevectors and expectation estimators.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::gates::{self, GateMatrix, PauliAxis};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;
use crate::state::{expectation, qubit_mask, HermitianObservable, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    T,
    RX,
    RY,
    RZ,
    CNOT,
    CZ,
    CPHASE,
    SWAP,
    CRX,
    CRY,
    CRZ,
}

impl GateKind {
    pub const ALL: [GateKind; 16] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::T,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::CNOT,
        GateKind::CZ,
        GateKind::CPHASE,
        GateKind::SWAP,
        GateKind::CRX,
        GateKind::CRY,
        GateKind::CRZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::CNOT => "CNOT",
            GateKind::CZ => "CZ",
            GateKind::CPHASE => "CPHASE",
            GateKind::SWAP => "SWAP",
            GateKind::CRX => "CRX",
            GateKind::CRY => "CRY",
            GateKind::CRZ => "CRZ",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::CNOT
            | GateKind::CZ
            | GateKind::CPHASE
            | GateKind::SWAP
            | GateKind::CRX
            | GateKind::CRY
            | GateKind::CRZ => 2,
            _ => 1,
        }
    }

    pub fn is_parametric(self) -> bool {
        self.rotation_axis().is_some()
    }

    pub fn is_controlled_rotation(self) -> bool {
        matches!(self, GateKind::CRX | GateKind::CRY | GateKind::CRZ)
    }

    /// Axis of the (possibly controlled) rotation.
    pub fn rotation_axis(self) -> Option<PauliAxis> {
        match self {
            GateKind::RX | GateKind::CRX => Some(PauliAxis::X),
            GateKind::RY | GateKind::CRY => Some(PauliAxis::Y),
            GateKind::RZ | GateKind::CRZ => Some(PauliAxis::Z),
            _ => None,
        }
    }

    pub fn matrix<T: Scalar>(self, angle: Option<T>) -> GateMatrix<T> {
        let theta = || angle.expect("rotation gate needs an angle");
        match self {
            GateKind::X => gates::pauli_x(),
            GateKind::Y => gates::pauli_y(),
            GateKind::Z => gates::pauli_z(),
            GateKind::H => gates::hadamard(),
            GateKind::S => gates::phase_s(),
            GateKind::T => gates::t_gate(),
            GateKind::RX => gates::rx(theta()),
            GateKind::RY => gates::ry(theta()),
            GateKind::RZ => gates::rz(theta()),
            GateKind::CNOT => gates::cnot(),
            GateKind::CZ => gates::cz(),
            GateKind::CPHASE => gates::cphase(),
            GateKind::SWAP => gates::swap(),
            GateKind::CRX => gates::controlled(&gates::rx(theta())).unwrap(),
            GateKind::CRY => gates::controlled(&gates::ry(theta())).unwrap(),
            GateKind::CRZ => gates::controlled(&gates::rz(theta())).unwrap(),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation angle: a fixed value in radians or a trainable slot `$k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Literal(f64),
    Slot(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    /// For two-qubit gates, `targets[0]` is the control (or first) qubit.
    pub targets: Vec<usize>,
    pub param: Option<Angle>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: Vec<usize>, param: Option<Angle>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidInput(format!(
                "{kind} acts on {} qubit(s), got {}",
                kind.arity(),
                targets.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidInput(format!(
                "{kind} needs distinct qubits, got {} twice",
                targets[0]
            )));
        }
        match (kind.is_parametric(), &param) {
            (true, None) => Err(Error::InvalidInput(format!("{kind} needs an angle"))),
            (false, Some(_)) => Err(Error::InvalidInput(format!("{kind} takes no angle"))),
            (_, Some(Angle::Literal(a))) if !a.is_finite() => {
                Err(Error::InvalidInput(format!("{kind} angle is not finite")))
            }
            _ => Ok(Self {
                kind,
                targets,
                param,
            }),
        }
    }

    pub fn slot(&self) -> Option<usize> {
        match self.param {
            Some(Angle::Slot(k)) => Some(k),
            _ => None,
        }
    }

    pub(crate) fn angle<T: Scalar>(&self, params: &[T]) -> Option<T> {
        self.param.map(|a| match a {
            Angle::Literal(x) => T::lit(x),
            Angle::Slot(k) => params[k],
        })
    }
}

/// An ordered gate list on a fixed register with `num_params` trainable slots.
/// Immutable once built through [`CircuitBuilder`] or [`Circuit::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
    num_params: usize,
}

impl Circuit {
    pub fn new(num_qubits: usize, ops: Vec<GateOp>, num_params: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidInput("circuit needs at least one qubit".into()));
        }
        for op in &ops {
            if let Some(&q) = op.targets.iter().find(|&&q| q >= num_qubits) {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
            if let Some(k) = op.slot() {
                if k >= num_params {
                    return Err(Error::UnboundParameter {
                        slot: k,
                        available: num_params,
                    });
                }
            }
        }
        Ok(Self {
            num_qubits,
            ops,
            num_params,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// `self` followed by `next` on the same register; slots are shared.
    pub fn then(&self, next: &Circuit) -> Result<Circuit> {
        if next.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                got: next.num_qubits,
            });
        }
        let mut ops = self.ops.clone();
        ops.extend(next.ops.iter().cloned());
        Circuit::new(self.num_qubits, ops, self.num_params.max(next.num_params))
    }

    /// Ops `[0, at)` and `[at, len)` as two circuits with the same slots.
    pub fn split_at(&self, at: usize) -> (Circuit, Circuit) {
        let (a, b) = self.ops.split_at(at);
        (
            Circuit {
                num_qubits: self.num_qubits,
                ops: a.to_vec(),
                num_params: self.num_params,
            },
            Circuit {
                num_qubits: self.num_qubits,
                ops: b.to_vec(),
                num_params: self.num_params,
            },
        )
    }
}

/// Incremental construction with the slot count inferred from use.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    num_qubits: usize,
    ops: Vec<GateOp>,
    num_params: usize,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ops: Vec::new(),
            num_params: 0,
        }
    }

    /// Reserve at least `n` slots even if fewer are referenced.
    pub fn params(mut self, n: usize) -> Self {
        self.num_params = self.num_params.max(n);
        self
    }

    pub fn gate(mut self, kind: GateKind, targets: &[usize], param: Option<Angle>) -> Result<Self> {
        let op = GateOp::new(kind, targets.to_vec(), param)?;
        if let Some(k) = op.slot() {
            self.num_params = self.num_params.max(k + 1);
        }
        self.ops.push(op);
        Ok(self)
    }

    pub fn fixed(self, kind: GateKind, targets: &[usize]) -> Result<Self> {
        self.gate(kind, targets, None)
    }

    pub fn rotation(self, kind: GateKind, targets: &[usize], angle: f64) -> Result<Self> {
        self.gate(kind, targets, Some(Angle::Literal(angle)))
    }

    pub fn slot(self, kind: GateKind, targets: &[usize], slot: usize) -> Result<Self> {
        self.gate(kind, targets, Some(Angle::Slot(slot)))
    }

    pub fn build(self) -> Result<Circuit> {
        Circuit::new(self.num_qubits, self.ops, self.num_params)
    }
}

pub(crate) fn apply_gate_in_place<T: Scalar>(
    amps: &mut [Complex<T>],
    num_qubits: usize,
    targets: &[usize],
    gate: &GateMatrix<T>,
) {
    let m = gate.matrix();
    match targets {
        [q] => {
            let mask = qubit_mask(num_qubits, *q);
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            for i in 0..amps.len() {
                if i & mask == 0 {
                    let (x, y) = (amps[i], amps[i | mask]);
                    amps[i] = a * x + b * y;
                    amps[i | mask] = c * x + d * y;
                }
            }
        }
        [q0, q1] => {
            let m0 = qubit_mask(num_qubits, *q0);
            let m1 = qubit_mask(num_qubits, *q1);
            for i in 0..amps.len() {
                if i & (m0 | m1) == 0 {
                    let idx = [i, i | m1, i | m0, i | m0 | m1];
                    let v = idx.map(|j| amps[j]);
                    for (r, &j) in idx.iter().enumerate() {
                        amps[j] = (0..4).map(|c| m[(r, c)] * v[c]).sum();
                    }
                }
            }
        }
        _ => unreachable!("gates act on one or two qubits"),
    }
}

fn check_inputs<T: Scalar>(circuit: &Circuit, params: &[T], input: &StateVector<T>) -> Result<()> {
    if params.len() < circuit.num_params {
        return Err(Error::UnboundParameter {
            slot: params.len(),
            available: params.len(),
        });
    }
    if params.len() > circuit.num_params {
        return Err(Error::DimensionMismatch {
            expected: circuit.num_params,
            got: params.len(),
        });
    }
    if input.num_qubits() != circuit.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << circuit.num_qubits,
            got: input.dim(),
        });
    }
    input.require_normalized()
}

/// Local modification of one op, used by the gradient rules.
#[derive(Debug, Clone)]
pub(crate) enum Tweak<T> {
    None,
    /// Add `delta` to the angle of op `op`.
    ShiftAngle { op: usize, delta: T },
    /// Apply `gate` on `targets` right after op `op`.
    InsertAfter {
        op: usize,
        targets: Vec<usize>,
        gate: GateMatrix<T>,
    },
}

pub(crate) fn apply_tweaked<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    tweak: &Tweak<T>,
) -> Result<StateVector<T>> {
    check_inputs(circuit, params, input)?;
    let n = circuit.num_qubits;
    let mut amps = input.amplitudes().to_vec();
    for (i, op) in circuit.ops.iter().enumerate() {
        let mut angle = op.angle(params);
        if let Tweak::ShiftAngle { op: k, delta } = tweak {
            if *k == i {
                angle = angle.map(|a| a + *delta);
            }
        }
        apply_gate_in_place(&mut amps, n, &op.targets, &op.kind.matrix(angle));
        if let Tweak::InsertAfter { op: k, targets, gate } = tweak {
            if *k == i {
                apply_gate_in_place(&mut amps, n, targets, gate);
            }
        }
    }
    StateVector::from_amplitudes(amps)
}

/// Runs the gates left to right on `input`.
pub fn apply<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
) -> Result<StateVector<T>> {
    apply_tweaked(circuit, params, input, &Tweak::None)
}

/// Undoes [`apply`]: runs the adjoint gates right to left.
pub fn apply_inverse<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
) -> Result<StateVector<T>> {
    check_inputs(circuit, params, input)?;
    let mut amps = input.amplitudes().to_vec();
    for op in circuit.ops.iter().rev() {
        let g = op.kind.matrix(op.angle(params)).dagger();
        apply_gate_in_place(&mut amps, circuit.num_qubits, &op.targets, &g);
    }
    StateVector::from_amplitudes(amps)
}

/// `⟨ψ|U(θ)† A U(θ)|ψ⟩`.
pub fn exact_expectation<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
) -> Result<T> {
    expectation(&apply(circuit, params, input)?, obs)
}

pub(crate) fn tweaked_expectation<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
    tweak: &Tweak<T>,
) -> Result<T> {
    expectation(&apply_tweaked(circuit, params, input, tweak)?, obs)
}

/// Outcome tally of repeated `Z` measurements on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotResult {
    pub shots: u64,
    /// Eigenvalue (+1 / −1) to number of occurrences.
    pub counts: BTreeMap<i8, u64>,
    pub empirical_expectation: f64,
}

impl ShotResult {
    /// Draws `shots` outcomes of a ±1 observable with `P(−1) = prob_minus`.
    pub fn sample(prob_minus: f64, shots: u64, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let minus = (0..shots).filter(|_| rng.random::<f64>() < prob_minus).count() as u64;
        let plus = shots - minus;
        let counts = BTreeMap::from([(1i8, plus), (-1i8, minus)]);
        Self {
            shots,
            counts,
            empirical_expectation: (plus as f64 - minus as f64) / shots as f64,
        }
    }
}

/// Estimates `⟨Z_readout⟩` from `shots` simulated measurements.
pub fn sample_expectation<T: Scalar>(
    circuit: &Circuit,
    params: &[T],
    input: &StateVector<T>,
    readout: usize,
    shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be >= 1".into()));
    }
    if readout >= circuit.num_qubits {
        return Err(Error::QubitOutOfRange {
            qubit: readout,
            num_qubits: circuit.num_qubits,
        });
    }
    let out = apply(circuit, params, input)?;
    let p1 = out.prob_one(readout).to_f64().unwrap_or(f64::NAN).clamp(0.0, 1.0);
    Ok(ShotResult::sample(p1, shots, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    type S = StateVector<f64>;

    fn z0(n: usize) -> HermitianObservable<f64> {
        HermitianObservable::pauli_z(n, 0).unwrap()
    }

    #[test]
    fn hadamard_makes_plus() {
        let c = CircuitBuilder::new(1).fixed(GateKind::H, &[0]).unwrap().build().unwrap();
        let out = apply::<f64>(&c, &[], &S::zero(1)).unwrap();
        assert!(out.max_abs_diff(&S::plus()) < 1e-15);
    }

    #[test]
    fn bell_pair() {
        let c = CircuitBuilder::new(2)
            .fixed(GateKind::H, &[0])
            .unwrap()
            .fixed(GateKind::CNOT, &[0, 1])
            .unwrap()
            .build()
            .unwrap();
        let out = apply::<f64>(&c, &[], &S::zero(2)).unwrap();
        let bell = S::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        assert!(out.max_abs_diff(&bell) < 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2, vec![], 0).unwrap();
        let s = S::from_real(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(apply::<f64>(&c, &[], &s).unwrap(), s);
    }

    #[test]
    fn rx_expectation_is_cosine() {
        let c = CircuitBuilder::new(1).slot(GateKind::RX, &[0], 0).unwrap().build().unwrap();
        for (theta, want) in [(0.0, 1.0), (PI, -1.0), (PI / 2.0, 0.0)] {
            let e = exact_expectation(&c, &[theta], &S::zero(1), &z0(1)).unwrap();
            assert!((e - want).abs() < 1e-15, "θ={theta}: {e}");
        }
    }

    #[test]
    fn missing_parameters_are_rejected() {
        let c = CircuitBuilder::new(1).slot(GateKind::RZ, &[0], 1).unwrap().build().unwrap();
        assert_eq!(c.num_params(), 2);
        assert!(matches!(
            apply(&c, &[0.1], &S::zero(1)),
            Err(Error::UnboundParameter { .. })
        ));
    }

    #[test]
    fn op_validation() {
        assert!(GateOp::new(GateKind::RX, vec![0], None).is_err());
        assert!(GateOp::new(GateKind::H, vec![0], Some(Angle::Literal(1.0))).is_err());
        assert!(GateOp::new(GateKind::CNOT, vec![1, 1], None).is_err());
        assert!(GateOp::new(GateKind::CNOT, vec![1], None).is_err());
        assert!(Circuit::new(2, vec![GateOp::new(GateKind::X, vec![2], None).unwrap()], 0).is_err());
        assert!(Circuit::new(1, vec![GateOp::new(GateKind::RX, vec![0], Some(Angle::Slot(0))).unwrap()], 0).is_err());
    }

    #[test]
    fn non_adjacent_two_qubit_gate() {
        // CNOT 0 -> 2 on |100⟩ gives |101⟩
        let c = CircuitBuilder::new(3).fixed(GateKind::CNOT, &[0, 2]).unwrap().build().unwrap();
        let out = apply::<f64>(&c, &[], &S::basis(3, 0b100)).unwrap();
        assert_eq!(out, S::basis(3, 0b101));
        // reversed control: CNOT 2 -> 0 on |001⟩ gives |101⟩
        let c = CircuitBuilder::new(3).fixed(GateKind::CNOT, &[2, 0]).unwrap().build().unwrap();
        let out = apply::<f64>(&c, &[], &S::basis(3, 0b001)).unwrap();
        assert_eq!(out, S::basis(3, 0b101));
    }

    #[test]
    fn cnot_truth_table() {
        let c = CircuitBuilder::new(2).fixed(GateKind::CNOT, &[0, 1]).unwrap().build().unwrap();
        for (input, m0, m1) in [(0b00, 0, 0), (0b01, 0, 1), (0b10, 1, 1), (0b11, 1, 0)] {
            let out = apply::<f64>(&c, &[], &S::basis(2, input)).unwrap();
            assert_eq!(out, S::basis(2, (m0 << 1) | m1));
        }
    }

    #[test]
    fn shots_on_basis_state_are_all_plus() {
        let c = Circuit::new(1, vec![], 0).unwrap();
        let r = sample_expectation::<f64>(&c, &[], &S::zero(1), 0, 1000, 3).unwrap();
        assert_eq!(r.counts[&1], 1000);
        assert_eq!(r.counts[&-1], 0);
        assert_eq!(r.empirical_expectation, 1.0);
    }

    #[test]
    fn shots_are_seed_deterministic() {
        let c = CircuitBuilder::new(1).fixed(GateKind::H, &[0]).unwrap().build().unwrap();
        let a = sample_expectation::<f64>(&c, &[], &S::zero(1), 0, 5000, 17).unwrap();
        let b = sample_expectation::<f64>(&c, &[], &S::zero(1), 0, 5000, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<u64>(), 5000);
        let mean = (a.counts[&1] as f64 - a.counts[&-1] as f64) / 5000.0;
        assert_eq!(mean, a.empirical_expectation);
    }

    #[test]
    fn zero_shots_rejected() {
        let c = Circuit::new(1, vec![], 0).unwrap();
        assert!(sample_expectation::<f64>(&c, &[], &S::zero(1), 0, 0, 0).is_err());
    }

    #[test]
    fn runs_in_single_precision() {
        let c = CircuitBuilder::new(1).slot(GateKind::RY, &[0], 0).unwrap().build().unwrap();
        let obs = HermitianObservable::<f32>::pauli_z(1, 0).unwrap();
        let e = exact_expectation(&c, &[1.0f32], &StateVector::zero(1), &obs).unwrap();
        assert!((e - 1.0f32.cos()).abs() < 1e-6);
    }
}
