#![allow(dead_code)]

use qneuron_core::rng::task_rng;
use qneuron_core::{Circuit, CircuitBuilder, GateKind, StateVector};
use rand::Rng;

const ROTATIONS: [GateKind; 6] = [
    GateKind::RX,
    GateKind::RY,
    GateKind::RZ,
    GateKind::CRX,
    GateKind::CRY,
    GateKind::CRZ,
];
const FIXED: [GateKind; 6] = [
    GateKind::H,
    GateKind::S,
    GateKind::T,
    GateKind::CNOT,
    GateKind::CZ,
    GateKind::SWAP,
];

fn two_distinct(rng: &mut impl Rng, n: usize) -> [usize; 2] {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    [a, b]
}

/// Random circuit on 1..=4 qubits with 1..=12 slots, some reused, mixed with
/// fixed gates and literal rotations.
pub fn random_circuit(seed: u64) -> (Circuit, Vec<f64>) {
    let mut rng = task_rng(seed, 0);
    let n = rng.random_range(1..=4usize);
    let k = rng.random_range(1..=12usize);
    let mut b = CircuitBuilder::new(n).params(k);
    for slot in 0..k {
        for _ in 0..rng.random_range(1..=2) {
            b = push_rotation(b, &mut rng, n, Some(slot));
        }
        if rng.random_bool(0.5) {
            b = push_fixed(b, &mut rng, n);
        }
        if rng.random_bool(0.2) {
            b = push_rotation(b, &mut rng, n, None);
        }
    }
    let params = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
    (b.build().unwrap(), params)
}

fn push_rotation(b: CircuitBuilder, rng: &mut impl Rng, n: usize, slot: Option<usize>) -> CircuitBuilder {
    let mut kind = ROTATIONS[rng.random_range(0..ROTATIONS.len())];
    if n == 1 && kind.arity() == 2 {
        kind = ROTATIONS[rng.random_range(0..3)];
    }
    let targets: Vec<usize> = if kind.arity() == 2 {
        two_distinct(rng, n).to_vec()
    } else {
        vec![rng.random_range(0..n)]
    };
    match slot {
        Some(s) => b.slot(kind, &targets, s).unwrap(),
        None => b.rotation(kind, &targets, rng.random_range(-3.0..3.0)).unwrap(),
    }
}

fn push_fixed(b: CircuitBuilder, rng: &mut impl Rng, n: usize) -> CircuitBuilder {
    let mut kind = FIXED[rng.random_range(0..FIXED.len())];
    if n == 1 && kind.arity() == 2 {
        kind = FIXED[rng.random_range(0..3)];
    }
    let targets: Vec<usize> = if kind.arity() == 2 {
        two_distinct(rng, n).to_vec()
    } else {
        vec![rng.random_range(0..n)]
    };
    b.fixed(kind, &targets).unwrap()
}

/// A normalized state with random complex amplitudes.
pub fn random_state(n: usize, seed: u64) -> StateVector {
    let mut rng = task_rng(seed, 1);
    let amps: Vec<_> = (0..1usize << n)
        .map(|_| num_complex::Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::normalized(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}
