use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex;
use proptest::prelude::*;
use qneuron_core::gates::{
    controlled, hadamard, identity, pauli_x, pauli_y, pauli_z, phase_s, rotation, rx, ry, rz, t_gate,
    universal_set, zyz_decompose, PauliAxis,
};
use qneuron_core::linalg::{pauli, CMatrix};
use qneuron_core::rng::task_rng;
use qneuron_core::{GateKind, GateMatrix};
use rand::Rng;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// `[a, −e^{iφ} b̄; b, e^{iφ} ā]` with `|a|² + |b|² = 1` covers all of U(2).
fn random_unitary(rng: &mut impl Rng) -> GateMatrix {
    let a = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let b = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    let phase = Complex::from_polar(1.0, rng.random_range(0.0..TAU));
    GateMatrix::new(CMatrix::from_rows(vec![
        vec![a, -phase * b.conj()],
        vec![b, phase * a.conj()],
    ]))
    .unwrap()
}

#[test]
fn every_library_gate_is_unitary() {
    let mut rng = task_rng(0, 0);
    for kind in GateKind::ALL {
        for _ in 0..20 {
            let angle = kind.is_parametric().then(|| rng.random_range(-10.0..10.0));
            let g = kind.matrix::<f64>(angle);
            assert_eq!(g.arity(), kind.arity());
            assert!(g.matrix().unitarity_deviation() < 1e-12, "{}", kind.name());
        }
    }
    for (name, g) in universal_set::<f64>() {
        assert!(g.matrix().unitarity_deviation() < 1e-12, "{name}");
    }
}

#[test]
fn pauli_and_clifford_algebra() {
    let id = identity::<f64>();
    for (name, g) in [
        ("H", hadamard::<f64>()),
        ("X", pauli_x()),
        ("Y", pauli_y()),
        ("Z", pauli_z()),
    ] {
        assert!(g.then_after(&g).max_abs_diff(&id) < 1e-15, "{name}^2");
    }
    assert!(t_gate::<f64>().then_after(&t_gate()).max_abs_diff(&phase_s()) < 1e-15);
    assert!(phase_s::<f64>().then_after(&phase_s()).max_abs_diff(&pauli_z()) < 1e-15);
    assert!((t_gate::<f64>().matrix()[(1, 1)] - Complex::from_polar(1.0, FRAC_PI_4)).norm() < 1e-16);
    // HZH = X
    let hzh = hadamard::<f64>().then_after(&pauli_z()).then_after(&hadamard());
    assert!(hzh.max_abs_diff(&pauli_x()) < 1e-15);
}

#[test]
fn x_flips_and_h_superposes() {
    let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
    let out = pauli_x::<f64>().matrix().apply(&[a, b]);
    assert_eq!(out, vec![b, a]);
    let plus = hadamard::<f64>().matrix().apply(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((plus[0] - r).norm() < 1e-16 && (plus[1] - r).norm() < 1e-16);
}

#[test]
fn rotations_match_exponentials_of_paulis() {
    let mut rng = task_rng(1, 0);
    for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
        for _ in 0..50 {
            let theta: f64 = rng.random_range(-10.0..10.0);
            let g = axis.matrix::<f64>();
            let oracle = &CMatrix::identity(2).scale_real((theta / 2.0).cos())
                + &g.scale(c(0.0, -(theta / 2.0).sin()));
            assert!(rotation(axis, theta).matrix().max_abs_diff(&oracle) < 1e-15);
        }
    }
    assert!(rx(0.0).max_abs_diff(&identity()) == 0.0);
    assert!(rz(4.0 * PI).max_abs_diff(&identity()) < 1e-15);
}

#[test]
fn controlled_gates_are_block_diagonal() {
    let u = ry(0.37);
    let cu = controlled(&u).unwrap();
    let m = cu.matrix();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(m[(i, j)], if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
            assert_eq!(m[(i, j + 2)], c(0.0, 0.0));
            assert_eq!(m[(i + 2, j)], c(0.0, 0.0));
            assert_eq!(m[(i + 2, j + 2)], u.matrix()[(i, j)]);
        }
    }
    assert!(controlled(&cu).is_err());
    // CZ is symmetric in its two qubits: it equals its SWAP conjugate.
    let cz = GateKind::CZ.matrix::<f64>(None);
    let sw = GateKind::SWAP.matrix::<f64>(None);
    assert!(sw.then_after(&cz).then_after(&sw).max_abs_diff(&cz) < 1e-16);
}

#[test]
fn zyz_round_trips_random_unitaries() {
    let mut rng = task_rng(2, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = random_unitary(&mut rng);
        let d = zyz_decompose(&u).unwrap();
        assert!((0.0..=PI).contains(&d.gamma));
        for a in [d.alpha, d.beta, d.delta] {
            assert!((0.0..TAU).contains(&a));
        }
        worst = worst.max(d.reconstruct().max_abs_diff(&u));
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn zyz_handles_degenerate_unitaries() {
    for u in [
        identity::<f64>(),
        pauli_x(),
        pauli_y(),
        pauli_z(),
        hadamard(),
        phase_s(),
        t_gate(),
        rz(1.3),
        ry(PI),
        GateMatrix::new(pauli::i::<f64>().scale(c(0.0, 1.0))).unwrap(),
    ] {
        let d = zyz_decompose(&u).unwrap();
        assert!(d.reconstruct().max_abs_diff(&u) < 1e-12, "{d:?}");
    }
}

proptest! {
    #[test]
    fn rotation_angles_add(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let ab = rotation(axis, a).then_after(&rotation(axis, b));
            prop_assert!(ab.max_abs_diff(&rotation(axis, a + b)) < 1e-12);
            prop_assert!(rotation(axis, a).dagger().max_abs_diff(&rotation(axis, -a)) < 1e-15);
        }
    }

    #[test]
    fn zyz_of_euler_product_reconstructs(
        alpha in -10.0f64..10.0, beta in -10.0f64..10.0, gamma in -10.0f64..10.0, delta in -10.0f64..10.0
    ) {
        let u = rz(beta).then_after(&ry(gamma)).then_after(&rz(delta));
        let u = GateMatrix::new(u.matrix().scale(Complex::from_polar(1.0, alpha))).unwrap();
        let d = zyz_decompose(&u).unwrap();
        prop_assert!(d.reconstruct().max_abs_diff(&u) < 1e-10);
    }
}
