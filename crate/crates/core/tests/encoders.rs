use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qneuron_core::circuit::apply;
use qneuron_core::encoders::{
    angle_encode, binary_reduce, block_encode, block_encoding_template, fit_perceptron_closed_form,
    suggest_layout, train_ensemble, BlockEncodingSpec, MinMaxScaler,
};
use qneuron_core::rng::task_rng;
use qneuron_core::state::probability_of;
use qneuron_core::{Angle, Error, GateKind, StateVector};
use rand::Rng;

#[test]
fn worked_layout_192_features_on_16_qubits() {
    let spec = suggest_layout(192, 16).unwrap();
    assert_eq!((spec.layers, spec.gates_per_block), (4, 3));
    let c = block_encoding_template(&spec).unwrap();
    assert_eq!(c.num_qubits(), 16);
    assert_eq!(c.num_params(), 192);
    let slots: Vec<usize> = c.ops().iter().filter_map(|op| op.slot()).collect();
    assert_eq!(slots, (0..192).collect::<Vec<_>>());

    // Each layer: 48 rotations then a 15-CNOT ladder.
    let ops = c.ops();
    assert_eq!(ops.len(), 4 * (48 + 15));
    for layer in ops.chunks(63) {
        assert!(layer[..48].iter().all(|op| op.kind.is_parametric()));
        for (q, op) in layer[48..].iter().enumerate() {
            assert_eq!(op.kind, GateKind::CNOT);
            assert_eq!(op.targets, vec![q, q + 1]);
        }
    }
}

#[test]
fn layout_capacity_is_enforced() {
    assert!(matches!(
        BlockEncodingSpec::new(193, 16, 4, 3),
        Err(Error::LayoutTooSmall { data_dim: 193, capacity: 192 })
    ));
    let padded = BlockEncodingSpec::new(17, 16, 2, 1).unwrap();
    let c = block_encoding_template(&padded).unwrap();
    let literal_zeros = c
        .ops()
        .iter()
        .filter(|op| op.param == Some(Angle::Literal(0.0)))
        .count();
    assert_eq!(literal_zeros, 32 - 17);
}

#[test]
fn block_encode_equals_bound_template() {
    let mut rng = task_rng(5, 0);
    let spec = BlockEncodingSpec::new(10, 3, 2, 2).unwrap();
    let x: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
    let zero = StateVector::zero(3);
    let baked = apply(&block_encode(&x, &spec).unwrap(), &[], &zero).unwrap();
    let bound: Vec<f64> = x.iter().map(|v| PI * v).collect();
    let templ = apply(&block_encoding_template(&spec).unwrap(), &bound, &zero).unwrap();
    assert!(baked.max_abs_diff(&templ) < 1e-14);
}

#[test]
fn angle_encoding_overlap_has_closed_form() {
    let mut rng = task_rng(6, 0);
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let zero = StateVector::zero(n);
        let sx = apply(&angle_encode(&x, n).unwrap(), &[], &zero).unwrap();
        let sy = apply(&angle_encode(&y, n).unwrap(), &[], &zero).unwrap();
        let expected: f64 = x.iter().zip(&y).map(|(a, b)| (PI * (a - b) / 2.0).cos().powi(2)).product();
        assert!((probability_of(&sx, &sy).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn angle_encoding_rejects_out_of_range_and_overflow() {
    assert!(angle_encode(&[1.2], 1).is_err());
    assert!(angle_encode(&[0.1, 0.2], 1).is_err());
}

#[test]
fn closed_form_matches_least_squares_oracle() {
    let mut rng = task_rng(7, 0);
    for _ in 0..20 {
        let (d, n) = (rng.random_range(2..6), rng.random_range(20..60));
        let x = DMatrix::from_fn(d, n, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let fit = fit_perceptron_closed_form(&x, &y, false).unwrap();
        assert!(!fit.used_pseudo_inverse);
        let oracle = x
            .transpose()
            .svd(true, true)
            .solve(&DVector::from_column_slice(&y), 1e-14)
            .unwrap();
        assert!((fit.weights - oracle).amax() < 1e-10);
    }
}

#[test]
fn rank_deficient_data_needs_the_pseudo_inverse() {
    // Second feature duplicates the first.
    let x = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
    let y = [1.0, -1.0, 1.0, -1.0];
    assert!(matches!(
        fit_perceptron_closed_form(&x, &y, false),
        Err(Error::RankDeficient { rank: 1, dim: 2 })
    ));
    let fit = fit_perceptron_closed_form(&x, &y, true).unwrap();
    assert!(fit.used_pseudo_inverse);
    assert!((fit.weights[0] - fit.weights[1]).abs() < 1e-12);
}

#[test]
fn ensemble_recovers_a_planted_linear_code() {
    let mut rng = task_rng(8, 0);
    let (d, n, bits) = (6, 800, 4);
    let planted: DVector<f64> = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let mut cols = Vec::new();
    let mut y = Vec::new();
    while y.len() < n {
        let v: DVector<f64> = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let s = planted.dot(&v);
        if s.abs() > 0.3 {
            y.push(s.signum());
            cols.push(v);
        }
    }
    let x = DMatrix::from_columns(&cols);
    let fit = train_ensemble(&x, &y, bits, false).unwrap();
    assert!(fit.pseudo_inverse_shards.is_empty());
    assert_eq!(fit.ensemble.num_bits(), bits);
    let mut agree = 0;
    for (v, &label) in cols.iter().zip(&y) {
        let code = binary_reduce(&fit.ensemble, v.as_slice()).unwrap();
        agree += code.iter().filter(|&&b| (b == 1) == (label > 0.0)).count();
    }
    assert!(agree as f64 / (n * bits) as f64 > 0.97);
}

proptest! {
    #[test]
    fn scaling_ignores_affine_rescaling(
        rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 2..20),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
    ) {
        let a = MinMaxScaler::fit(&rows).unwrap();
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| scale * v + shift).collect()).collect();
        let b = MinMaxScaler::fit(&moved).unwrap();
        for (r, m) in rows.iter().zip(&moved) {
            let (ta, tb) = (a.transform(r).unwrap(), b.transform(m).unwrap());
            for (u, v) in ta.iter().zip(&tb) {
                prop_assert!((0.0..=1.0).contains(u));
                prop_assert!((u - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn suggested_layout_is_minimal(d in 1usize..400, q in 1usize..20) {
        let s = suggest_layout(d, q).unwrap();
        prop_assert!(s.capacity() >= d);
        prop_assert_eq!(s.layers * s.gates_per_block, d.div_ceil(q));
        let c = block_encoding_template(&s).unwrap();
        prop_assert_eq!(c.num_params(), d);
    }
}
