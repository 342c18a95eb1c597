use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qneuron_core::classical::{
    backprop_gradients, conv1d_valid, conv_as_matrix, make_xor_clusters, minibatch_train, run_xor_baseline,
    softmax, Activation, BaselineConfig, BaselineModel, DenseNet, GdConfig, LinearModel, Model,
};
use qneuron_core::rng::task_rng;
use rand::Rng;

const SMOOTH: [Activation; 3] = [Activation::Identity, Activation::Sigmoid, Activation::Tanh];

fn half_sse(net: &DenseNet, x: &[f64], y: &[f64]) -> f64 {
    let f = net.forward(x).unwrap();
    0.5 * f.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
}

#[test]
fn backprop_matches_finite_differences_on_random_networks() {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = task_rng(seed, 0);
        let depth = rng.random_range(1..=3);
        let widths: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=5)).collect();
        // ReLU's kink breaks central differences; it gets its own test below.
        let acts: Vec<Activation> = (0..depth).map(|_| SMOOTH[rng.random_range(0..3)]).collect();
        let net = DenseNet::new(&widths, &acts, seed).unwrap();
        let x: Vec<f64> = (0..widths[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..widths[depth]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, analytic) = net.sample_gradient(&x, &y).unwrap();
        let params = net.parameters();
        for k in 0..params.len() {
            let at = |d: f64| {
                let mut p = params.clone();
                p[k] += d;
                let mut m = net.clone();
                m.set_parameters(&p).unwrap();
                half_sse(&m, &x, &y)
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let rel = (analytic[k] - fd).abs() / analytic[k].abs().max(fd.abs()).max(1e-3);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

#[test]
fn relu_backprop_away_from_the_kink() {
    let net = DenseNet::from_parts(
        vec![DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.3, 0.8]), DMatrix::from_row_slice(1, 2, &[0.7, -1.1])],
        vec![DVector::from_vec(vec![0.2, -0.1]), DVector::from_vec(vec![0.05])],
        vec![Activation::Relu, Activation::Identity],
    )
    .unwrap();
    let (x, y) = ([0.9, 0.4], [0.3]);
    let g = backprop_gradients(&net, &x, &y).unwrap();
    // Hidden pre-activations are 0.9 and 0.49, both active.
    let f = net.forward(&x).unwrap()[0];
    let r = f - y[0];
    let hidden = [0.9, 0.49];
    for (j, h) in hidden.iter().enumerate() {
        assert!((g.weights[1][(0, j)] - r * h).abs() < 1e-15);
    }
    assert!((g.biases[1][0] - r).abs() < 1e-15);
}

#[test]
fn convolution_equals_its_banded_matrix() {
    let mut rng = task_rng(3, 0);
    for _ in 0..1000 {
        let lf = rng.random_range(1..=20);
        let lg = rng.random_range(1..=lf);
        let f: Vec<f64> = (0..lf).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..lg).map(|_| rng.random_range(-1.0..1.0)).collect();
        let direct = conv1d_valid(&f, &g).unwrap();
        let via_matrix = conv_as_matrix(&g, lf).unwrap() * DVector::from_column_slice(&f);
        assert_eq!(direct.len(), lf - lg + 1);
        for (a, b) in direct.iter().zip(via_matrix.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn convolution_worked_example() {
    assert_eq!(conv1d_valid(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, -1.0]).unwrap(), vec![2.0, 2.0]);
    assert!(conv1d_valid(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn full_batch_minibatch_is_plain_gradient_descent() {
    let mut rng = task_rng(4, 0);
    let n = 37;
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
    let w0 = vec![0.1, -0.2, 0.3];
    let cfg = GdConfig {
        learning_rate: 0.1,
        batch_size: n,
        epochs: 25,
        seed: 9,
    };
    let out = minibatch_train(LinearModel { weights: w0.clone() }, &x, &y, &cfg).unwrap();
    assert_eq!(out.updates, 25);

    let mut w = w0;
    for _ in 0..25 {
        let mut sum = [0.0; 3];
        for (xi, yi) in x.iter().zip(&y) {
            let r = yi[0] - w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
            for j in 0..3 {
                sum[j] += -r * xi[j];
            }
        }
        for j in 0..3 {
            w[j] -= 0.1 / n as f64 * sum[j];
        }
    }
    assert_eq!(out.model.weights, w);
}

#[test]
fn update_counts_per_epoch() {
    let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0]).collect();
    let y: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
    for (m, per_epoch) in [(1, 10), (3, 4), (5, 2), (10, 1), (25, 1)] {
        let cfg = GdConfig {
            learning_rate: 0.01,
            batch_size: m,
            epochs: 3,
            seed: 0,
        };
        let out = minibatch_train(LinearModel { weights: vec![0.0] }, &x, &y, &cfg).unwrap();
        assert_eq!(out.updates, 3 * per_epoch, "m = {m}");
    }
}

#[test]
fn training_is_deterministic_per_seed() {
    let data = make_xor_clusters(20, 0.3, 1).unwrap();
    let t: Vec<Vec<f64>> = data.signed_targets().iter().map(|&v| vec![v]).collect();
    let cfg = GdConfig {
        learning_rate: 0.05,
        batch_size: 7,
        epochs: 5,
        seed: 2,
    };
    let run = || {
        let net = DenseNet::new(&[2, 4, 1], &[Activation::Tanh, Activation::Tanh], 3).unwrap();
        minibatch_train(net, &data.inputs(), &t, &cfg).unwrap()
    };
    assert_eq!(run(), run());
}

/// Best accuracy of any `sign(w·x)` classifier, scanning directions of `w`.
fn best_linear_split(points: &[[f64; 2]], labels: &[u8]) -> f64 {
    (0..3600)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 3600.0;
            let ok = points
                .iter()
                .zip(labels)
                .filter(|(p, &l)| u8::from(a.cos() * p[0] + a.sin() * p[1] >= 0.0) == l)
                .count();
            ok as f64 / points.len() as f64
        })
        .fold(0.0, f64::max)
}

#[test]
fn perceptron_cannot_beat_the_best_linear_split() {
    let cfg = BaselineConfig::default();
    for seed in 0..5 {
        let lin = run_xor_baseline(BaselineModel::Perceptron, &cfg, seed).unwrap();
        let pts: Vec<[f64; 2]> = lin.test_predictions.iter().map(|(p, _, _)| *p).collect();
        let labels: Vec<u8> = lin.test_predictions.iter().map(|(_, l, _)| *l).collect();
        let best = best_linear_split(&pts, &labels);
        assert!(lin.test_accuracy <= best + 1e-12);
        assert!(best <= 0.70, "seed {seed}: best split {best}");
        assert!(lin.test_accuracy <= 0.70);
    }
}

#[test]
fn mlp_separates_xor_clusters() {
    let cfg = BaselineConfig::default();
    for seed in 0..3 {
        let mlp = run_xor_baseline(BaselineModel::Mlp, &cfg, seed).unwrap();
        assert!(mlp.test_accuracy >= 0.95, "seed {seed}: {}", mlp.test_accuracy);
        assert!(mlp.loss_history.last() < mlp.loss_history.first());
    }
}

proptest! {
    #[test]
    fn softmax_is_a_shift_invariant_distribution(
        z in prop::collection::vec(-50.0f64..50.0, 1..10),
        c in -100.0f64..100.0,
        beta in 0.01f64..5.0,
    ) {
        let p = softmax(&z, beta).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        let q = softmax(&shifted, beta).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
