//! Classical baselines: perceptron, dense networks with backpropagation,
//! softmax, 1D convolution and mini-batch gradient descent.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, subseed, subseed_path};

fn dims_match(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `wᵀx`.
pub fn perceptron_forward(w: &[f64], x: &[f64]) -> Result<f64> {
    dims_match(w.len(), x.len())?;
    Ok(w.iter().zip(x).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Sigmoid,
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative at pre-activation `z`. ReLU uses 0 at the kink.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => {
                let s = self.apply(z);
                s * (1.0 - s)
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
        }
    }
}

/// Fully connected network `σ_L(W_L ⋯ σ_1(W_1 x + b_1) ⋯ + b_L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layer_widths: Vec<usize>,
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
    activations: Vec<Activation>,
}

/// Per-layer gradients, shaped like the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl DenseNet {
    /// Weights and biases uniform in `[−0.5, 0.5]` from `seed`.
    pub fn new(layer_widths: &[usize], activations: &[Activation], seed: u64) -> Result<Self> {
        if layer_widths.len() < 2 || layer_widths.contains(&0) {
            return Err(Error::InvalidInput(
                "need at least input and output widths, all >= 1".into(),
            ));
        }
        dims_match(layer_widths.len() - 1, activations.len())?;
        let mut rng = rng_from_seed(subseed(seed, 0));
        let mut draw = || rng.random_range(-0.5..=0.5);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_widths.windows(2) {
            weights.push(DMatrix::from_fn(pair[1], pair[0], |_, _| draw()));
            biases.push(DVector::from_fn(pair[1], |_, _| draw()));
        }
        Self::from_parts(weights, biases, activations.to_vec())
    }

    pub fn from_parts(
        weights: Vec<DMatrix<f64>>,
        biases: Vec<DVector<f64>>,
        activations: Vec<Activation>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("network needs at least one layer".into()));
        }
        dims_match(weights.len(), biases.len())?;
        dims_match(weights.len(), activations.len())?;
        let mut layer_widths = vec![weights[0].ncols()];
        for (w, b) in weights.iter().zip(&biases) {
            dims_match(*layer_widths.last().unwrap(), w.ncols())?;
            dims_match(w.nrows(), b.len())?;
            if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite network parameter".into()));
            }
            layer_widths.push(w.nrows());
        }
        Ok(Self {
            layer_widths,
            weights,
            biases,
            activations,
        })
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    /// Pre-activations `z_l` and outputs `a_l`, with `a_0 = x`.
    fn trace(&self, x: &[f64]) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
        dims_match(self.layer_widths[0], x.len())?;
        let mut outs = vec![DVector::from_column_slice(x)];
        let mut pre = Vec::with_capacity(self.weights.len());
        for ((w, b), act) in self.weights.iter().zip(&self.biases).zip(&self.activations) {
            let z = w * outs.last().unwrap() + b;
            outs.push(z.map(|v| act.apply(v)));
            pre.push(z);
        }
        Ok((pre, outs))
    }

    pub fn forward(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.trace(x)?.1.pop().unwrap())
    }
}

/// Forward pass of a dense network.
pub fn mlp_forward(net: &DenseNet, x: &[f64]) -> Result<DVector<f64>> {
    net.forward(x)
}

/// Gradients of `½‖y − f(x)‖²` with respect to every weight and bias.
pub fn backprop_gradients(net: &DenseNet, x: &[f64], y_true: &[f64]) -> Result<NetGradients> {
    let (pre, outs) = net.trace(x)?;
    dims_match(*net.layer_widths.last().unwrap(), y_true.len())?;
    let layers = net.weights.len();
    let mut gw = vec![DMatrix::zeros(0, 0); layers];
    let mut gb = vec![DVector::zeros(0); layers];
    let err = &outs[layers] - DVector::from_column_slice(y_true);
    let act = net.activations[layers - 1];
    let mut delta = err.component_mul(&pre[layers - 1].map(|z| act.derivative(z)));
    for l in (0..layers).rev() {
        gw[l] = &delta * outs[l].transpose();
        gb[l] = delta.clone();
        if l > 0 {
            let act = net.activations[l - 1];
            delta = (net.weights[l].transpose() * &delta)
                .component_mul(&pre[l - 1].map(|z| act.derivative(z)));
        }
    }
    Ok(NetGradients {
        weights: gw,
        biases: gb,
    })
}

/// `exp(βz_i) / Σ exp(βz_j)`, shifted by the maximum so large logits are safe.
pub fn softmax(z: &[f64], beta: f64) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::InvalidInput("softmax of an empty vector".into()));
    }
    if !beta.is_finite() || z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("softmax needs finite inputs".into()));
    }
    let scaled: Vec<f64> = z.iter().map(|v| beta * v).collect();
    let top = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scaled.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = e.iter().sum();
    Ok(e.into_iter().map(|v| v / total).collect())
}

/// Valid-region convolution `out[n] = Σ_k g[k]·f[n + K − 1 − k]`.
pub fn conv1d_valid(f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if g.is_empty() || g.len() > f.len() {
        return Err(Error::InvalidInput(format!(
            "kernel of length {} does not fit a signal of length {}",
            g.len(),
            f.len()
        )));
    }
    let k = g.len();
    Ok((0..=f.len() - k)
        .map(|n| (0..k).map(|j| g[j] * f[n + k - 1 - j]).sum())
        .collect())
}

/// Banded matrix `W` with `W·f = conv1d_valid(f, g)`.
pub fn conv_as_matrix(g: &[f64], len_f: usize) -> Result<DMatrix<f64>> {
    if g.is_empty() || g.len() > len_f {
        return Err(Error::InvalidInput(format!(
            "kernel of length {} does not fit a signal of length {len_f}",
            g.len()
        )));
    }
    let k = g.len();
    let mut w = DMatrix::zeros(len_f - k + 1, len_f);
    for n in 0..w.nrows() {
        for j in 0..k {
            w[(n, n + k - 1 - j)] = g[j];
        }
    }
    Ok(w)
}

/// `w − λ·grad`.
pub fn gd_step(w: &[f64], grad: &[f64], lambda: f64) -> Result<Vec<f64>> {
    dims_match(w.len(), grad.len())?;
    Ok(w.iter().zip(grad).map(|(a, g)| a - lambda * g).collect())
}

/// Something trainable by [`minibatch_train`] on the squared error.
pub trait Model {
    fn parameters(&self) -> Vec<f64>;
    fn set_parameters(&mut self, params: &[f64]) -> Result<()>;
    /// `(½‖y − f(x)‖², ∇ of that loss)`.
    fn sample_gradient(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// `f(x) = wᵀx`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
}

impl Model for LinearModel {
    fn parameters(&self) -> Vec<f64> {
        self.weights.clone()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        dims_match(self.weights.len(), params.len())?;
        self.weights.copy_from_slice(params);
        Ok(())
    }

    fn sample_gradient(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
        dims_match(1, y.len())?;
        let r = y[0] - perceptron_forward(&self.weights, x)?;
        Ok((0.5 * r * r, x.iter().map(|v| -r * v).collect()))
    }
}

impl Model for DenseNet {
    /// Layer by layer: weights (column-major), then biases.
    fn parameters(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>())
            .collect()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let total: usize = self.weights.iter().zip(&self.biases).map(|(w, b)| w.len() + b.len()).sum();
        dims_match(total, params.len())?;
        let mut it = params.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut().chain(b.iter_mut()).for_each(|v| *v = it.next().unwrap());
        }
        Ok(())
    }

    fn sample_gradient(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = self.forward(x)?;
        dims_match(f.len(), y.len())?;
        let loss = 0.5 * f.iter().zip(y).map(|(a, b)| (b - a).powi(2)).sum::<f64>();
        let g = backprop_gradients(self, x, y)?;
        let flat = g
            .weights
            .iter()
            .zip(&g.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>())
            .collect();
        Ok((loss, flat))
    }
}

/// One step on the samples `batch` (summed in the given order):
/// `w ← w − λ/(2m)·Σ ∇(y − f)²`, i.e. `λ` times the mean gradient of the
/// halved squared error.
fn batch_step<M: Model>(
    model: &mut M,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    batch: &[usize],
    lambda: f64,
) -> Result<()> {
    let mut w = model.parameters();
    let mut sum = vec![0.0; w.len()];
    for &i in batch {
        let (_, g) = model.sample_gradient(&inputs[i], &targets[i])?;
        sum.iter_mut().zip(&g).for_each(|(s, gi)| *s += gi);
    }
    let scale = lambda / batch.len() as f64;
    w.iter_mut().zip(&sum).for_each(|(wi, s)| *wi -= scale * s);
    model.set_parameters(&w)
}

fn scalar_targets(y: &[f64]) -> Vec<Vec<f64>> {
    y.iter().map(|&v| vec![v]).collect()
}

/// Full-batch perceptron update `w + (λ/n)·Σ (y_i − wᵀx_i)·x_i`.
pub fn perceptron_batch_update(w: &[f64], x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    dims_match(x.len(), y.len())?;
    if x.is_empty() {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    let mut model = LinearModel { weights: w.to_vec() };
    let all: Vec<usize> = (0..x.len()).collect();
    batch_step(&mut model, x, &scalar_targets(y), &all, lambda)?;
    Ok(model.weights)
}

/// Single-sample update `w + λ·(y_i − wᵀx_i)·x_i`.
pub fn perceptron_sgd_update(w: &[f64], x: &[f64], y: f64, lambda: f64) -> Result<Vec<f64>> {
    perceptron_batch_update(w, &[x.to_vec()], &[y], lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidInput("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidInput("batch size and epochs must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<M> {
    pub model: M,
    /// Mean `½‖y − f‖²` over the data after each epoch.
    pub loss_history: Vec<f64>,
    pub updates: usize,
}

/// Mean `½‖y − f(x)‖²`.
pub fn mean_loss<M: Model>(model: &M, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets) {
        total += model.sample_gradient(x, y)?.0;
    }
    Ok(total / inputs.len() as f64)
}

/// Mini-batch gradient descent: shuffle every epoch, cut into batches of `m`
/// (the last one may be shorter), one averaged step per batch.
///
/// Samples inside a batch are summed in index order, so `m = n` reproduces
/// full-batch descent exactly.
pub fn minibatch_train<M: Model>(
    mut model: M,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    config: &GdConfig,
) -> Result<TrainOutcome<M>> {
    config.validate()?;
    dims_match(inputs.len(), targets.len())?;
    if inputs.is_empty() {
        return Err(Error::InvalidInput("no training data".into()));
    }
    let n = inputs.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_history = Vec::with_capacity(config.epochs);
    let mut updates = 0;
    for epoch in 0..config.epochs {
        let mut rng = rng_from_seed(subseed_path(config.seed, &[1, epoch as u64]));
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let mut batch = chunk.to_vec();
            batch.sort_unstable();
            batch_step(&mut model, inputs, targets, &batch, config.learning_rate)?;
            updates += 1;
        }
        loss_history.push(mean_loss(&model, inputs, targets)?);
    }
    Ok(TrainOutcome {
        model,
        loss_history,
        updates,
    })
}

/// Four Gaussian clusters at `(±1, ±1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct XorClusters {
    pub points: Vec<[f64; 2]>,
    /// 1 for the diagonal clusters `(−1,−1)`, `(1,1)`; 0 for the others.
    pub labels: Vec<u8>,
}

impl XorClusters {
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.to_vec()).collect()
    }

    /// Labels as regression targets, `+1` for class 1 and `−1` for class 0.
    pub fn signed_targets(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub const XOR_CENTERS: [[f64; 2]; 4] = [[-1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [1.0, -1.0]];

/// `n_per_cluster` points around each center with standard deviation `spread`,
/// interleaved cluster by cluster.
pub fn make_xor_clusters(n_per_cluster: usize, spread: f64, seed: u64) -> Result<XorClusters> {
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidInput("spread must be finite and >= 0".into()));
    }
    let noise = Normal::new(0.0, spread).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let mut points = Vec::with_capacity(4 * n_per_cluster);
    let mut labels = Vec::with_capacity(4 * n_per_cluster);
    for _ in 0..n_per_cluster {
        for c in XOR_CENTERS {
            points.push([c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
            labels.push(u8::from(c[0] == c[1]));
        }
    }
    Ok(XorClusters { points, labels })
}

/// Fraction of samples where `sign(score) ≥ 0` agrees with label 1.
pub fn sign_accuracy(scores: &[f64], labels: &[u8]) -> f64 {
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(s, &l)| u8::from(**s >= 0.0) == l)
        .count();
    hits as f64 / labels.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineModel {
    /// Closed-form least-squares `y = wᵀx` on the raw coordinates.
    Perceptron,
    /// `2 → hidden → 1` tanh network trained by mini-batch descent.
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub n_per_cluster: usize,
    pub spread: f64,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            n_per_cluster: 100,
            spread: 0.3,
            hidden: 8,
            epochs: 200,
            learning_rate: 0.05,
            batch_size: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Test point, true label, predicted label.
    pub test_predictions: Vec<([f64; 2], u8, u8)>,
    /// Per-epoch training loss; empty for the closed-form fit.
    pub loss_history: Vec<f64>,
}

/// Fits a baseline on one cluster draw and scores it on an independent draw of
/// the same size.
pub fn run_xor_baseline(model: BaselineModel, config: &BaselineConfig, seed: u64) -> Result<BaselineResult> {
    let train = make_xor_clusters(config.n_per_cluster, config.spread, subseed(seed, 10))?;
    let test = make_xor_clusters(config.n_per_cluster, config.spread, subseed(seed, 11))?;
    let y = train.signed_targets();
    type Score = Box<dyn Fn(&[f64; 2]) -> Result<f64>>;
    let (score, loss_history): (Score, Vec<f64>) = match model {
        BaselineModel::Perceptron => {
            let x = DMatrix::from_fn(2, train.len(), |r, c| train.points[c][r]);
            let w = crate::encoders::fit_perceptron_closed_form(&x, &y, true)?.weights;
            let w = vec![w[0], w[1]];
            (Box::new(move |p| perceptron_forward(&w, p)), Vec::new())
        }
        BaselineModel::Mlp => {
            let net = DenseNet::new(
                &[2, config.hidden, 1],
                &[Activation::Tanh, Activation::Tanh],
                subseed(seed, 12),
            )?;
            let targets: Vec<Vec<f64>> = y.iter().map(|&v| vec![v]).collect();
            let gd = GdConfig {
                learning_rate: config.learning_rate,
                batch_size: config.batch_size,
                epochs: config.epochs,
                seed: subseed(seed, 13),
            };
            let out = minibatch_train(net, &train.inputs(), &targets, &gd)?;
            let net = out.model;
            (Box::new(move |p| Ok(net.forward(p)?[0])), out.loss_history)
        }
    };
    let scores = |d: &XorClusters| d.points.iter().map(&score).collect::<Result<Vec<f64>>>();
    let train_scores = scores(&train)?;
    let test_scores = scores(&test)?;
    Ok(BaselineResult {
        train_accuracy: sign_accuracy(&train_scores, &train.labels),
        test_accuracy: sign_accuracy(&test_scores, &test.labels),
        test_predictions: test
            .points
            .iter()
            .zip(&test.labels)
            .zip(&test_scores)
            .map(|((p, &l), &s)| (*p, l, u8::from(s >= 0.0)))
            .collect(),
        loss_history,
    })
}
