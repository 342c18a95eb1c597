//! Embedding classical feature vectors into circuits.
//!
//! Features are expected in `[0, 1]` and become rotation angles `π·x`.
//! [`MinMaxScaler`] produces that range from raw data.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::circuit::{Angle, Circuit, CircuitBuilder, GateKind};
use crate::error::{Error, Result};

fn check_unit_range(features: &[f64]) -> Result<()> {
    match features.iter().position(|x| !(0.0..=1.0).contains(x)) {
        Some(i) => Err(Error::InvalidInput(format!(
            "feature {i} = {} is outside [0, 1]; scale the data first",
            features[i]
        ))),
        None => Ok(()),
    }
}

/// Per-column min-max scaling to `[0, 1]`, fit on training data and reused
/// (with clamping) on anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    /// `rows` are samples.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot fit a scaler on no data".into()))?;
        let dim = first.len();
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite value in column {j}")));
                }
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                // A constant column carries no information; park it at 0.
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// One `RX(π·x_i)` on qubit `i` per feature.
pub fn angle_encode(features: &[f64], num_qubits: usize) -> Result<Circuit> {
    if features.len() > num_qubits {
        return Err(Error::InvalidInput(format!(
            "{} features do not fit on {num_qubits} qubits",
            features.len()
        )));
    }
    check_unit_range(features)?;
    let mut b = CircuitBuilder::new(num_qubits);
    for (q, &x) in features.iter().enumerate() {
        b = b.rotation(GateKind::RX, &[q], PI * x)?;
    }
    b.build()
}

/// Layout `(D, Q, L, G)`: `D` features over `Q` qubits, `L` layers of one
/// `G`-rotation block per qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockEncodingSpec {
    pub data_dim: usize,
    pub num_qubits: usize,
    pub layers: usize,
    pub gates_per_block: usize,
}

impl BlockEncodingSpec {
    pub fn new(data_dim: usize, num_qubits: usize, layers: usize, gates_per_block: usize) -> Result<Self> {
        if data_dim == 0 || num_qubits == 0 || layers == 0 || gates_per_block == 0 {
            return Err(Error::InvalidInput("D, Q, L and G must all be >= 1".into()));
        }
        let spec = Self {
            data_dim,
            num_qubits,
            layers,
            gates_per_block,
        };
        if data_dim > spec.capacity() {
            return Err(Error::LayoutTooSmall {
                data_dim,
                capacity: spec.capacity(),
            });
        }
        Ok(spec)
    }

    /// `Q·L·G` rotation slots.
    pub fn capacity(&self) -> usize {
        self.num_qubits * self.layers * self.gates_per_block
    }

    /// Flat feature index served by (layer, qubit, position in block).
    pub fn slot_index(&self, layer: usize, qubit: usize, position: usize) -> usize {
        (layer * self.num_qubits + qubit) * self.gates_per_block + position
    }
}

/// Axis of the `position`-th rotation in a block: X, Z, X, Z, ...
pub fn block_axis(position: usize) -> GateKind {
    if position.is_multiple_of(2) {
        GateKind::RX
    } else {
        GateKind::RZ
    }
}

fn block_circuit(spec: &BlockEncodingSpec, angle: impl Fn(usize) -> Angle) -> Result<Circuit> {
    let q = spec.num_qubits;
    let mut b = CircuitBuilder::new(q);
    for layer in 0..spec.layers {
        for qubit in 0..q {
            for pos in 0..spec.gates_per_block {
                let idx = spec.slot_index(layer, qubit, pos);
                b = b.gate(block_axis(pos), &[qubit], Some(angle(idx)))?;
            }
        }
        for qubit in 0..q.saturating_sub(1) {
            b = b.fixed(GateKind::CNOT, &[qubit, qubit + 1])?;
        }
    }
    b.build()
}

/// Block encoding with the features baked in as literal angles. Slots past `D`
/// get angle 0.
pub fn block_encode(features: &[f64], spec: &BlockEncodingSpec) -> Result<Circuit> {
    if features.len() != spec.data_dim {
        return Err(Error::DimensionMismatch {
            expected: spec.data_dim,
            got: features.len(),
        });
    }
    check_unit_range(features)?;
    block_circuit(spec, |i| Angle::Literal(features.get(i).map_or(0.0, |x| PI * x)))
}

/// The same circuit with feature `i` bound to slot `$i`; bind it with
/// `π·features`. Padding rotations stay literal zeros.
pub fn block_encoding_template(spec: &BlockEncodingSpec) -> Result<Circuit> {
    let d = spec.data_dim;
    let c = block_circuit(spec, |i| {
        if i < d {
            Angle::Slot(i)
        } else {
            Angle::Literal(0.0)
        }
    })?;
    Circuit::new(c.num_qubits(), c.ops().to_vec(), d)
}

/// Smallest `L·G ≥ ⌈D/Q⌉`; among equal products the most balanced pair, and
/// of the two balanced orientations the one with fewer gates per block.
pub fn suggest_layout(data_dim: usize, num_qubits: usize) -> Result<BlockEncodingSpec> {
    if data_dim == 0 || num_qubits == 0 {
        return Err(Error::InvalidInput("D and Q must be >= 1".into()));
    }
    let product = data_dim.div_ceil(num_qubits);
    let (layers, gates) = (1..=product)
        .filter(|&g| product.is_multiple_of(g))
        .map(|g| (product / g, g))
        .min_by_key(|&(l, g)| (l.abs_diff(g), g))
        .expect("1 divides everything");
    BlockEncodingSpec::new(data_dim, num_qubits, layers, gates)
}

/// Least-squares perceptron weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronFit {
    pub weights: DVector<f64>,
    /// `XXᵀ` was singular and the pseudo-inverse was used.
    pub used_pseudo_inverse: bool,
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let tol = top * m.nrows().max(m.ncols()) as f64 * f64::EPSILON;
    sv.iter().filter(|&&s| s > tol).count()
}

/// `w = y·Xᵀ·(X·Xᵀ)⁻¹` for `X` with one sample per column and `y ∈ {−1, +1}`.
///
/// A rank-deficient `X·Xᵀ` is an error unless `allow_pseudo_inverse`.
pub fn fit_perceptron_closed_form(
    x: &DMatrix<f64>,
    y: &[f64],
    allow_pseudo_inverse: bool,
) -> Result<PerceptronFit> {
    if x.ncols() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: y.len(),
        });
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::InvalidInput("empty design matrix".into()));
    }
    let y = DVector::from_column_slice(y);
    let gram = x * x.transpose();
    let rhs = x * &y;
    let dim = gram.nrows();
    let rank = numerical_rank(&gram);
    if rank == dim {
        if let Some(w) = gram.clone().cholesky().map(|c| c.solve(&rhs)) {
            return Ok(PerceptronFit {
                weights: w,
                used_pseudo_inverse: false,
            });
        }
    }
    if !allow_pseudo_inverse {
        return Err(Error::RankDeficient { rank, dim });
    }
    let pinv = gram
        .pseudo_inverse(f64::EPSILON * dim as f64)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(PerceptronFit {
        weights: pinv * rhs,
        used_pseudo_inverse: true,
    })
}

/// `N` linear classifiers, one per output bit.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronEnsemble {
    weights: Vec<DVector<f64>>,
}

impl PerceptronEnsemble {
    pub fn new(weights: Vec<DVector<f64>>) -> Result<Self> {
        let first = weights
            .first()
            .ok_or_else(|| Error::InvalidInput("ensemble needs at least one perceptron".into()))?;
        let dim = first.len();
        for w in &weights {
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite perceptron weight".into()));
            }
        }
        Ok(Self { weights })
    }

    pub fn num_bits(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights(&self) -> &[DVector<f64>] {
        &self.weights
    }
}

/// Sample range `[start, end)` of shard `i` out of `n` split `parts` ways;
/// sizes differ by at most one.
pub fn shard_range(n: usize, parts: usize, i: usize) -> (usize, usize) {
    (i * n / parts, (i + 1) * n / parts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFit {
    pub ensemble: PerceptronEnsemble,
    /// Shards whose fit fell back to the pseudo-inverse.
    pub pseudo_inverse_shards: Vec<usize>,
}

/// Fits perceptron `i` on the `i`-th contiguous shard of the columns of `x`.
pub fn train_ensemble(
    x: &DMatrix<f64>,
    y: &[f64],
    num_bits: usize,
    allow_pseudo_inverse: bool,
) -> Result<EnsembleFit> {
    let n = x.ncols();
    if num_bits == 0 || n < num_bits {
        return Err(Error::InvalidInput(format!(
            "cannot split {n} samples into {num_bits} shards"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let fits = (0..num_bits)
        .into_par_iter()
        .map(|i| {
            let (a, b) = shard_range(n, num_bits, i);
            let xs = x.columns(a, b - a).into_owned();
            fit_perceptron_closed_form(&xs, &y[a..b], allow_pseudo_inverse)
        })
        .collect::<Result<Vec<_>>>()?;
    let pseudo_inverse_shards = fits
        .iter()
        .enumerate()
        .filter(|(_, f)| f.used_pseudo_inverse)
        .map(|(i, _)| i)
        .collect();
    Ok(EnsembleFit {
        ensemble: PerceptronEnsemble::new(fits.into_iter().map(|f| f.weights).collect())?,
        pseudo_inverse_shards,
    })
}

/// Bit `i` is 1 when `w_i·x ≥ 0`.
pub fn binary_reduce(ensemble: &PerceptronEnsemble, x: &[f64]) -> Result<Vec<u8>> {
    if x.len() != ensemble.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.input_dim(),
            got: x.len(),
        });
    }
    let x = DVector::from_column_slice(x);
    Ok(ensemble
        .weights
        .iter()
        .map(|w| u8::from(w.dot(&x) >= 0.0))
        .collect())
}
