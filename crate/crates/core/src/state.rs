//! Qubit statevectors, Hermitian observables and single-qubit measurement.
//!
//! Qubit 0 is the leftmost label and the most significant bit of the amplitude
//! index: `|q0 q1 … q(n-1)⟩` lives at index `Σ q_k · 2^(n-1-k)`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{pauli, CMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    num_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

/// Bit position (from the least significant end) of `qubit` in an `n`-qubit index.
#[inline]
pub(crate) fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

impl<T: Scalar> StateVector<T> {
    /// Wraps raw amplitudes; the vector need not be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but rejects unnormalized input.
    pub fn normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let s = Self::from_amplitudes(amplitudes)?;
        s.require_normalized()?;
        Ok(s)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(
            amplitudes
                .iter()
                .map(|&x| Complex::new(T::lit(x), T::zero()))
                .collect(),
        )
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(num_qubits >= 1 && index < (1 << num_qubits));
        let mut amplitudes = vec![Complex::zero(); 1 << num_qubits];
        amplitudes[index] = Complex::one();
        Self {
            num_qubits,
            amplitudes,
        }
    }

    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self {
            num_qubits: 1,
            amplitudes: vec![Complex::new(h, T::zero()); 2],
        }
    }

    /// `(|0⟩ − |1⟩)/√2`.
    pub fn minus() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self {
            num_qubits: 1,
            amplitudes: vec![Complex::new(h, T::zero()), Complex::new(-h, T::zero())],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() < T::norm_tol()
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                norm_sqr: self.norm_sqr().to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// `|a_i|²` for every basis index.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> T {
        let mask = qubit_mask(self.num_qubits, qubit);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `⟨Z_qubit⟩` without building the observable matrix.
    pub fn z_expectation(&self, qubit: usize) -> T {
        let mask = qubit_mask(self.num_qubits, qubit);
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// Largest entrywise distance to `other` (no phase alignment).
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

fn check_same_width<T>(a: &StateVector<T>, b: &StateVector<T>) -> Result<()> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: a.amplitudes.len(),
            got: b.amplitudes.len(),
        });
    }
    Ok(())
}

/// `⟨bra|ket⟩ = Σ conj(bra_i)·ket_i`.
pub fn inner_product<T: Scalar>(bra: &StateVector<T>, ket: &StateVector<T>) -> Result<Complex<T>> {
    check_same_width(bra, ket)?;
    Ok(bra
        .amplitudes
        .iter()
        .zip(&ket.amplitudes)
        .map(|(b, k)| b.conj() * k)
        .sum())
}

/// `|⟨target|state⟩|²`; both states must be normalized.
pub fn probability_of<T: Scalar>(state: &StateVector<T>, target: &StateVector<T>) -> Result<T> {
    check_same_width(state, target)?;
    state.require_normalized()?;
    target.require_normalized()?;
    let p = inner_product(target, state)?.norm_sqr();
    Ok(p.min(T::one()))
}

/// `|a⟩ ⊗ |b⟩`; `a` occupies the leading (more significant) qubits.
pub fn tensor_product<T: Scalar>(a: &StateVector<T>, b: &StateVector<T>) -> Result<StateVector<T>> {
    a.require_normalized()?;
    b.require_normalized()?;
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    Ok(StateVector {
        num_qubits: a.num_qubits + b.num_qubits,
        amplitudes,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum ObservableRepr<T> {
    Dense(CMatrix<T>),
    PauliZ { qubit: usize },
}

/// A Hermitian operator on `num_qubits` qubits. Construction validates
/// Hermiticity, so every value of this type is a legal observable.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable<T> {
    num_qubits: usize,
    repr: ObservableRepr<T>,
}

impl<T: Scalar> HermitianObservable<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        let n = matrix.rows();
        if !matrix.is_square() || n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "observable must be 2^n x 2^n, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > T::herm_tol() {
            return Err(Error::NotHermitian {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            num_qubits: n.trailing_zeros() as usize,
            repr: ObservableRepr::Dense(matrix),
        })
    }

    /// Pauli-Z on `qubit`, identity elsewhere.
    pub fn pauli_z(num_qubits: usize, qubit: usize) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(Error::QubitOutOfRange { qubit, num_qubits });
        }
        Ok(Self {
            num_qubits,
            repr: ObservableRepr::PauliZ { qubit },
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// `Some(q)` when this is the single-qubit readout observable `Z_q`.
    pub fn readout_qubit(&self) -> Option<usize> {
        match self.repr {
            ObservableRepr::PauliZ { qubit } => Some(qubit),
            ObservableRepr::Dense(_) => None,
        }
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn matrix(&self) -> CMatrix<T> {
        match &self.repr {
            ObservableRepr::Dense(m) => m.clone(),
            ObservableRepr::PauliZ { qubit } => {
                let mut m = CMatrix::identity(1);
                for q in 0..self.num_qubits {
                    let f = if q == *qubit { pauli::z() } else { pauli::i() };
                    m = m.kron(&f);
                }
                m
            }
        }
    }
}

/// `⟨ψ|A|ψ⟩` for a normalized state.
pub fn expectation<T: Scalar>(state: &StateVector<T>, obs: &HermitianObservable<T>) -> Result<T> {
    if state.num_qubits != obs.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << obs.num_qubits,
            got: state.dim(),
        });
    }
    state.require_normalized()?;
    match &obs.repr {
        ObservableRepr::PauliZ { qubit } => Ok(state.z_expectation(*qubit)),
        ObservableRepr::Dense(m) => {
            let a_psi = m.apply(&state.amplitudes);
            let value: Complex<T> = state
                .amplitudes
                .iter()
                .zip(&a_psi)
                .map(|(p, q)| p.conj() * q)
                .sum();
            debug_assert!(
                value.im.abs() < T::norm_tol() * (T::one() + m.max_abs()),
                "imaginary residual {:?} on Hermitian expectation",
                value.im
            );
            Ok(value.re)
        }
    }
}

/// One branch of a computational-basis measurement of a single qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome<T> {
    pub bit: u8,
    /// Eigenvalue of `Z` for this branch (+1 for bit 0, −1 for bit 1).
    pub eigenvalue: T,
    pub probability: T,
    /// Collapsed, renormalized state; `None` when the branch is degenerate.
    pub post_state: Option<StateVector<T>>,
}

/// Measures `qubit` in the computational basis and returns the `[0, 1]` branches.
pub fn measure_qubit<T: Scalar>(
    state: &StateVector<T>,
    qubit: usize,
) -> Result<[MeasurementOutcome<T>; 2]> {
    if qubit >= state.num_qubits {
        return Err(Error::QubitOutOfRange {
            qubit,
            num_qubits: state.num_qubits,
        });
    }
    state.require_normalized()?;
    let mask = qubit_mask(state.num_qubits, qubit);
    let branch = |bit: u8| {
        let keep = |i: usize| ((i & mask != 0) as u8) == bit;
        let p: T = state
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let post_state = (p >= T::branch_floor()).then(|| {
            let k = T::one() / p.sqrt();
            StateVector {
                num_qubits: state.num_qubits,
                amplitudes: state
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(i, a)| if keep(i) { a * k } else { Complex::zero() })
                    .collect(),
            }
        });
        MeasurementOutcome {
            bit,
            eigenvalue: if bit == 0 { T::one() } else { -T::one() },
            probability: p,
            post_state,
        }
    };
    Ok([branch(0), branch(1)])
}

/// Whether a two-qubit state factors as `|a⟩ ⊗ |b⟩`: the 2×2 amplitude matrix
/// must have a vanishing second singular value.
pub fn is_separable_2q<T: Scalar>(state: &StateVector<T>) -> Result<bool> {
    if state.num_qubits != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: state.dim(),
        });
    }
    let a = &state.amplitudes;
    // σ1² + σ2² = ‖M‖_F², σ1·σ2 = |det M|
    let fro = state.norm_sqr();
    let det = (a[0] * a[3] - a[1] * a[2]).norm();
    let half = fro / T::lit(2.0);
    let disc = (half * half - det * det).max(T::zero()).sqrt();
    let sigma_min = (half - disc).max(T::zero()).sqrt();
    Ok(sigma_min < T::lit(1e-9))
}
