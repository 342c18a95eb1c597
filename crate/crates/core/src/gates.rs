//! Gate matrices: Paulis, Clifford+T, axis rotations, the two-qubit
//! controlled family, and the ZYZ Euler decomposition of one-qubit unitaries.
//!
//! Rotations follow `R_G(θ) = exp(−iθ/2 · G)`.

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{pauli, CMatrix};
use crate::scalar::Scalar;

/// Rotation axis of a Pauli-generated gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix<T: Scalar>(self) -> CMatrix<T> {
        match self {
            PauliAxis::X => pauli::x(),
            PauliAxis::Y => pauli::y(),
            PauliAxis::Z => pauli::z(),
        }
    }
}

/// A unitary acting on one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix<T> {
    arity: usize,
    matrix: CMatrix<T>,
}

impl<T: Scalar> GateMatrix<T> {
    /// Validates shape and unitarity.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        let arity = match (matrix.rows(), matrix.cols()) {
            (2, 2) => 1,
            (4, 4) => 2,
            (r, c) => {
                return Err(Error::InvalidInput(format!(
                    "gate matrix must be 2x2 or 4x4, got {r}x{c}"
                )))
            }
        };
        let dev = matrix.unitarity_deviation();
        if dev > T::norm_tol() {
            return Err(Error::NotUnitary {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { arity, matrix })
    }

    pub(crate) fn known(arity: usize, matrix: CMatrix<T>) -> Self {
        debug_assert_eq!(matrix.rows(), 1 << arity);
        Self { arity, matrix }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self::known(self.arity, self.matrix.dagger())
    }

    /// `self · other` (apply `other` first).
    pub fn then_after(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        Self::known(self.arity, &self.matrix * &other.matrix)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

fn re<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

pub fn identity<T: Scalar>() -> GateMatrix<T> {
    GateMatrix::known(1, CMatrix::identity(2))
}

pub fn pauli_x<T: Scalar>() -> GateMatrix<T> {
    GateMatrix::known(1, pauli::x())
}

pub fn pauli_y<T: Scalar>() -> GateMatrix<T> {
    GateMatrix::known(1, pauli::y())
}

pub fn pauli_z<T: Scalar>() -> GateMatrix<T> {
    GateMatrix::known(1, pauli::z())
}

pub fn hadamard<T: Scalar>() -> GateMatrix<T> {
    let h = T::FRAC_1_SQRT_2();
    GateMatrix::known(
        1,
        CMatrix::from_rows(vec![vec![re(h), re(h)], vec![re(h), re(-h)]]),
    )
}

pub fn phase_s<T: Scalar>() -> GateMatrix<T> {
    GateMatrix::known(1, CMatrix::diagonal(&[Complex::one(), Complex::i()]))
}

/// `diag(1, e^{iπ/4})`.
pub fn t_gate<T: Scalar>() -> GateMatrix<T> {
    let q = T::FRAC_PI_4();
    GateMatrix::known(
        1,
        CMatrix::diagonal(&[Complex::one(), Complex::new(q.cos(), q.sin())]),
    )
}

pub fn rx<T: Scalar>(theta: T) -> GateMatrix<T> {
    let half = theta / T::lit(2.0);
    let (c, s) = (half.cos(), half.sin());
    let mis = Complex::new(T::zero(), -s);
    GateMatrix::known(1, CMatrix::from_rows(vec![vec![re(c), mis], vec![mis, re(c)]]))
}

pub fn ry<T: Scalar>(theta: T) -> GateMatrix<T> {
    let half = theta / T::lit(2.0);
    let (c, s) = (half.cos(), half.sin());
    GateMatrix::known(
        1,
        CMatrix::from_rows(vec![vec![re(c), re(-s)], vec![re(s), re(c)]]),
    )
}

pub fn rz<T: Scalar>(theta: T) -> GateMatrix<T> {
    let half = theta / T::lit(2.0);
    GateMatrix::known(
        1,
        CMatrix::diagonal(&[Complex::from_polar(T::one(), -half), Complex::from_polar(T::one(), half)]),
    )
}

pub fn rotation<T: Scalar>(axis: PauliAxis, theta: T) -> GateMatrix<T> {
    match axis {
        PauliAxis::X => rx(theta),
        PauliAxis::Y => ry(theta),
        PauliAxis::Z => rz(theta),
    }
}

/// Block-diagonal `[I, 0; 0, U]`: qubit 0 of the pair is the control.
pub fn controlled<T: Scalar>(gate: &GateMatrix<T>) -> Result<GateMatrix<T>> {
    if gate.arity != 1 {
        return Err(Error::InvalidInput(format!(
            "controlled() takes a one-qubit gate, got arity {}",
            gate.arity
        )));
    }
    let mut m = CMatrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = gate.matrix[(i, j)];
        }
    }
    Ok(GateMatrix::known(2, m))
}

pub fn cnot<T: Scalar>() -> GateMatrix<T> {
    controlled(&pauli_x()).expect("one-qubit gate")
}

pub fn cz<T: Scalar>() -> GateMatrix<T> {
    controlled(&pauli_z()).expect("one-qubit gate")
}

/// Controlled-S: `diag(1, 1, 1, i)`.
pub fn cphase<T: Scalar>() -> GateMatrix<T> {
    controlled(&phase_s()).expect("one-qubit gate")
}

pub fn swap<T: Scalar>() -> GateMatrix<T> {
    GateMatrix::known(
        2,
        CMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]),
    )
}

/// `{CNOT, S, Rx(π/4)}`. Substituting other rotations for `Rx(π/4)` is
/// claimed to preserve universality, but no construction is implemented.
pub fn universal_set<T: Scalar>() -> Vec<(&'static str, GateMatrix<T>)> {
    vec![
        ("CNOT", cnot()),
        ("S", phase_s()),
        ("RX(pi/4)", rx(T::FRAC_PI_4())),
    ]
}

/// `U = e^{iα} Rz(β) Ry(γ) Rz(δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzDecomposition<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Scalar> ZyzDecomposition<T> {
    pub fn reconstruct(&self) -> GateMatrix<T> {
        let m = &(&rz(self.beta).matrix * &ry(self.gamma).matrix) * &rz(self.delta).matrix;
        GateMatrix::known(1, m.scale(Complex::from_polar(T::one(), self.alpha)))
    }
}

fn wrap_2pi<T: Scalar>(x: T) -> T {
    let two_pi = T::TAU();
    let r = x % two_pi;
    let r = if r < T::zero() { r + two_pi } else { r };
    if r >= two_pi {
        T::zero()
    } else {
        r
    }
}

/// Euler angles of a one-qubit unitary.
///
/// `γ ∈ [0, π]` and `α, β, δ ∈ [0, 2π)`; within these ranges the angles are
/// unique for `0 < γ < π`. When `γ = 0` the matrix is diagonal and only `β + δ`
/// is identifiable, so β is set to 0; the anti-diagonal case `γ = π` likewise
/// sets β to 0.
pub fn zyz_decompose<T: Scalar>(u: &GateMatrix<T>) -> Result<ZyzDecomposition<T>> {
    if u.arity != 1 {
        return Err(Error::InvalidInput("ZYZ decomposition needs a one-qubit gate".into()));
    }
    let dev = u.matrix.unitarity_deviation();
    if dev > T::norm_tol() {
        return Err(Error::NotUnitary {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    let m = &u.matrix;
    let (u00, u01, u10, u11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let two = T::lit(2.0);
    let cos_half = ((u00.norm() + u11.norm()) / two).min(T::one());
    let sin_half = ((u10.norm() + u01.norm()) / two).min(T::one());
    let gamma = two * sin_half.atan2(cos_half);

    let tiny = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    // Phases: u00 ~ α − S/2, u11 ~ α + S/2, u10 ~ α + D/2, −u01 ~ α − D/2,
    // with S = β + δ and D = β − δ.
    let (beta, delta) = if sin_half <= tiny {
        (T::zero(), (u11 * u00.conj()).arg())
    } else if cos_half <= tiny {
        (T::zero(), -(u10 * (-u01).conj()).arg())
    } else {
        let sum = (u11 * u00.conj()).arg();
        let mut diff = (u10 * (-u01).conj()).arg();
        // S and D are read modulo 2π but enter as S/2, D/2: fix the relative
        // branch so the diagonal and off-diagonal phases agree.
        let alpha_diag = u00.arg() + sum / two;
        let mismatch = (u10 * Complex::from_polar(T::one(), -(alpha_diag + diff / two))).arg();
        if mismatch.abs() > T::FRAC_PI_2() {
            diff += T::TAU();
        }
        ((sum + diff) / two, (sum - diff) / two)
    };
    let snap = |x: T| {
        let w = wrap_2pi(x);
        if T::TAU() - w < tiny {
            T::zero()
        } else {
            w
        }
    };
    let (beta, delta) = (snap(beta), snap(delta));

    // α is unique once β, γ, δ are fixed; read it off the best-conditioned entry.
    let partial = &(&rz(beta).matrix * &ry(gamma).matrix) * &rz(delta).matrix;
    let (target, model) = if cos_half >= sin_half {
        (u00, partial[(0, 0)])
    } else {
        (u10, partial[(1, 0)])
    };
    let alpha = snap((target * model.conj()).arg());

    Ok(ZyzDecomposition {
        alpha,
        beta,
        gamma,
        delta,
    })
}
