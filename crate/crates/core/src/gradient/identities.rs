//! Numerical checks of the matrix identities behind the shift rules.
//!
//! Each `verify_*` evaluates both sides independently and returns the largest
//! entrywise discrepancy. [`identity_report`] runs randomised sweeps of all four.

use num_complex::Complex;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::gates::{rotation, PauliAxis};
use crate::linalg::{eigh, expm_hermitian, CMatrix};
use crate::quadrature::unit_interval_rule;
use crate::rng::task_rng;
use crate::scalar::Scalar;

pub const DERIVATIVE_NODES: usize = 64;
pub const BETA_NODES: usize = 128;
/// Step of the central difference compared against the quadrature.
pub const DERIVATIVE_STEP: f64 = 1e-6;

/// `[σ, B]` against `−i(U†(π/2) B U(π/2) − U†(−π/2) B U(−π/2))`,
/// `U(θ) = exp(−iθ/2·σ)`.
pub fn verify_pauli_commutator<T: Scalar>(sigma: PauliAxis, b: &CMatrix<T>) -> Result<T> {
    if b.rows() != 2 || b.cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: b.rows(),
        });
    }
    let lhs = sigma.matrix().commutator(b);
    let conj = |theta: T| {
        let u = rotation(sigma, theta);
        &(&u.matrix().dagger() * b) * u.matrix()
    };
    let q = T::FRAC_PI_2();
    let rhs = (&conj(q) - &conj(-q)).scale(Complex::new(T::zero(), -T::one()));
    Ok(lhs.max_abs_diff(&rhs))
}

/// `e^{λA} B e^{−λA}` against `Σ_{n ≤ n_max} λⁿ/n! · [A, ·]ⁿ B`.
///
/// `A` must be Hermitian with `|λ|·‖A‖₂ ≤ 1` so the truncated tail is tiny.
pub fn verify_bch<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>, lambda: T, n_max: usize) -> Result<T> {
    if !a.is_square() || b.rows() != a.rows() || b.cols() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.rows(),
        });
    }
    let dev = a.hermitian_deviation();
    if dev > T::herm_tol() {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    let spectral = eigh(a)
        .values
        .iter()
        .fold(T::zero(), |m, v| m.max(v.abs()));
    if lambda.abs() * spectral > T::one() {
        return Err(Error::InvalidInput(format!(
            "|lambda|·||A|| = {} exceeds 1",
            lambda.abs() * spectral
        )));
    }
    let lam = Complex::new(lambda, T::zero());
    let lhs = &(&expm_hermitian(a, lam) * b) * &expm_hermitian(a, -lam);
    let mut term = b.clone();
    let mut rhs = b.clone();
    for n in 1..=n_max {
        term = a.commutator(&term).scale_real(lambda / T::lit(n as f64));
        rhs = &rhs + &term;
    }
    Ok(lhs.max_abs_diff(&rhs))
}

/// `∂/∂θ e^{Z(θ)}` for `Z(θ) = −iθ/2·G`: the integral
/// `∫₀¹ e^{(1−s)Z} (∂Z/∂θ) e^{sZ} ds` by Gauss-Legendre against a central
/// difference of the exponential with step [`DERIVATIVE_STEP`].
pub fn verify_exponential_derivative<T: Scalar>(g: &CMatrix<T>, theta: T, nodes: usize) -> Result<T> {
    let dev = g.hermitian_deviation();
    if dev > T::herm_tol() {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    if nodes == 0 {
        return Err(Error::InvalidInput("need at least one quadrature node".into()));
    }
    let eig = eigh(g);
    let half = T::lit(0.5);
    // e^{c·Z(θ)} = exp(−i·c·θ/2·G)
    let exp_z = |scale: T| eig.map(|lam| Complex::new(T::zero(), -(scale * half * lam)).exp());
    let dz = g.scale(Complex::new(T::zero(), -half));

    let mut integral = CMatrix::zeros(g.rows(), g.cols());
    for (s, w) in unit_interval_rule(nodes) {
        let s = T::lit(s);
        let term = &(&exp_z((T::one() - s) * theta) * &dz) * &exp_z(s * theta);
        integral = &integral + &term.scale_real(T::lit(w));
    }
    let h = T::lit(DERIVATIVE_STEP);
    let fd = (&exp_z(theta + h) - &exp_z(theta - h)).scale_real(T::one() / (h + h));
    Ok(integral.max_abs_diff(&fd))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCheck {
    pub closed_form: f64,
    pub numeric_integral: f64,
    pub abs_error: f64,
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// `(n−1)!(k−1)!/(n+k−1)!` against `∫₀¹ (1−s)^{k−1} s^{n−1} ds`.
pub fn verify_beta_identity(k: u32, n: u32) -> Result<BetaCheck> {
    verify_beta_identity_with(k, n, BETA_NODES)
}

/// As [`verify_beta_identity`] with a chosen number of quadrature nodes.
pub fn verify_beta_identity_with(k: u32, n: u32, nodes: usize) -> Result<BetaCheck> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("k and n start at 1".into()));
    }
    // 20! is the largest factorial that fits in u64.
    if n + k - 1 > 20 {
        return Err(Error::InvalidInput(format!(
            "n + k - 1 = {} overflows exact factorials",
            n + k - 1
        )));
    }
    if nodes == 0 {
        return Err(Error::InvalidInput("need at least one quadrature node".into()));
    }
    let num = factorial(u64::from(n - 1)) as f64 * factorial(u64::from(k - 1)) as f64;
    let closed_form = num / factorial(u64::from(n + k - 1)) as f64;
    let numeric_integral: f64 = unit_interval_rule(nodes)
        .into_iter()
        .map(|(s, w)| w * (1.0 - s).powi(k as i32 - 1) * s.powi(n as i32 - 1))
        .sum();
    Ok(BetaCheck {
        closed_form,
        numeric_integral,
        abs_error: (closed_form - numeric_integral).abs(),
    })
}

/// One row of the identity table.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

fn random_complex(rng: &mut impl rand::Rng) -> Complex<f64> {
    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// A random `dim × dim` complex matrix with entries in the unit square.
pub fn random_matrix(dim: usize, rng: &mut impl rand::Rng) -> CMatrix<f64> {
    let rows = (0..dim)
        .map(|_| (0..dim).map(|_| random_complex(rng)).collect())
        .collect();
    CMatrix::from_rows(rows)
}

/// A random Hermitian matrix, `(M + M†)/2`.
pub fn random_hermitian(dim: usize, rng: &mut impl rand::Rng) -> CMatrix<f64> {
    let m = random_matrix(dim, rng);
    (&m + &m.dagger()).scale_real(0.5)
}

/// Runs every identity over `sweep` random instances drawn from `seed`.
///
/// The beta identity is exhaustive over `k, n ≤ 8` regardless of `sweep`.
pub fn identity_report(sweep: usize, seed: u64) -> Result<Vec<IdentityCheck>> {
    let axes = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    let mut rng = task_rng(seed, 0);
    let mut pauli_err: f64 = 0.0;
    for i in 0..sweep {
        let b = random_matrix(2, &mut rng);
        pauli_err = pauli_err.max(verify_pauli_commutator(axes[i % 3], &b)?);
    }

    let mut rng = task_rng(seed, 1);
    let mut bch_err: f64 = 0.0;
    for i in 0..sweep {
        let dim = if i % 2 == 0 { 2 } else { 4 };
        let a = random_hermitian(dim, &mut rng);
        let b = random_matrix(dim, &mut rng);
        bch_err = bch_err.max(verify_bch(&a, &b, 0.1, 20)?);
    }

    let mut rng = task_rng(seed, 2);
    let mut deriv_err: f64 = 0.0;
    for i in 0..sweep {
        let g = axes[i % 3].matrix::<f64>();
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        deriv_err = deriv_err.max(verify_exponential_derivative(&g, theta, DERIVATIVE_NODES)?);
    }

    let mut beta_err: f64 = 0.0;
    let mut beta_cases = 0;
    for k in 1..=8 {
        for n in 1..=8 {
            beta_err = beta_err.max(verify_beta_identity(k, n)?.abs_error);
            beta_cases += 1;
        }
    }

    Ok(vec![
        IdentityCheck {
            name: "pauli-commutator",
            cases: sweep,
            max_error: pauli_err,
            tolerance: 1e-12,
        },
        IdentityCheck {
            name: "bch-series",
            cases: sweep,
            max_error: bch_err,
            tolerance: 1e-10,
        },
        IdentityCheck {
            name: "exponential-derivative",
            cases: sweep,
            max_error: deriv_err,
            tolerance: 1e-8,
        },
        IdentityCheck {
            name: "beta-function",
            cases: beta_cases,
            max_error: beta_err,
            tolerance: 1e-9,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn commutator_of_z_and_x() {
        let x = pauli::x::<f64>();
        assert!(verify_pauli_commutator(PauliAxis::Z, &x).unwrap() < 1e-12);
        let two_i_y = pauli::y::<f64>().scale(Complex::new(0.0, 2.0));
        assert!(pauli::z::<f64>().commutator(&x).max_abs_diff(&two_i_y) < 1e-15);
        let id = CMatrix::<f64>::identity(2);
        assert!(verify_pauli_commutator(PauliAxis::Y, &id).unwrap() < 1e-15);
    }

    #[test]
    fn bch_trivial_cases() {
        let mut rng = task_rng(3, 0);
        let a = random_hermitian(2, &mut rng);
        let b = random_matrix(2, &mut rng);
        assert!(verify_bch(&a, &b, 0.0, 20).unwrap() < 1e-15);
        assert!(verify_bch(&a, &b, 0.1, 20).unwrap() < 1e-10);
        let da = CMatrix::diagonal(&[Complex::new(0.3, 0.0), Complex::new(-0.8, 0.0)]);
        let db = CMatrix::diagonal(&[Complex::new(1.0, 2.0), Complex::new(-0.5, 0.1)]);
        assert!(verify_bch(&da, &db, 1.0, 20).unwrap() < 1e-14);
        assert!(verify_bch(&a.scale_real(100.0), &b, 1.0, 20).is_err());
    }

    #[test]
    fn exponential_derivative_cases() {
        let z = pauli::z::<f64>();
        assert!(verify_exponential_derivative(&z, 0.0, 64).unwrap() < 1e-8);
        for theta in [0.3, 1.7, 3.0] {
            for g in [pauli::x::<f64>(), pauli::y(), z.clone()] {
                assert!(verify_exponential_derivative(&g, theta, 64).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn beta_examples() {
        let one = verify_beta_identity(1, 1).unwrap();
        assert_eq!(one.closed_form, 1.0);
        assert!(one.abs_error < 1e-14);
        let c = verify_beta_identity(2, 3).unwrap();
        assert!((c.closed_form - 1.0 / 12.0).abs() < 1e-16);
        assert!((c.numeric_integral - 1.0 / 12.0).abs() < 1e-14);
        assert!(verify_beta_identity(0, 3).is_err());
        assert!(verify_beta_identity(11, 11).is_err());
        assert!(verify_beta_identity(10, 11).is_ok());
    }

    #[test]
    fn report_passes() {
        let rows = identity_report(50, 11).unwrap();
        assert_eq!(rows.len(), 4);
        for r in rows {
            assert!(r.passed(), "{r:?}");
        }
    }
}
