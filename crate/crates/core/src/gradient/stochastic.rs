//! Stochastic shift rule for gates `U(θ) = exp(−ia(H + θV))` whose generator
//! does not commute with its own derivative.
//!
//! With `G = H + θV` and `V² = I`,
//!
//! ```text
//! ∂C/∂θ = a ∫₀¹ ⟨ψ|W₊† A W₊|ψ⟩ − ⟨ψ|W₋† A W₋|ψ⟩ ds,
//! W± = exp(−isaG) · U_V(±π/2) · exp(−i(1−s)aG),   U_V(φ) = exp(−iφ/2·V),
//! ```
//!
//! estimated by averaging over `s ~ U(0, 1)`. With `a = ½`, `H = 0` and `V` a
//! Pauli, `U(θ)` is the library rotation about `V` and the integrand no longer
//! depends on `s`.

use num_complex::Complex;
use rand::Rng as _;
use rayon::prelude::*;

use super::{GradientEstimate, GradientMethod};
use crate::error::{Error, Result};
use crate::linalg::{eigh, CMatrix, HermitianEigen};
use crate::rng::task_rng;
use crate::scalar::Scalar;
use crate::state::{expectation, HermitianObservable, StateVector};

/// Largest register the dense construction accepts.
pub const MAX_QUBITS: usize = 3;

/// Generator `H + θV` of a parametrised gate.
#[derive(Debug, Clone)]
pub struct GeneratorPair<T> {
    h: CMatrix<T>,
    v: CMatrix<T>,
    theta: T,
}

impl<T: Scalar> GeneratorPair<T> {
    pub fn new(h: CMatrix<T>, v: CMatrix<T>, theta: T) -> Result<Self> {
        let dim = h.rows();
        if !h.is_square() || !dim.is_power_of_two() || !(2..=1 << MAX_QUBITS).contains(&dim) {
            return Err(Error::InvalidInput(format!(
                "generator must be 2^n x 2^n with 1 <= n <= {MAX_QUBITS}, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        if v.rows() != dim || v.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.rows(),
            });
        }
        for m in [&h, &v] {
            let dev = m.hermitian_deviation();
            if dev > T::herm_tol() {
                return Err(Error::NotHermitian {
                    deviation: dev.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let sq = (&v * &v).max_abs_diff(&CMatrix::identity(dim));
        if sq > T::herm_tol() {
            return Err(Error::InvalidInput(format!(
                "V must square to the identity (deviation {sq})"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidInput("theta must be finite".into()));
        }
        Ok(Self { h, v, theta })
    }

    pub fn h(&self) -> &CMatrix<T> {
        &self.h
    }

    pub fn v(&self) -> &CMatrix<T> {
        &self.v
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// Same `H` and `V` at another `θ`.
    pub fn with_theta(&self, theta: T) -> Self {
        Self {
            theta,
            ..self.clone()
        }
    }

    /// `H + θV`.
    pub fn generator(&self) -> CMatrix<T> {
        &self.h + &self.v.scale_real(self.theta)
    }

    fn eigen(&self) -> HermitianEigen<T> {
        eigh(&self.generator())
    }

    /// `U_V(φ) = exp(−iφ/2·V) = cos(φ/2)·I − i·sin(φ/2)·V`.
    pub fn v_rotation(&self, phi: T) -> CMatrix<T> {
        let half = phi / T::lit(2.0);
        let id = CMatrix::identity(self.dim()).scale_real(half.cos());
        &id + &self.v.scale(Complex::new(T::zero(), -half.sin()))
    }
}

fn check_dims<T: Scalar>(
    gen: &GeneratorPair<T>,
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
) -> Result<()> {
    for got in [input.dim(), 1 << obs.num_qubits()] {
        if got != gen.dim() {
            return Err(Error::DimensionMismatch {
                expected: gen.dim(),
                got,
            });
        }
    }
    input.require_normalized()
}

fn expect_after<T: Scalar>(
    u: &CMatrix<T>,
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
) -> Result<T> {
    expectation(&StateVector::from_amplitudes(u.apply(input.amplitudes()))?, obs)
}

/// `exp(−i·c·a·G)` from a precomputed eigendecomposition of `G`.
fn propagator<T: Scalar>(eig: &HermitianEigen<T>, a: T, c: T) -> CMatrix<T> {
    eig.map(|lam| Complex::new(T::zero(), -(a * c * lam)).exp())
}

/// `C(θ) = ⟨ψ|U(θ)† A U(θ)|ψ⟩` with `U(θ) = exp(−ia(H + θV))`.
pub fn generator_loss<T: Scalar>(
    gen: &GeneratorPair<T>,
    a: T,
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
) -> Result<T> {
    check_dims(gen, input, obs)?;
    expect_after(&propagator(&gen.eigen(), a, T::one()), input, obs)
}

/// The bracketed integrand at one `s`.
pub fn stochastic_integrand<T: Scalar>(
    gen: &GeneratorPair<T>,
    a: T,
    s: T,
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
) -> Result<T> {
    check_dims(gen, input, obs)?;
    integrand(gen, &gen.eigen(), a, s, input, obs)
}

fn integrand<T: Scalar>(
    gen: &GeneratorPair<T>,
    eig: &HermitianEigen<T>,
    a: T,
    s: T,
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
) -> Result<T> {
    let late = propagator(eig, a, s);
    let early = propagator(eig, a, T::one() - s);
    let quarter = T::FRAC_PI_2();
    let plus = &(&late * &gen.v_rotation(quarter)) * &early;
    let minus = &(&late * &gen.v_rotation(-quarter)) * &early;
    Ok(expect_after(&plus, input, obs)? - expect_after(&minus, input, obs)?)
}

/// Monte-Carlo estimate of `∂C/∂θ` from `samples` draws of `s`.
///
/// Draw `i` uses its own generator seeded from `(seed, i)`, so the estimate is
/// the same however the rayon pool schedules the samples.
pub fn stochastic_shift_gradient<T: Scalar>(
    gen: &GeneratorPair<T>,
    a: T,
    input: &StateVector<T>,
    obs: &HermitianObservable<T>,
    samples: usize,
    seed: u64,
) -> Result<GradientEstimate<T>> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    check_dims(gen, input, obs)?;
    let eig = gen.eigen();
    let draws: Vec<T> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = T::lit(task_rng(seed, i as u64).random::<f64>());
            integrand(gen, &eig, a, s, input, obs)
        })
        .collect::<Result<_>>()?;
    let mean = draws.iter().copied().sum::<T>() / T::lit(samples as f64);
    Ok(GradientEstimate {
        values: vec![a * mean],
        method: GradientMethod::StochasticShift,
        evaluations: 2 * samples,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn z_obs() -> HermitianObservable<f64> {
        HermitianObservable::pauli_z(1, 0).unwrap()
    }

    #[test]
    fn rejects_invalid_generators() {
        let h = pauli::x::<f64>();
        let bad_v = pauli::x::<f64>().scale_real(2.0);
        assert!(GeneratorPair::new(h.clone(), bad_v, 0.1).is_err());
        let mut non_herm = pauli::x::<f64>();
        non_herm[(0, 1)] = Complex::new(0.0, 1.0);
        assert!(matches!(
            GeneratorPair::new(non_herm, pauli::z(), 0.1),
            Err(Error::NotHermitian { .. })
        ));
        let big = CMatrix::<f64>::identity(16);
        assert!(GeneratorPair::new(big.clone(), big, 0.0).is_err());
    }

    #[test]
    fn pure_pauli_is_minus_sine() {
        let zero = CMatrix::zeros(2, 2);
        let gen = GeneratorPair::new(zero, pauli::x(), 0.9).unwrap();
        let psi = StateVector::zero(1);
        let c = generator_loss(&gen, 0.5, &psi, &z_obs()).unwrap();
        assert!((c - 0.9f64.cos()).abs() < 1e-12);
        for s in [0.0, 0.3, 1.0] {
            let f = stochastic_integrand(&gen, 0.5, s, &psi, &z_obs()).unwrap();
            assert!((0.5 * f + 0.9f64.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_prefactor_gives_zero() {
        let gen = GeneratorPair::new(pauli::y(), pauli::x(), 0.4).unwrap();
        let g = stochastic_shift_gradient(&gen, 0.0, &StateVector::zero(1), &z_obs(), 10, 1)
            .unwrap();
        assert_eq!(g.values, vec![0.0]);
    }

    #[test]
    fn mixed_generator_matches_finite_difference() {
        let h = &pauli::z::<f64>().scale_real(0.7) + &pauli::y().scale_real(-0.4);
        let gen = GeneratorPair::new(h, pauli::x(), 1.1).unwrap();
        let psi = StateVector::plus();
        let a = 0.5;
        let eps = 1e-5;
        let fd = (generator_loss(&gen.with_theta(1.1 + eps), a, &psi, &z_obs()).unwrap()
            - generator_loss(&gen.with_theta(1.1 - eps), a, &psi, &z_obs()).unwrap())
            / (2.0 * eps);
        // The integral itself, by quadrature, is exact up to the FD error.
        let quad = crate::quadrature::integrate_unit(64, |s| {
            stochastic_integrand(&gen, a, s, &psi, &z_obs()).unwrap()
        });
        assert!((a * quad - fd).abs() < 1e-8, "{} vs {fd}", a * quad);
        let est = stochastic_shift_gradient(&gen, a, &psi, &z_obs(), 4000, 5).unwrap();
        assert!((est.values[0] - fd).abs() < 5e-2);
        assert_eq!(est.seed, Some(5));
    }

    #[test]
    fn same_seed_same_estimate() {
        let gen = GeneratorPair::new(pauli::z(), pauli::x(), 0.2).unwrap();
        let psi = StateVector::plus();
        let a = stochastic_shift_gradient(&gen, 0.5, &psi, &z_obs(), 100, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool
            .install(|| stochastic_shift_gradient(&gen, 0.5, &psi, &z_obs(), 100, 9))
            .unwrap();
        assert_eq!(a.values[0].to_bits(), b.values[0].to_bits());
    }
}
