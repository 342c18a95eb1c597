//! Small dense complex matrices: products, adjoints, Kronecker products,
//! a Jacobi eigensolver for Hermitian matrices and exponentials built on it.
//!
//! Everything here is sized for gate-level work (at most a few qubits), so the
//! storage is a flat row-major `Vec` and the algorithms are the textbook ones.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect())
                .collect(),
        )
    }

    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: T) -> Self {
        self.scale(Complex::new(k, T::zero()))
    }

    /// `self ⊗ other`, with `self` acting on the more significant index bits.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(&a, &b)| a * b).sum()
            })
            .collect()
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn hermitian_deviation(&self) -> T {
        self.max_abs_diff(&self.dagger())
    }

    /// `‖M·M† − I‖∞` (largest entry).
    pub fn unitarity_deviation(&self) -> T {
        (self * &self.dagger()).max_abs_diff(&Self::identity(self.rows))
    }

    /// Operator 2-norm bound via the Frobenius norm.
    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Scalar> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigen-decomposition `H = V·diag(λ)·V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix<T>,
}

/// Cyclic complex Jacobi sweeps. The input is assumed Hermitian; only its
/// Hermitian part is effectively diagonalised.
pub fn eigh<T: Scalar>(h: &CMatrix<T>) -> HermitianEigen<T> {
    assert!(h.is_square(), "eigh needs a square matrix");
    let n = h.rows();
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(T::min_positive_value());
    let eps = T::epsilon();

    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag <= eps * eps * scale {
                    continue;
                }
                let phase = b / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let jpp = Complex::new(c, T::zero());
                let jpq = Complex::new(s, T::zero());
                let jqp = phase.conj() * (-s);
                let jqq = phase.conj() * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    HermitianEigen { values, vectors }
}

impl<T: Scalar> HermitianEigen<T> {
    /// `V·diag(f(λ))·V†`.
    pub fn map(&self, f: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// `exp(c·H)` for Hermitian `H` and any complex scalar `c`.
pub fn expm_hermitian<T: Scalar>(h: &CMatrix<T>, c: Complex<T>) -> CMatrix<T> {
    eigh(h).map(|lam| (c * lam).exp())
}

/// Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn i<T: Scalar>() -> CMatrix<T> {
        CMatrix::identity(2)
    }

    pub fn x<T: Scalar>() -> CMatrix<T> {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y<T: Scalar>() -> CMatrix<T> {
        let z = Complex::zero();
        let im = Complex::new(T::zero(), T::one());
        CMatrix::from_rows(vec![vec![z, -im], vec![im, z]])
    }

    pub fn z<T: Scalar>() -> CMatrix<T> {
        CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    type C = Complex<f64>;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix<f64> {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = rng_from_seed(11);
        for n in 1..=8 {
            for _ in 0..20 {
                let h = random_hermitian(n, &mut rng);
                let e = eigh(&h);
                let back = e.map(|l| C::new(l, 0.0));
                assert!(back.max_abs_diff(&h) < 1e-12, "n={n}");
                assert!(e.vectors.unitarity_deviation() < 1e-12);
                assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn pauli_eigenvalues_are_pm_one() {
        for p in [pauli::x::<f64>(), pauli::y(), pauli::z()] {
            let e = eigh(&p);
            assert!((e.values[0] + 1.0).abs() < 1e-14);
            assert!((e.values[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn expm_of_pauli_matches_euler_form() {
        // exp(i a X) = I cos a + i X sin a
        let a = 0.37;
        let lhs = expm_hermitian(&pauli::x::<f64>(), C::new(0.0, a));
        let rhs = &pauli::i::<f64>().scale_real(a.cos()) + &pauli::x().scale(C::new(0.0, a.sin()));
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn kron_orders_left_factor_as_high_bits() {
        let z = pauli::z::<f64>();
        let id = pauli::i::<f64>();
        let zi = z.kron(&id);
        // diag(1, 1, -1, -1)
        assert_eq!(zi[(0, 0)].re, 1.0);
        assert_eq!(zi[(1, 1)].re, 1.0);
        assert_eq!(zi[(2, 2)].re, -1.0);
        assert_eq!(zi[(3, 3)].re, -1.0);
    }

    #[test]
    fn commutator_of_paulis() {
        // [Z, X] = 2iY
        let lhs = pauli::z::<f64>().commutator(&pauli::x());
        let rhs = pauli::y::<f64>().scale(C::new(0.0, 2.0));
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let h = CMatrix::<f32>::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = eigh(&h);
        assert!((e.values[0] - 1.0).abs() < 1e-6);
        assert!((e.values[1] - 3.0).abs() < 1e-6);
    }
}
