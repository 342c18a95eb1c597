//! Real scalar abstraction shared by the statevector, gate and gradient code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point type the simulator can run on (`f32` or `f64`).
///
/// The tolerance hooks let the same validation code run at either precision:
/// the `f64` values are the ones the test suite pins.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Allowed deviation of `Σ|a_i|²` from 1 and of `G·G†` from `I`.
    fn norm_tol() -> Self;
    /// Allowed deviation of a matrix from its conjugate transpose.
    fn herm_tol() -> Self;
    /// Branch probabilities below this are treated as absent.
    fn branch_floor() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Scalar for f64 {
    fn norm_tol() -> Self {
        1e-10
    }
    fn herm_tol() -> Self {
        1e-12
    }
    fn branch_floor() -> Self {
        1e-14
    }
}

impl Scalar for f32 {
    fn norm_tol() -> Self {
        1e-5
    }
    fn herm_tol() -> Self {
        1e-6
    }
    fn branch_floor() -> Self {
        1e-7
    }
}
