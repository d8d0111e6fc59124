use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type used throughout the solver.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer out of range")
    }

    /// `coth` saturated to 1 once it agrees with 1 to machine precision.
    fn coth_clamped(self) -> Self {
        let cutoff = Self::lit(0.5) * (-Self::epsilon().ln()) + Self::one();
        if self > cutoff {
            Self::one()
        } else {
            Self::one() / self.tanh()
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
