//! Scalar abstractions shared by the numeric kernels.
//!
//! Subset-lattice transforms only need an abelian group, so they run on
//! floats, integers, exact rationals and formal linear combinations alike.
//! Everything that takes logarithms or square roots needs [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Zero};

/// Values a signed Möbius or zeta transform can act on.
pub trait LatticeValue: Clone + Zero + AddAssign + SubAssign {}

impl<T: Clone + Zero + AddAssign + SubAssign> LatticeValue for T {}

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Tolerance floor below which this type cannot resolve anything.
    #[inline]
    fn resolution() -> Self {
        Self::epsilon() * Self::lit(16.0)
    }

    /// Widens to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite float")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Clamps a requested tolerance so it is never below what `T` can represent.
#[inline]
pub(crate) fn effective_tol<T: Real>(requested: f64) -> T {
    T::lit(requested).max(T::resolution())
}
