//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the geometry and planning code is generic over.
///
/// Implemented for `f32` and `f64`. The tolerances are per-type because a
/// nanometre threshold is meaningless at single precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Length tolerance (m) for duplicate-vertex and convexity checks.
    const GEOM_EPS: Self;
    /// Threshold below which a cross product is treated as a zero (degenerate) turn.
    const CROSS_EPS: Self;
    /// Tolerance for comparing unit vectors and directions.
    const DIR_EPS: Self;

    /// Converts an `f64` literal. Every value used by the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const GEOM_EPS: Self = 1e-9;
    const CROSS_EPS: Self = 1e-12;
    const DIR_EPS: Self = 1e-9;
}

impl Real for f32 {
    const GEOM_EPS: Self = 1e-5;
    const CROSS_EPS: Self = 1e-7;
    const DIR_EPS: Self = 1e-5;
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut a = angle % two_pi;
    if a > T::PI() {
        a = a - two_pi;
    } else if a <= -T::PI() {
        a = a + two_pi;
    }
    a
}
