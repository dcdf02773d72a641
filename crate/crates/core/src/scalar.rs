//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + rustfft::FftNum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// A tolerance that is `x` in double precision and never finer than
    /// `ulps` machine epsilons in narrower types.
    #[inline]
    fn tol(x: f64, ulps: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(ulps))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `sin(x)/x` with the removable singularity at zero filled in.
#[inline]
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::tol(1e-4, 64.0) {
        let x2 = x * x;
        // Taylor through x^6; truncation error < x^8/9! for |x| < 1e-4.
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0) - x2 * x2 * x2 / T::lit(5040.0)
    } else {
        x.sin() / x
    }
}
