//! Scalar abstraction shared by the group and cone arithmetic.
//!
//! Everything in [`crate::cone`] that only needs ring operations is generic over
//! [`Scalar`], so the same code runs on `f32`, `f64` and exact rationals.
//! Operations that need transcendental functions (the geodesic flow, the
//! Iwasawa logarithm) additionally require [`Real`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ring-like scalar used by matrices, cone vectors and group elements.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive {
    /// True when the value is an exact integer.
    fn is_integral(&self) -> bool;

    /// Zero test used by invariant checks: `|x| <= tol` for floating types,
    /// exact equality for rationals (their arithmetic never rounds).
    fn near_zero(&self, tol: f64) -> bool;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Floating point scalar (`f32` or `f64`).
pub trait Real: Scalar + Float + FloatConst + Copy {}

impl Scalar for f64 {
    fn is_integral(&self) -> bool {
        self.fract() == 0.0
    }

    fn near_zero(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Scalar for f32 {
    fn is_integral(&self) -> bool {
        self.fract() == 0.0
    }

    fn near_zero(&self, tol: f64) -> bool {
        f64::from(self.abs()) <= tol
    }
}

impl Real for f64 {}
impl Real for f32 {}

impl Scalar for BigRational {
    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn near_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

impl Scalar for Ratio<i64> {
    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn near_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_from_int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}
