//! Scalar traits shared by the exact linear algebra and the numeric kernels.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Commutative ring with unit, as needed by polynomial and matrix code.
pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(n: i64) -> Self;
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.clone() * i)
    }
}

/// Floating point scalars used by the special-function code.
pub trait Real: num_traits::Float + num_traits::FloatConst + num_traits::FromPrimitive + Debug + Send + Sync {}

impl Real for f32 {}
impl Real for f64 {}

impl Ring for BigInt {
    fn from_i64(n: i64) -> Self {
        BigInt::from(n)
    }
}

impl Ring for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl Field for BigRational {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Round a rational to the nearest integer, ties towards +infinity.
pub fn round_rat(x: &BigRational) -> BigInt {
    let two = BigInt::from(2);
    let num = x.numer() * &two + x.denom();
    let den = x.denom() * &two;
    num_integer::Integer::div_floor(&num, &den)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_abs(x: &BigRational) -> BigRational {
    x.abs()
}
