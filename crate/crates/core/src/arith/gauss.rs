//! The Gaussian rationals Q(i).

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::quad::forward_ops;
use crate::field::{Field, Ring};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussRatElem {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRatElem {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRatElem { re, im }
    }

    pub fn i() -> Self {
        GaussRatElem { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn from_rat(r: BigRational) -> Self {
        GaussRatElem { re: r, im: BigRational::zero() }
    }

    pub fn conj(&self) -> Self {
        GaussRatElem { re: self.re.clone(), im: -&self.im }
    }
}

impl Zero for GaussRatElem {
    fn zero() -> Self {
        GaussRatElem::from_rat(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRatElem {
    fn one() -> Self {
        GaussRatElem::from_rat(BigRational::one())
    }
}

impl<'a, 'b> Add<&'b GaussRatElem> for &'a GaussRatElem {
    type Output = GaussRatElem;
    fn add(self, o: &'b GaussRatElem) -> GaussRatElem {
        GaussRatElem { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a, 'b> Sub<&'b GaussRatElem> for &'a GaussRatElem {
    type Output = GaussRatElem;
    fn sub(self, o: &'b GaussRatElem) -> GaussRatElem {
        GaussRatElem { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a, 'b> Mul<&'b GaussRatElem> for &'a GaussRatElem {
    type Output = GaussRatElem;
    fn mul(self, o: &'b GaussRatElem) -> GaussRatElem {
        GaussRatElem {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Neg for &'a GaussRatElem {
    type Output = GaussRatElem;
    fn neg(self) -> GaussRatElem {
        GaussRatElem { re: -&self.re, im: -&self.im }
    }
}

forward_ops!(GaussRatElem);

impl Ring for GaussRatElem {
    fn from_i64(n: i64) -> Self {
        GaussRatElem::from_rat(BigRational::from_integer(n.into()))
    }
}

impl Field for GaussRatElem {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(GaussRatElem { re: &self.re / &n, im: -&self.im / &n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared() {
        let i = GaussRatElem::i();
        assert_eq!(&i * &i, -GaussRatElem::one());
        let x = GaussRatElem::from_i64(3) + GaussRatElem::i();
        assert_eq!(&x * &x.inv().unwrap(), GaussRatElem::one());
    }
}
