//! The cyclotomic field Q(ζ15) in the power basis 1, ζ, …, ζ⁷.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::quad::{forward_ops, QuadElem};
use crate::field::{Field, Ring};
use crate::linalg::Matrix;

/// Φ15(x) = x⁸ − x⁷ + x⁵ − x⁴ + x³ − x + 1, low degree first.
pub const PHI15: [i64; 9] = [1, -1, 0, 1, -1, 1, 0, -1, 1];

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CycloElem {
    pub c: [BigRational; 8],
}

fn rz() -> BigRational {
    BigRational::zero()
}

impl CycloElem {
    pub fn from_coeffs(c: [BigRational; 8]) -> Self {
        CycloElem { c }
    }

    pub fn from_rat(r: BigRational) -> Self {
        let mut c: [BigRational; 8] = std::array::from_fn(|_| rz());
        c[0] = r;
        CycloElem { c }
    }

    pub fn from_int(n: i64) -> Self {
        CycloElem::from_rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// ζ15^k for any integer k.
    pub fn zeta_pow(k: i64) -> Self {
        let k = k.rem_euclid(15) as usize;
        let mut poly = vec![rz(); 15];
        poly[k] = BigRational::one();
        Self::reduce_poly(poly)
    }

    pub fn zeta() -> Self {
        Self::zeta_pow(1)
    }

    /// ζ5 = ζ15³.
    pub fn zeta5() -> Self {
        Self::zeta_pow(3)
    }

    /// ζ3 = ζ15⁵.
    pub fn zeta3() -> Self {
        Self::zeta_pow(5)
    }

    /// w = −ζ5² − ζ5³.
    pub fn w() -> Self {
        -(Self::zeta_pow(6) + Self::zeta_pow(9))
    }

    /// i is not in Q(ζ15); √5 = 2w − 1 is.
    pub fn from_quad(x: &QuadElem) -> Self {
        let (a, b) = x.coords();
        Self::from_rat(a) + Self::w() * Self::from_rat(b)
    }

    fn reduce_poly(mut p: Vec<BigRational>) -> Self {
        // x⁸ ≡ x⁷ − x⁵ + x⁴ − x³ + x − 1
        for d in (8..p.len()).rev() {
            if p[d].is_zero() {
                continue;
            }
            let lead = std::mem::replace(&mut p[d], rz());
            for (k, &coef) in PHI15.iter().enumerate().take(8) {
                if coef != 0 {
                    let t = &lead * BigRational::from_integer(BigInt::from(coef));
                    p[d - 8 + k] = &p[d - 8 + k] - &t;
                }
            }
        }
        let mut c: [BigRational; 8] = std::array::from_fn(|_| rz());
        for (i, v) in p.into_iter().enumerate().take(8) {
            c[i] = v;
        }
        CycloElem { c }
    }

    /// Galois action ζ ↦ ζ^k, gcd(k, 15) = 1.
    pub fn galois(&self, k: i64) -> Self {
        let mut acc = CycloElem::zero();
        for (i, ci) in self.c.iter().enumerate() {
            if !ci.is_zero() {
                acc = acc + CycloElem::zeta_pow(k * i as i64) * CycloElem::from_rat(ci.clone());
            }
        }
        acc
    }

    /// Complex value under ζ15 = exp(2πi/15).
    pub fn to_complex(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, ci) in self.c.iter().enumerate() {
            let v = ci.to_f64().unwrap_or(f64::NAN);
            let t = 2.0 * std::f64::consts::PI * i as f64 / 15.0;
            re += v * t.cos();
            im += v * t.sin();
        }
        (re, im)
    }

    /// The rational number this element equals, if any.
    pub fn as_rat(&self) -> Option<BigRational> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }

    /// Multiplication-by-self matrix on the power basis (columns = images of ζ^j).
    fn mul_matrix(&self) -> Matrix<BigRational> {
        let mut m = Matrix::zeros(8, 8);
        for j in 0..8 {
            let col = self.clone() * CycloElem::zeta_pow(j as i64);
            for i in 0..8 {
                m[(i, j)] = col.c[i].clone();
            }
        }
        m
    }

    /// Reduce modulo a prime p ≡ 1 mod 15, sending ζ to the given element of order 15.
    pub fn reduce_mod(&self, p: u64, zeta: u64) -> Option<u64> {
        let mut acc = 0u64;
        let mut zp = 1u64;
        for ci in self.c.iter() {
            let v = crate::arith::finite::rat_mod(ci, p)?;
            acc = (acc + v * zp % p) % p;
            zp = zp * zeta % p;
        }
        Some(acc)
    }
}

impl Zero for CycloElem {
    fn zero() -> Self {
        CycloElem { c: std::array::from_fn(|_| rz()) }
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
}

impl One for CycloElem {
    fn one() -> Self {
        CycloElem::from_int(1)
    }
}

impl<'a, 'b> Add<&'b CycloElem> for &'a CycloElem {
    type Output = CycloElem;
    fn add(self, o: &'b CycloElem) -> CycloElem {
        CycloElem { c: std::array::from_fn(|i| &self.c[i] + &o.c[i]) }
    }
}

impl<'a, 'b> Sub<&'b CycloElem> for &'a CycloElem {
    type Output = CycloElem;
    fn sub(self, o: &'b CycloElem) -> CycloElem {
        CycloElem { c: std::array::from_fn(|i| &self.c[i] - &o.c[i]) }
    }
}

impl<'a, 'b> Mul<&'b CycloElem> for &'a CycloElem {
    type Output = CycloElem;
    fn mul(self, o: &'b CycloElem) -> CycloElem {
        let mut p = vec![rz(); 15];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    p[i + j] = &p[i + j] + a * b;
                }
            }
        }
        CycloElem::reduce_poly(p)
    }
}

impl<'a> Neg for &'a CycloElem {
    type Output = CycloElem;
    fn neg(self) -> CycloElem {
        CycloElem { c: std::array::from_fn(|i| -&self.c[i]) }
    }
}

forward_ops!(CycloElem);

impl Ring for CycloElem {
    fn from_i64(n: i64) -> Self {
        CycloElem::from_int(n)
    }
}

impl Field for CycloElem {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let m = self.mul_matrix();
        let mut rhs = vec![rz(); 8];
        rhs[0] = BigRational::one();
        let sol = m.solve(&rhs)?;
        Some(CycloElem { c: std::array::from_fn(|i| sol[i].clone()) })
    }
}

impl fmt::Display for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "({})z", c)?,
                _ => write!(f, "({})z^{}", c, i)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_unity() {
        let z5 = CycloElem::zeta5();
        let mut p = CycloElem::one();
        for _ in 0..5 {
            p = &p * &z5;
        }
        assert_eq!(p, CycloElem::one());
        let z3 = CycloElem::zeta3();
        assert_eq!(&(&z3 * &z3) * &z3, CycloElem::one());
        assert_eq!(CycloElem::zeta_pow(15), CycloElem::one());
    }

    #[test]
    fn golden_ratio_embedding() {
        let w = CycloElem::w();
        assert_eq!(&w * &w, &w + &CycloElem::one());
        let (re, im) = w.to_complex();
        assert!((re - 1.618033988749895).abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn inverse() {
        let x = CycloElem::zeta() + CycloElem::from_int(3) + CycloElem::zeta_pow(4);
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, CycloElem::one());
    }

    #[test]
    fn galois_fixes_w_up_to_conjugation() {
        let w = CycloElem::w();
        assert_eq!(w.galois(4), w);
        assert_eq!(w.galois(2), CycloElem::one() - w.clone());
    }
}
