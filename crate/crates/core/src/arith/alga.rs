//! The coefficient algebra A = F[u, v] of the Brandt matrices, with u² = −6 and
//! v² one of 3 − w or 2 + w.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::quad::{forward_ops, QuadElem};
use crate::field::{Field, Ring};

/// Which square root v adjoins.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize, Default)]
pub enum VSq {
    /// v² = 3 − w
    #[default]
    ThreeMinusW,
    /// v² = 2 + w = σ(3 − w)
    TwoPlusW,
}

impl VSq {
    pub fn value(self) -> QuadElem {
        match self {
            VSq::ThreeMinusW => QuadElem::from_i64s(3, -1),
            VSq::TwoPlusW => QuadElem::from_i64s(2, 1),
        }
    }

    pub fn other(self) -> VSq {
        match self {
            VSq::ThreeMinusW => VSq::TwoPlusW,
            VSq::TwoPlusW => VSq::ThreeMinusW,
        }
    }
}

/// c00 + c10·u + c01·v + c11·uv.
#[derive(Clone, Debug)]
pub struct AlgAElem {
    pub c00: QuadElem,
    pub c10: QuadElem,
    pub c01: QuadElem,
    pub c11: QuadElem,
    pub vsq: VSq,
}

impl PartialEq for AlgAElem {
    fn eq(&self, o: &Self) -> bool {
        self.c00 == o.c00
            && self.c10 == o.c10
            && self.c01 == o.c01
            && self.c11 == o.c11
            && (!self.has_v() || self.vsq == o.vsq)
    }
}

impl Eq for AlgAElem {}

fn qz() -> QuadElem {
    QuadElem::zero()
}

impl AlgAElem {
    pub fn new(c00: QuadElem, c10: QuadElem, c01: QuadElem, c11: QuadElem, vsq: VSq) -> Self {
        AlgAElem { c00, c10, c01, c11, vsq }
    }

    pub fn from_f(x: QuadElem, vsq: VSq) -> Self {
        AlgAElem::new(x, qz(), qz(), qz(), vsq)
    }

    pub fn u(vsq: VSq) -> Self {
        AlgAElem::new(qz(), QuadElem::one(), qz(), qz(), vsq)
    }

    pub fn v(vsq: VSq) -> Self {
        AlgAElem::new(qz(), qz(), QuadElem::one(), qz(), vsq)
    }

    /// Element of F[u] given as p + q·u.
    pub fn from_fu(p: QuadElem, q: QuadElem, vsq: VSq) -> Self {
        AlgAElem::new(p, q, qz(), qz(), vsq)
    }

    pub fn has_v(&self) -> bool {
        !(self.c01.is_zero() && self.c11.is_zero())
    }

    pub fn has_u_or_v(&self) -> bool {
        self.has_v() || !self.c10.is_zero()
    }

    /// The F-component when u and v components vanish.
    pub fn as_f(&self) -> Option<QuadElem> {
        if self.has_u_or_v() {
            None
        } else {
            Some(self.c00.clone())
        }
    }

    /// Complex conjugation u ↦ −u (v is real under both embeddings).
    pub fn conj_u(&self) -> Self {
        AlgAElem::new(self.c00.clone(), -&self.c10, self.c01.clone(), -&self.c11, self.vsq)
    }

    /// v ↦ −v.
    pub fn conj_v(&self) -> Self {
        AlgAElem::new(self.c00.clone(), self.c10.clone(), -&self.c01, -&self.c11, self.vsq)
    }

    pub fn scale_f(&self, s: &QuadElem) -> Self {
        AlgAElem::new(&self.c00 * s, &self.c10 * s, &self.c01 * s, &self.c11 * s, self.vsq)
    }

    /// Complex value under the embedding where w ↦ ι1(w) (index 0) or ι2(w) (index 1),
    /// u ↦ i√6, v ↦ positive square root.
    pub fn to_complex(&self, emb: usize) -> (f64, f64) {
        let pick = |x: &QuadElem| if emb == 0 { x.embed().0 } else { x.embed().1 };
        let v = pick(&self.vsq.value()).sqrt();
        let s6 = 6f64.sqrt();
        let re = pick(&self.c00) + pick(&self.c01) * v;
        let im = s6 * (pick(&self.c10) + pick(&self.c11) * v);
        (re, im)
    }

    fn join_vsq(&self, o: &AlgAElem) -> VSq {
        match (self.has_v(), o.has_v()) {
            (true, true) => {
                assert_eq!(self.vsq, o.vsq, "mixing v-conventions in A");
                self.vsq
            }
            (true, false) => self.vsq,
            (false, true) => o.vsq,
            (false, false) => self.vsq,
        }
    }
}

// F(u) helpers on pairs (p, q) = p + q·u.
fn fu_mul(a: (&QuadElem, &QuadElem), b: (&QuadElem, &QuadElem)) -> (QuadElem, QuadElem) {
    let six = QuadElem::from_i64s(6, 0);
    (a.0 * b.0 - &(&six * &(a.1 * b.1)), a.0 * b.1 + a.1 * b.0)
}

impl Zero for AlgAElem {
    fn zero() -> Self {
        AlgAElem::from_f(qz(), VSq::default())
    }
    fn is_zero(&self) -> bool {
        self.c00.is_zero() && self.c10.is_zero() && self.c01.is_zero() && self.c11.is_zero()
    }
}

impl One for AlgAElem {
    fn one() -> Self {
        AlgAElem::from_f(QuadElem::one(), VSq::default())
    }
}

impl<'a, 'b> Add<&'b AlgAElem> for &'a AlgAElem {
    type Output = AlgAElem;
    fn add(self, o: &'b AlgAElem) -> AlgAElem {
        let vsq = self.join_vsq(o);
        AlgAElem::new(&self.c00 + &o.c00, &self.c10 + &o.c10, &self.c01 + &o.c01, &self.c11 + &o.c11, vsq)
    }
}

impl<'a, 'b> Sub<&'b AlgAElem> for &'a AlgAElem {
    type Output = AlgAElem;
    fn sub(self, o: &'b AlgAElem) -> AlgAElem {
        let vsq = self.join_vsq(o);
        AlgAElem::new(&self.c00 - &o.c00, &self.c10 - &o.c10, &self.c01 - &o.c01, &self.c11 - &o.c11, vsq)
    }
}

impl<'a, 'b> Mul<&'b AlgAElem> for &'a AlgAElem {
    type Output = AlgAElem;
    fn mul(self, o: &'b AlgAElem) -> AlgAElem {
        let vsq = self.join_vsq(o);
        // (P1 + Q1 v)(P2 + Q2 v) = (P1P2 + Q1Q2 v²) + (P1Q2 + Q1P2) v
        let p1 = (&self.c00, &self.c10);
        let q1 = (&self.c01, &self.c11);
        let p2 = (&o.c00, &o.c10);
        let q2 = (&o.c01, &o.c11);
        let pp = fu_mul(p1, p2);
        let (rp, rq) = if self.has_v() && o.has_v() {
            let qq = fu_mul(q1, q2);
            let vs = vsq.value();
            (pp.0 + &qq.0 * &vs, pp.1 + &qq.1 * &vs)
        } else {
            pp
        };
        let (sp, sq) = {
            let a = if o.has_v() { fu_mul(p1, q2) } else { (qz(), qz()) };
            let b = if self.has_v() { fu_mul(q1, p2) } else { (qz(), qz()) };
            (a.0 + b.0, a.1 + b.1)
        };
        AlgAElem::new(rp, rq, sp, sq, vsq)
    }
}

impl<'a> Neg for &'a AlgAElem {
    type Output = AlgAElem;
    fn neg(self) -> AlgAElem {
        AlgAElem::new(-&self.c00, -&self.c10, -&self.c01, -&self.c11, self.vsq)
    }
}

forward_ops!(AlgAElem);

impl Ring for AlgAElem {
    fn from_i64(n: i64) -> Self {
        AlgAElem::from_f(QuadElem::from_i64s(n, 0), VSq::default())
    }
}

impl Field for AlgAElem {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let vsq = self.vsq;
        // x · x̄_v = P² − Q²·v² ∈ F(u)
        let xbar = self.conj_v();
        let r = self * &xbar;
        debug_assert!(!r.has_v());
        // (p + q u)(p − q u) = p² + 6 q² ∈ F
        let rbar = r.conj_u();
        let n = (&r * &rbar).c00;
        let ninv = n.inv()?;
        let t = &xbar * &rbar;
        let mut res = t.scale_f(&ninv);
        res.vsq = vsq;
        Some(res)
    }
}

impl fmt::Display for AlgAElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [(&self.c00, ""), (&self.c10, "u"), (&self.c01, "v"), (&self.c11, "uv")];
        let mut first = true;
        for (c, s) in parts {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if s.is_empty() {
                write!(f, "{}", c)?;
            } else {
                write!(f, "({}){}", c, s)?;
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
    fn defining_relations() {
        for vsq in [VSq::ThreeMinusW, VSq::TwoPlusW] {
            let u = AlgAElem::u(vsq);
            let v = AlgAElem::v(vsq);
            assert_eq!(&u * &u, AlgAElem::from_i64(-6));
            assert_eq!((&v * &v).as_f().unwrap(), vsq.value());
            let one = AlgAElem::one();
            assert_eq!((&one + &u) * (&one - &u), AlgAElem::from_i64(7));
            assert_eq!(&u * &v, &v * &u);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let vsq = VSq::ThreeMinusW;
        let x = AlgAElem::new(
            QuadElem::q(1, 2, 3, 1),
            QuadElem::from_i64s(-1, 1),
            QuadElem::from_i64s(2, 0),
            QuadElem::q(0, 1, 5, 7),
            vsq,
        );
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, AlgAElem::one());
    }
}
