//! Dense univariate polynomials, lowest degree first.

use std::ops::{Add, Mul, Neg, Sub};

use crate::field::{Field, Ring};

#[derive(Clone, PartialEq, Debug)]
pub struct Poly<K> {
    pub c: Vec<K>,
}

impl<K: Ring> Poly<K> {
    pub fn new(mut c: Vec<K>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn one() -> Self {
        Poly { c: vec![K::one()] }
    }

    pub fn constant(k: K) -> Self {
        Poly::new(vec![k])
    }

    /// The monic linear polynomial T − r.
    pub fn linear(r: K) -> Self {
        Poly::new(vec![-r, K::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn lead(&self) -> K {
        self.c.last().cloned().unwrap_or_else(K::zero)
    }

    pub fn coeff(&self, i: usize) -> K {
        self.c.get(i).cloned().unwrap_or_else(K::zero)
    }

    pub fn scale(&self, s: &K) -> Self {
        Poly::new(self.c.iter().map(|x| x.clone() * s.clone()).collect())
    }

    pub fn eval(&self, x: &K) -> K {
        let mut acc = K::zero();
        for a in self.c.iter().rev() {
            acc = acc * x.clone() + a.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.c.iter().enumerate().skip(1).map(|(i, a)| a.clone() * K::from_i64(i as i64)).collect(),
        )
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Poly::one();
        for _ in 0..e {
            r = r * self.clone();
        }
        r
    }

    pub fn map<L: Ring>(&self, f: impl Fn(&K) -> L) -> Poly<L> {
        Poly::new(self.c.iter().map(f).collect())
    }
}

impl<K: Field> Poly<K> {
    pub fn div_rem(&self, d: &Poly<K>) -> (Poly<K>, Poly<K>) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = d.lead().inv().expect("nonzero leading coefficient");
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![K::zero(); r.len() - dd];
        for i in (dd..r.len()).rev() {
            let coef = r[i].clone() * inv.clone();
            if coef.is_zero() {
                continue;
            }
            for (j, dj) in d.c.iter().enumerate() {
                r[i - dd + j] = r[i - dd + j].clone() - coef.clone() * dj.clone();
            }
            q[i - dd] = coef;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lead().inv().unwrap();
        self.scale(&inv)
    }

    pub fn gcd(&self, o: &Poly<K>) -> Poly<K> {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Multiplicity of r as a root.
    pub fn root_multiplicity(&self, r: &K) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let lin = Poly::linear(r.clone());
        let mut p = self.clone();
        let mut m = 0;
        loop {
            let (q, rem) = p.div_rem(&lin);
            if !rem.is_zero() {
                return m;
            }
            m += 1;
            p = q;
        }
    }

    /// Lagrange interpolation through (x_i, y_i).
    pub fn interpolate(xs: &[K], ys: &[K]) -> Poly<K> {
        let mut acc = Poly::zero();
        for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
            let mut basis = Poly::one();
            let mut den = K::one();
            for (j, xj) in xs.iter().enumerate() {
                if i != j {
                    basis = basis * Poly::linear(xj.clone());
                    den = den * (xi.clone() - xj.clone());
                }
            }
            acc = acc + basis.scale(&(yi.clone() * den.inv().expect("distinct nodes")));
        }
        acc
    }
}

impl<K: Ring> Add for Poly<K> {
    type Output = Poly<K>;
    fn add(self, o: Poly<K>) -> Poly<K> {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl<K: Ring> Sub for Poly<K> {
    type Output = Poly<K>;
    fn sub(self, o: Poly<K>) -> Poly<K> {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl<K: Ring> Neg for Poly<K> {
    type Output = Poly<K>;
    fn neg(self) -> Poly<K> {
        Poly::new(self.c.into_iter().map(|x| -x).collect())
    }
}

impl<K: Ring> Mul for Poly<K> {
    type Output = Poly<K>;
    fn mul(self, o: Poly<K>) -> Poly<K> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut r = vec![K::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    r[i + j] = r[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        Poly::new(r)
    }
}

/// Resultant of two polynomials over a field, via the Sylvester determinant.
pub fn resultant<K: Field>(f: &Poly<K>, g: &Poly<K>) -> K {
    use crate::linalg::Matrix;
    let (Some(m), Some(n)) = (f.degree(), g.degree()) else { return K::zero() };
    let size = m + n;
    if size == 0 {
        return K::one();
    }
    let mut s = Matrix::zeros(size, size);
    for i in 0..n {
        for j in 0..=m {
            s[(i, i + j)] = f.c[m - j].clone();
        }
    }
    for i in 0..m {
        for j in 0..=n {
            s[(n + i, i + j)] = g.c[n - j].clone();
        }
    }
    s.det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use num_rational::BigRational;

    fn p(c: &[i64]) -> Poly<BigRational> {
        Poly::new(c.iter().map(|&x| rat(x, 1)).collect())
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, 1]);
        let b = p(&[-1, 1]);
        assert_eq!(a.clone() * b.clone(), p(&[-1, 0, 1]));
        let (q, r) = p(&[-1, 0, 1]).div_rem(&b);
        assert_eq!(q, a);
        assert!(r.is_zero());
        assert_eq!(p(&[1, 2, 1]).root_multiplicity(&rat(-1, 1)), 2);
    }

    #[test]
    fn resultant_of_linear_factors() {
        // Res(x − 2, x² − 1) = (2² − 1) = 3
        assert_eq!(resultant(&p(&[-2, 1]), &p(&[-1, 0, 1])), rat(3, 1));
        // common root gives zero
        assert_eq!(resultant(&p(&[-1, 1]), &p(&[-1, 0, 1])), rat(0, 1));
    }

    #[test]
    fn interpolation_roundtrip() {
        let f = p(&[3, -2, 0, 5]);
        let xs: Vec<_> = (0..4).map(|i| rat(i, 1)).collect();
        let ys: Vec<_> = xs.iter().map(|x| f.eval(x)).collect();
        assert_eq!(Poly::interpolate(&xs, &ys), f);
    }
}
