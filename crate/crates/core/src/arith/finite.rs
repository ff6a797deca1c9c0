//! Finite fields F_{p^n}, n ≤ 4, with optional Zech-logarithm tables.
//!
//! Elements are dense indices 0..q: the index Σ dᵢ pⁱ stands for Σ dᵢ xⁱ modulo the
//! chosen irreducible polynomial. Index 0 is zero and index 1 is one.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::CoreError;

/// Default ceiling on q for building discrete-log tables.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 24;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// (p, n) with q = pⁿ, if q is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut n = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        n += 1;
    }
    if r == 1 && is_prime(p) {
        Some((p, n))
    } else {
        None
    }
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Reduce a rational modulo p; None if p divides the denominator.
pub fn rat_mod(r: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let n = r.numer().mod_floor(&pb).to_u64()?;
    let d = r.denom().mod_floor(&pb).to_u64()?;
    if d == 0 {
        return None;
    }
    Some(n * crate::linalg::inv_mod(d, p) % p)
}

pub fn int_mod(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

#[derive(Clone, Debug)]
pub struct FieldTable {
    pub p: u64,
    pub n: u32,
    pub q: u64,
    /// monic modulus, lowest degree first, length n + 1
    pub modulus: Vec<u64>,
    /// generator of the multiplicative group (dense index)
    pub generator: u32,
    /// exp[k] = g^k for 0 ≤ k < q − 1, if tables were built
    pub exp: Option<Vec<u32>>,
    /// log[x] for x ≠ 0, if tables were built
    pub log: Option<Vec<u32>>,
    pows: Vec<u64>,
}

impl FieldTable {
    pub fn new(p: u64, n: u32) -> Result<Self, CoreError> {
        Self::with_budget(p, n, DEFAULT_TABLE_BUDGET)
    }

    pub fn for_q(q: u64) -> Result<Self, CoreError> {
        let (p, n) = prime_power(q).ok_or(CoreError::NotPrimePower(q))?;
        Self::new(p, n)
    }

    pub fn with_budget(p: u64, n: u32, budget: u64) -> Result<Self, CoreError> {
        if !is_prime(p) {
            return Err(CoreError::NotPrime(p));
        }
        if !(1..=4).contains(&n) {
            return Err(CoreError::Unsupported(format!("extension degree {n}")));
        }
        let q = p.pow(n);
        let modulus = find_irreducible(p, n).ok_or_else(|| CoreError::Internal(format!("no irreducible of degree {n} mod {p}")))?;
        let pows = (0..=n).map(|i| p.pow(i)).collect();
        let mut t = FieldTable { p, n, q, modulus, generator: 0, exp: None, log: None, pows };
        t.generator = t.find_generator();
        if q <= budget {
            let mut exp = Vec::with_capacity((q - 1) as usize);
            let mut log = vec![u32::MAX; q as usize];
            let mut x = 1u32;
            for k in 0..q - 1 {
                exp.push(x);
                log[x as usize] = k as u32;
                x = t.mul_poly(x, t.generator);
            }
            if x != 1 {
                return Err(CoreError::Internal("generator order mismatch".into()));
            }
            t.exp = Some(exp);
            t.log = Some(log);
        }
        Ok(t)
    }

    pub fn digits(&self, x: u32) -> Vec<u64> {
        let mut x = x as u64;
        (0..self.n)
            .map(|_| {
                let d = x % self.p;
                x /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, d: &[u64]) -> u32 {
        d.iter().zip(&self.pows).map(|(a, b)| (a % self.p) * b).sum::<u64>() as u32
    }

    pub fn from_int(&self, k: i64) -> u32 {
        k.rem_euclid(self.p as i64) as u32
    }

    pub fn from_bigint(&self, k: &BigInt) -> u32 {
        int_mod(k, self.p) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.n == 1 {
            let s = a as u64 + b as u64;
            return (if s >= self.p { s - self.p } else { s }) as u32;
        }
        let (mut a, mut b) = (a as u64, b as u64);
        let mut r = 0u64;
        for i in 0..self.n as usize {
            let s = (a % self.p + b % self.p) % self.p;
            r += s * self.pows[i];
            a /= self.p;
            b /= self.p;
        }
        r as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        let d: Vec<u64> = self.digits(a).into_iter().map(|x| (self.p - x) % self.p).collect();
        self.from_digits(&d)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if let (Some(exp), Some(log)) = (&self.exp, &self.log) {
            let k = log[a as usize] as u64 + log[b as usize] as u64;
            let k = if k >= self.q - 1 { k - (self.q - 1) } else { k };
            return exp[k as usize];
        }
        self.mul_poly(a, b)
    }

    fn mul_poly(&self, a: u32, b: u32) -> u32 {
        if self.n == 1 {
            return (a as u64 * b as u64 % self.p) as u32;
        }
        let n = self.n as usize;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % self.p;
            }
        }
        for d in (n..2 * n - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for k in 0..n {
                prod[d - n + k] = (prod[d - n + k] + (self.p - c) * self.modulus[k]) % self.p;
            }
        }
        self.from_digits(&prod[..n])
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        if let (Some(exp), Some(log)) = (&self.exp, &self.log) {
            let k = (log[a as usize] as u128 * e as u128 % (self.q - 1) as u128) as usize;
            return exp[k];
        }
        let mut r = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_poly(r, b);
            }
            b = self.mul_poly(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.q - 2))
        }
    }

    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p)
    }

    pub fn is_square(&self, a: u32) -> bool {
        a == 0 || self.p == 2 || self.pow(a, (self.q - 1) / 2) == 1
    }

    /// A square root of a, if one exists (brute force over the field).
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        (0..self.q as u32).find(|&x| self.mul(x, x) == a)
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u32) -> u64 {
        let m = self.q - 1;
        let mut ord = m;
        for r in prime_factors(m) {
            while ord % r == 0 && self.pow(a, ord / r) == 1 {
                ord /= r;
            }
        }
        ord
    }

    fn find_generator(&self) -> u32 {
        let m = self.q - 1;
        let fs = prime_factors(m);
        (1..self.q as u32)
            .find(|&g| fs.iter().all(|&r| self.pow_slow(g, m / r) != 1))
            .expect("multiplicative group is cyclic")
    }

    fn pow_slow(&self, a: u32, mut e: u64) -> u32 {
        let mut r = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_poly(r, b);
            }
            b = self.mul_poly(b, b);
            e >>= 1;
        }
        r
    }

    /// An element of exact order m (m | q − 1).
    pub fn element_of_order(&self, m: u64) -> Option<u32> {
        if (self.q - 1) % m != 0 {
            return None;
        }
        Some(self.pow(self.generator, (self.q - 1) / m))
    }

    /// Table t ↦ t⁵.
    pub fn fifth_powers(&self) -> Vec<u32> {
        (0..self.q as u32).map(|t| self.pow(t, 5)).collect()
    }

    /// Histogram of a map F_q → F_q.
    pub fn value_histogram(&self, f: impl Fn(u32) -> u32) -> Vec<u64> {
        let mut h = vec![0u64; self.q as usize];
        for t in 0..self.q as u32 {
            h[f(t) as usize] += 1;
        }
        h
    }

    /// Image of a + b·w when w is a root of x² − x − 1 in this field.
    pub fn sqrt5_root_w(&self) -> Option<u32> {
        (0..self.q as u32).find(|&x| {
            let x2 = self.mul(x, x);
            self.sub(self.sub(x2, x), 1) == 0
        })
    }
}

fn poly_divides_mod(d: &[u64], f: &[u64], p: u64) -> bool {
    // d monic
    let mut r = f.to_vec();
    let dd = d.len() - 1;
    for i in (dd..r.len()).rev() {
        let c = r[i] % p;
        if c == 0 {
            continue;
        }
        for (j, dj) in d.iter().enumerate() {
            r[i - dd + j] = (r[i - dd + j] + (p - c) * dj) % p;
        }
    }
    r[..dd].iter().all(|x| x % p == 0)
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    for d in 1..=n / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..d {
                g.push(x % p);
                x /= p;
            }
            g.push(1);
            if poly_divides_mod(&g, f, p) {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree n over F_p, ordered by the dense index of its
/// lower coefficients.
pub fn find_irreducible(p: u64, n: u32) -> Option<Vec<u64>> {
    if n == 1 {
        return Some(vec![0, 1]);
    }
    let count = p.pow(n);
    for idx in 0..count {
        let mut f = Vec::with_capacity(n as usize + 1);
        let mut x = idx;
        for _ in 0..n {
            f.push(x % p);
            x /= p;
        }
        f.push(1);
        if f[0] != 0 && is_irreducible(&f, p) {
            return Some(f);
        }
    }
    None
}

/// gcd(n, q^s − 1) = 1 for s = 1, 2.
pub fn dickson_gcd_condition(n: u64, q: u64) -> bool {
    let q1 = q as u128 - 1;
    let q2 = (q as u128) * (q as u128) - 1;
    (n as u128).gcd(&q1) == 1 && (n as u128).gcd(&q2) == 1
}

/// Dickson vector map (x1, x2) ↦ (D_n¹, D_n²) permutes F_q²: the gcd criterion, and for
/// q ≤ 200 additionally a brute-force bijectivity check that must agree.
pub fn dickson_permutes(n: u64, q: u64) -> Result<bool, CoreError> {
    let crit = dickson_gcd_condition(n, q);
    if q <= 200 {
        let f = FieldTable::for_q(q)?;
        let brute = crate::chebyshev::dickson_map_is_bijective(&f, n as usize);
        if brute != crit {
            return Err(CoreError::Consistency(format!(
                "Dickson permutation criterion disagrees with brute force at n={n}, q={q}"
            )));
        }
    }
    Ok(crit)
}

/// Sign-aware small helper: |x| as u64.
pub fn abs_u64(x: &BigInt) -> u64 {
    x.abs().to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_seven() {
        let f = FieldTable::new(7, 1).unwrap();
        assert_eq!(f.q, 7);
        assert_eq!(f.generator, 3);
        assert_eq!(f.order(3), 6);
    }

    #[test]
    fn lagrange_in_f49() {
        let f = FieldTable::new(7, 2).unwrap();
        for x in 1..49 {
            assert_eq!(f.pow(x, 48), 1);
        }
    }

    #[test]
    fn sqrt5_mod_11() {
        let f = FieldTable::new(11, 1).unwrap();
        assert!(f.is_square(5));
        assert_eq!(f.mul(4, 4), 5);
    }

    #[test]
    fn frobenius_fixes_prime_field() {
        let f = FieldTable::new(5, 3).unwrap();
        let fixed: Vec<u32> = (0..f.q as u32).filter(|&x| f.frobenius(x) == x).collect();
        assert_eq!(fixed, vec![0, 1, 2, 3, 4]);
        for a in [7u32, 19, 44] {
            for b in [3u32, 101, 88] {
                assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
            }
        }
    }

    #[test]
    fn tables_match_polynomial_arithmetic() {
        let a = FieldTable::new(3, 4).unwrap();
        let b = FieldTable::with_budget(3, 4, 1).unwrap();
        assert!(b.exp.is_none());
        for x in 0..81 {
            for y in [0u32, 1, 5, 40, 80] {
                assert_eq!(a.mul(x, y), b.mul(x, y));
            }
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(343), Some((7, 3)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(9973), Some((9973, 1)));
        assert!(FieldTable::new(6, 1).is_err());
    }

    #[test]
    fn dickson_examples() {
        assert!(dickson_permutes(5, 7).unwrap());
        assert!(!dickson_permutes(5, 11).unwrap());
        for q in [7u64, 8, 9, 11, 13, 16, 17] {
            assert!(dickson_permutes(1, q).unwrap());
        }
    }
}
