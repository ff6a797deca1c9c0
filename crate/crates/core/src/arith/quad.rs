//! The ring Z[w] and the field Q(√5), with w² = w + 1.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::field::{round_rat, Field, Ring};

/// Numeric value of w under the first real embedding.
pub const W1: f64 = 1.618_033_988_749_895;
/// Numeric value of w under the second real embedding.
pub const W2: f64 = -0.618_033_988_749_895;

/// Element a + b·w of Z[w].
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct QuadInt {
    pub a: BigInt,
    pub b: BigInt,
}

impl QuadInt {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        QuadInt { a: a.into(), b: b.into() }
    }

    pub fn w() -> Self {
        QuadInt::new(0, 1)
    }

    /// Galois conjugate σ(a + bw) = (a + b) − bw.
    pub fn conj(&self) -> Self {
        QuadInt { a: &self.a + &self.b, b: -&self.b }
    }

    /// a² + ab − b².
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a + &self.a * &self.b - &self.b * &self.b
    }

    /// 2a + b.
    pub fn trace(&self) -> BigInt {
        &self.a * 2 + &self.b
    }

    pub fn is_totally_positive(&self) -> bool {
        self.norm().is_positive() && self.trace().is_positive()
    }

    pub fn embed(&self) -> (f64, f64) {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        (a + b * W1, a + b * W2)
    }

    pub fn is_unit(&self) -> bool {
        self.norm().abs().is_one()
    }

    /// w^k for any integer k (w⁻¹ = w − 1).
    pub fn w_pow(k: i64) -> Self {
        let base = if k >= 0 { QuadInt::w() } else { QuadInt::new(-1, 1) };
        let mut r = QuadInt::one();
        for _ in 0..k.unsigned_abs() {
            r = &r * &base;
        }
        r
    }

    /// Norm-Euclidean division: q = round(self / d) coordinatewise, r = self − q·d,
    /// with |Nr(r)| < |Nr(d)|.
    pub fn div_rem(&self, d: &QuadInt) -> (QuadInt, QuadInt) {
        assert!(!d.is_zero(), "division by zero in Z[w]");
        let n = d.norm();
        let t = self * &d.conj();
        let qa = round_rat(&BigRational::new(t.a, n.clone()));
        let qb = round_rat(&BigRational::new(t.b, n));
        let q = QuadInt { a: qa, b: qb };
        let r = self - &(&q * d);
        (q, r)
    }

    /// Exact quotient if d divides self.
    pub fn exact_div(&self, d: &QuadInt) -> Option<QuadInt> {
        let (q, r) = self.div_rem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    pub fn divides(&self, x: &QuadInt) -> bool {
        if self.is_zero() {
            return x.is_zero();
        }
        x.div_rem(self).1.is_zero()
    }

    /// Greatest common divisor via the Euclidean algorithm (defined up to units).
    pub fn gcd(&self, other: &QuadInt) -> QuadInt {
        let mut x = self.clone();
        let mut y = other.clone();
        while !y.is_zero() {
            let r = x.div_rem(&y).1;
            x = y;
            y = r;
        }
        x
    }

    /// Canonical associate: totally positive if possible (Nr > 0), and of minimal
    /// trace among the w^{2k} multiples; otherwise first embedding positive.
    pub fn canonical_associate(&self) -> QuadInt {
        if self.is_zero() {
            return self.clone();
        }
        let mut x = self.clone();
        if x.norm().is_negative() {
            x = &x * &QuadInt::w();
        }
        if x.embed().0 < 0.0 {
            x = -x;
        }
        let w2 = QuadInt::new(1, 1);
        let w2inv = QuadInt::new(2, -1);
        let key = |y: &QuadInt| (y.trace().abs(), y.b.abs(), -y.b.clone());
        loop {
            let down = &x * &w2inv;
            if key(&down) < key(&x) {
                x = down;
                continue;
            }
            let up = &x * &w2;
            if key(&up) < key(&x) {
                x = up;
                continue;
            }
            break;
        }
        x
    }

    pub fn to_elem(&self) -> QuadElem {
        QuadElem::from_int(self.clone())
    }
}

impl Zero for QuadInt {
    fn zero() -> Self {
        QuadInt::new(0, 0)
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadInt {
    fn one() -> Self {
        QuadInt::new(1, 0)
    }
}

impl<'a, 'b> Add<&'b QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn add(self, o: &'b QuadInt) -> QuadInt {
        QuadInt { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a, 'b> Sub<&'b QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn sub(self, o: &'b QuadInt) -> QuadInt {
        QuadInt { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a, 'b> Mul<&'b QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn mul(self, o: &'b QuadInt) -> QuadInt {
        let bb = &self.b * &o.b;
        QuadInt {
            a: &self.a * &o.a + &bb,
            b: &self.a * &o.b + &self.b * &o.a + bb,
        }
    }
}

impl<'a> Neg for &'a QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt { a: -&self.a, b: -&self.b }
    }
}

macro_rules! forward_ops {
    ($t:ty) => {
        impl Add<$t> for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl<'a> Add<&'a $t> for $t {
            type Output = $t;
            fn add(self, o: &'a $t) -> $t {
                &self + o
            }
        }
        impl Sub<$t> for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl<'a> Sub<&'a $t> for $t {
            type Output = $t;
            fn sub(self, o: &'a $t) -> $t {
                &self - o
            }
        }
        impl Mul<$t> for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl<'a> Mul<&'a $t> for $t {
            type Output = $t;
            fn mul(self, o: &'a $t) -> $t {
                &self * o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}
pub(crate) use forward_ops;

forward_ops!(QuadInt);

impl Ring for QuadInt {
    fn from_i64(n: i64) -> Self {
        QuadInt::new(n, 0)
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ab(f, &self.a, &self.b)
    }
}

fn write_ab(f: &mut fmt::Formatter<'_>, a: &BigInt, b: &BigInt) -> fmt::Result {
    match (a.is_zero(), b.is_zero()) {
        (_, true) => write!(f, "{}", a),
        (true, false) => {
            if b.is_one() {
                write!(f, "w")
            } else if (-b).is_one() {
                write!(f, "-w")
            } else {
                write!(f, "{}w", b)
            }
        }
        (false, false) => {
            write!(f, "{}", a)?;
            if b.is_one() {
                write!(f, "+w")
            } else if (-b).is_one() {
                write!(f, "-w")
            } else if b.is_positive() {
                write!(f, "+{}w", b)
            } else {
                write!(f, "{}w", b)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Q(√5)
// ---------------------------------------------------------------------------

/// Element (a + b·w)/den of Q(√5), den > 0 and gcd(a, b, den) = 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadElem {
    pub num: QuadInt,
    pub den: BigInt,
}

impl QuadElem {
    pub fn new(num: QuadInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut e = QuadElem { num, den };
        e.reduce();
        e
    }

    pub fn from_int(num: QuadInt) -> Self {
        QuadElem { num, den: BigInt::one() }
    }

    pub fn from_i64s(a: i64, b: i64) -> Self {
        QuadElem::from_int(QuadInt::new(a, b))
    }

    /// (a_n/a_d) + (b_n/b_d)·w.
    pub fn from_rats(a: &BigRational, b: &BigRational) -> Self {
        let den = a.denom().lcm(b.denom());
        let na = a.numer() * (&den / a.denom());
        let nb = b.numer() * (&den / b.denom());
        QuadElem::new(QuadInt { a: na, b: nb }, den)
    }

    /// Build from small rationals: a_n/a_d + (b_n/b_d) w.
    pub fn q(an: i64, ad: i64, bn: i64, bd: i64) -> Self {
        QuadElem::from_rats(
            &BigRational::new(an.into(), ad.into()),
            &BigRational::new(bn.into(), bd.into()),
        )
    }

    pub fn from_rat(r: &BigRational) -> Self {
        QuadElem::new(QuadInt { a: r.numer().clone(), b: BigInt::zero() }, r.denom().clone())
    }

    pub fn w() -> Self {
        QuadElem::from_i64s(0, 1)
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            self.num = -&self.num;
        }
        let g = self.num.a.gcd(&self.num.b).gcd(&self.den);
        if !g.is_one() && !g.is_zero() {
            self.num.a /= &g;
            self.num.b /= &g;
            self.den /= &g;
        }
        if self.num.is_zero() {
            self.den = BigInt::one();
        }
    }

    /// Rational coordinates (a, b) with self = a + b·w.
    pub fn coords(&self) -> (BigRational, BigRational) {
        (
            BigRational::new(self.num.a.clone(), self.den.clone()),
            BigRational::new(self.num.b.clone(), self.den.clone()),
        )
    }

    pub fn conj(&self) -> Self {
        QuadElem { num: self.num.conj(), den: self.den.clone() }
    }

    pub fn norm(&self) -> BigRational {
        BigRational::new(self.num.norm(), &self.den * &self.den)
    }

    pub fn trace(&self) -> BigRational {
        BigRational::new(self.num.trace(), self.den.clone())
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_int(&self) -> Option<QuadInt> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    /// Rational value if the w-coordinate vanishes.
    pub fn as_rat(&self) -> Option<BigRational> {
        if self.num.b.is_zero() {
            Some(BigRational::new(self.num.a.clone(), self.den.clone()))
        } else {
            None
        }
    }

    pub fn embed(&self) -> (f64, f64) {
        let (x, y) = self.num.embed();
        let d = self.den.to_f64().unwrap_or(f64::NAN);
        (x / d, y / d)
    }

    pub fn is_totally_positive(&self) -> bool {
        self.num.is_totally_positive()
    }

    /// Serialized as "a/d+b/d*w".
    pub fn to_wire(&self) -> String {
        let (a, b) = self.coords();
        format!("{}/{}{}{}/{}*w", a.numer(), a.denom(), if b.is_negative() { "" } else { "+" }, b.numer(), b.denom())
    }

    pub fn from_wire(s: &str) -> Option<Self> {
        let s = s.trim();
        let body = s.strip_suffix("*w")?;
        // split at the sign that starts the w coefficient
        let bytes = body.as_bytes();
        let mut cut = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'/' {
                cut = Some(i);
                break;
            }
        }
        let cut = cut?;
        let a: BigRational = body[..cut].parse().ok()?;
        let bstr = body[cut..].trim_start_matches('+');
        let b: BigRational = bstr.parse().ok()?;
        Some(QuadElem::from_rats(&a, &b))
    }
}

impl Zero for QuadElem {
    fn zero() -> Self {
        QuadElem::from_i64s(0, 0)
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for QuadElem {
    fn one() -> Self {
        QuadElem::from_i64s(1, 0)
    }
}

impl<'a, 'b> Add<&'b QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn add(self, o: &'b QuadElem) -> QuadElem {
        if self.den == o.den {
            return QuadElem::new(&self.num + &o.num, self.den.clone());
        }
        let n = &(&self.num * &QuadInt { a: o.den.clone(), b: BigInt::zero() })
            + &(&o.num * &QuadInt { a: self.den.clone(), b: BigInt::zero() });
        QuadElem::new(n, &self.den * &o.den)
    }
}

impl<'a, 'b> Sub<&'b QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn sub(self, o: &'b QuadElem) -> QuadElem {
        self + &(-o)
    }
}

impl<'a, 'b> Mul<&'b QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn mul(self, o: &'b QuadElem) -> QuadElem {
        QuadElem::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl<'a> Neg for &'a QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem { num: -&self.num, den: self.den.clone() }
    }
}

forward_ops!(QuadElem);

impl Ring for QuadElem {
    fn from_i64(n: i64) -> Self {
        QuadElem::from_i64s(n, 0)
    }
}

impl Field for QuadElem {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // 1/(x/d) = d·σ(x)/Nr(x)
        let n = self.num.norm();
        let c = self.num.conj();
        let num = QuadInt { a: c.a * &self.den, b: c.b * &self.den };
        Some(QuadElem::new(num, n))
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "(")?;
            write_ab(f, &self.num.a, &self.num.b)?;
            write!(f, ")/{}", self.den)
        }
    }
}

/// Parse human-written elements such as "3+w", "4-w", "2w+7", "-1+2w", "17", "w".
impl FromStr for QuadInt {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
        if s.is_empty() {
            return Err("empty".into());
        }
        let mut a = BigInt::zero();
        let mut b = BigInt::zero();
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for t in terms {
            let t = t.trim_start_matches('+');
            if let Some(c) = t.strip_suffix('w') {
                let coef = match c {
                    "" => BigInt::one(),
                    "-" => -BigInt::one(),
                    _ => c.parse::<BigInt>().map_err(|e| format!("bad term {t}: {e}"))?,
                };
                b += coef;
            } else {
                a += t.parse::<BigInt>().map_err(|e| format!("bad term {t}: {e}"))?;
            }
        }
        Ok(QuadInt { a, b })
    }
}

/// All totally positive a + bw with 1 ≤ a ≤ a_max, ordered by (a, b).
pub fn tp_enumerate(a_max: i64) -> Vec<QuadInt> {
    let mut out = Vec::new();
    for a in 1..=a_max {
        // −a/w < b < a/(w−1) = a·w
        let lo = (-(a as f64) / W1).floor() as i64 - 1;
        let hi = ((a as f64) * W1).ceil() as i64 + 1;
        for b in lo..=hi {
            let x = QuadInt::new(a, b);
            if x.is_totally_positive() {
                out.push(x);
            }
        }
    }
    out
}

/// (norm, trace, conjugate) of an element of Q(√5).
pub fn quad_norm_trace_conj(x: &QuadElem) -> (BigRational, BigRational, QuadElem) {
    (x.norm(), x.trace(), x.conj())
}


impl serde::Serialize for QuadElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_wire())
    }
}

impl<'de> serde::Deserialize<'de> for QuadElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        QuadElem::from_wire(&s).ok_or_else(|| serde::de::Error::custom(format!("bad Q(√5) element {s:?}")))
    }
}
