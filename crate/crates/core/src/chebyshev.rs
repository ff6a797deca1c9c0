//! The quintic P₅ = D₅¹ + D₅², the Dickson pair, the 16 critical points over Q(ζ15) and
//! the identification of P₅ with the skew-pentagon polynomial F₋₂ over Q(i).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{CycloElem, FieldTable, GaussRatElem};
use crate::field::{rat, Field, Ring};
use crate::poly::{resultant, Poly};

/// Sparse bivariate polynomial, (i, j) ↦ coefficient of x1^i x2^j.
#[derive(Clone, PartialEq, Debug)]
pub struct BivarPoly<K> {
    pub terms: BTreeMap<(u32, u32), K>,
}

impl<K: Ring> BivarPoly<K> {
    pub fn zero() -> Self {
        BivarPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: K) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, c);
        p
    }

    pub fn x1() -> Self {
        let mut p = Self::zero();
        p.add_term(1, 0, K::one());
        p
    }

    pub fn x2() -> Self {
        let mut p = Self::zero();
        p.add_term(0, 1, K::one());
        p
    }

    pub fn from_terms(terms: &[(u32, u32, i64)]) -> Self {
        let mut p = Self::zero();
        for &(i, j, c) in terms {
            p.add_term(i, j, K::from_i64(c));
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: K) {
        let e = self.terms.entry((i, j)).or_insert_with(K::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> K {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(K::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (&(i, j), c) in &o.terms {
            r.add_term(i, j, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-K::one()))
    }

    pub fn scale(&self, s: &K) -> Self {
        let mut r = Self::zero();
        for (&(i, j), c) in &self.terms {
            r.add_term(i, j, c.clone() * s.clone());
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &o.terms {
                r.add_term(i + k, j + l, a.clone() * b.clone());
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::constant(K::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn eval(&self, x1: &K, x2: &K) -> K {
        let mut acc = K::zero();
        for (&(i, j), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..i {
                t = t * x1.clone();
            }
            for _ in 0..j {
                t = t * x2.clone();
            }
            acc = acc + t;
        }
        acc
    }

    pub fn d1(&self) -> Self {
        let mut r = Self::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                r.add_term(i - 1, j, c.clone() * K::from_i64(i as i64));
            }
        }
        r
    }

    pub fn d2(&self) -> Self {
        let mut r = Self::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                r.add_term(i, j - 1, c.clone() * K::from_i64(j as i64));
            }
        }
        r
    }

    /// x1 ↔ x2.
    pub fn swap(&self) -> Self {
        let mut r = Self::zero();
        for (&(i, j), c) in &self.terms {
            r.add_term(j, i, c.clone());
        }
        r
    }

    pub fn map<L: Ring>(&self, f: impl Fn(&K) -> L) -> BivarPoly<L> {
        let mut r = BivarPoly::zero();
        for (&(i, j), c) in &self.terms {
            r.add_term(i, j, f(c));
        }
        r
    }

    /// Substitute polynomials for x1 and x2.
    pub fn compose(&self, a: &Self, b: &Self) -> Self {
        let mut r = Self::zero();
        for (&(i, j), c) in &self.terms {
            r = r.add(&a.pow(i).mul(&b.pow(j)).scale(c));
        }
        r
    }

    /// Coefficients in x1 as polynomials in x2: result[k] = coefficient of x1^k.
    pub fn as_poly_in_x1_at(&self, x2: &K) -> Poly<K> {
        let deg = self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0) as usize;
        let mut c = vec![K::zero(); deg + 1];
        for (&(i, j), coef) in &self.terms {
            let mut t = coef.clone();
            for _ in 0..j {
                t = t * x2.clone();
            }
            c[i as usize] = c[i as usize].clone() + t;
        }
        Poly::new(c)
    }
}

/// P₅ = x1⁵ + x2⁵ − 5x1x2(x1² + x2²) + 5x1x2(x1 + x2) + 5(x1² + x2²) − 5(x1 + x2).
pub fn build_p5<K: Ring>() -> BivarPoly<K> {
    BivarPoly::from_terms(&[
        (5, 0, 1),
        (0, 5, 1),
        (3, 1, -5),
        (1, 3, -5),
        (2, 1, 5),
        (1, 2, 5),
        (2, 0, 5),
        (0, 2, 5),
        (1, 0, -5),
        (0, 1, -5),
    ])
}

/// x1⁵ + x2⁵ − 5(x1x2 − 1)(x1² + x2² − x1 − x2).
pub fn build_p5_factored<K: Ring>() -> BivarPoly<K> {
    let x1 = BivarPoly::<K>::x1();
    let x2 = BivarPoly::<K>::x2();
    let one = BivarPoly::constant(K::one());
    let a = x1.mul(&x2).sub(&one);
    let b = x1.pow(2).add(&x2.pow(2)).sub(&x1).sub(&x2);
    x1.pow(5).add(&x2.pow(5)).sub(&a.mul(&b).scale(&K::from_i64(5)))
}

/// D_n¹ and D_n² with a = 1:
/// D_n¹ = x1 D_{n−1}¹ − x2 D_{n−2}¹ + D_{n−3}¹ and symmetrically for D_n².
pub fn dickson_pair<K: Ring>(n: usize) -> (BivarPoly<K>, BivarPoly<K>) {
    let x1 = BivarPoly::<K>::x1();
    let x2 = BivarPoly::<K>::x2();
    let seq = |a: &BivarPoly<K>, b: &BivarPoly<K>| {
        let mut d = vec![
            BivarPoly::constant(K::from_i64(3)),
            a.clone(),
            a.mul(a).sub(&b.scale(&K::from_i64(2))),
        ];
        while d.len() <= n {
            let k = d.len();
            let next = a.mul(&d[k - 1]).sub(&b.mul(&d[k - 2])).add(&d[k - 3]);
            d.push(next);
        }
        d.swap_remove(n)
    };
    (seq(&x1, &x2), seq(&x2, &x1))
}

/// Evaluate (D_n¹, D_n²) at a point of F_q² by the recurrence.
pub fn dickson_eval(f: &FieldTable, n: usize, x1: u32, x2: u32) -> (u32, u32) {
    let run = |a: u32, b: u32| {
        let three = f.from_int(3);
        let mut d = vec![three, a, f.sub(f.mul(a, a), f.mul(f.from_int(2), b))];
        while d.len() <= n {
            let k = d.len();
            let v = f.add(f.sub(f.mul(a, d[k - 1]), f.mul(b, d[k - 2])), d[k - 3]);
            d.push(v);
        }
        d[n]
    };
    (run(x1, x2), run(x2, x1))
}

/// Brute-force bijectivity of the Dickson vector map on F_q².
pub fn dickson_map_is_bijective(f: &FieldTable, n: usize) -> bool {
    let q = f.q as usize;
    let mut seen = vec![false; q * q];
    for x1 in 0..q as u32 {
        for x2 in 0..q as u32 {
            let (a, b) = dickson_eval(f, n, x1, x2);
            let idx = a as usize * q + b as usize;
            if seen[idx] {
                return false;
            }
            seen[idx] = true;
        }
    }
    true
}

/// Evaluate P₅ over F_q.
pub fn p5_eval(f: &FieldTable, x1: u32, x2: u32) -> u32 {
    build_p5_fq(f, x1, x2)
}

fn build_p5_fq(f: &FieldTable, x1: u32, x2: u32) -> u32 {
    let five = f.from_int(5);
    let s = f.add(x1, x2);
    let p = f.mul(x1, x2);
    let sq = f.add(f.mul(x1, x1), f.mul(x2, x2));
    let x1_5 = f.pow(x1, 5);
    let x2_5 = f.pow(x2, 5);
    // x1⁵ + x2⁵ − 5(p − 1)(sq − s)
    let t = f.mul(five, f.mul(f.sub(p, 1), f.sub(sq, s)));
    f.sub(f.add(x1_5, x2_5), t)
}

// ---------------------------------------------------------------------------
// Critical points
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub coords: (CycloElem, CycloElem),
    pub value: i64,
    pub galois_orbit_size: usize,
    /// index of the table row this point's orbit belongs to
    pub family: usize,
}

/// Units of Z/15.
pub const GALOIS_15: [i64; 8] = [1, 2, 4, 7, 8, 11, 13, 14];

/// Representatives of the five Galois orbits, in table order.
pub fn critical_orbit_representatives() -> Vec<(CycloElem, CycloElem)> {
    let w = CycloElem::w();
    let one = CycloElem::one();
    let z5 = CycloElem::zeta5();
    let z5i = CycloElem::zeta_pow(-3);
    let z3 = CycloElem::zeta3();
    let z3i = CycloElem::zeta_pow(-5);
    vec![
        (w.clone(), w.clone()),
        (&w + &one, &w + &one),
        (-z5.clone(), -z5i.clone()),
        (&(&z5 - &z5i) - &one, &(&z5i - &z5) - &one),
        (&w * &z3, &w * &z3i),
    ]
}

/// All 16 critical points of P₅ over Q(ζ15).
///
/// The two partials have degree 4, so there are at most 16 isolated common zeros;
/// finding 16 distinct ones accounts for all of them.
pub fn critical_points() -> Vec<CriticalPoint> {
    let p5 = build_p5::<CycloElem>();
    let mut out: Vec<CriticalPoint> = Vec::new();
    for (fam, rep) in critical_orbit_representatives().into_iter().enumerate() {
        let mut orbit: Vec<(CycloElem, CycloElem)> = Vec::new();
        for &k in &GALOIS_15 {
            let pt = (rep.0.galois(k), rep.1.galois(k));
            if !orbit.contains(&pt) {
                orbit.push(pt);
            }
        }
        let size = orbit.len();
        for pt in orbit {
            let v = p5.eval(&pt.0, &pt.1);
            let value = v
                .as_rat()
                .and_then(|r| if r.is_integer() { r.to_integer().to_i64() } else { None })
                .expect("critical value is an integer");
            out.push(CriticalPoint { coords: pt, value, galois_orbit_size: size, family: fam });
        }
    }
    out
}

/// Checks that each returned point is a nondegenerate critical point.
pub fn verify_critical_points(pts: &[CriticalPoint]) -> bool {
    let p5 = build_p5::<CycloElem>();
    let (g1, g2) = (p5.d1(), p5.d2());
    let (h11, h12, h22) = (g1.d1(), g1.d2(), g2.d2());
    let mut distinct = true;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[..i] {
            if a.coords == b.coords {
                distinct = false;
            }
        }
    }
    distinct
        && pts.iter().all(|c| {
            let (x, y) = (&c.coords.0, &c.coords.1);
            let hess = h11.eval(x, y) * h22.eval(x, y) - h12.eval(x, y) * h12.eval(x, y);
            g1.eval(x, y).is_zero() && g2.eval(x, y).is_zero() && !hess.is_zero()
        })
}

/// Multiset of critical values.
pub fn critical_value_counts(pts: &[CriticalPoint]) -> BTreeMap<i64, usize> {
    let mut m = BTreeMap::new();
    for c in pts {
        *m.entry(c.value).or_insert(0) += 1;
    }
    m
}

/// Reduce the critical points into F_{p^k} ⊇ μ15 and report whether they stay distinct.
pub fn critical_points_distinct_mod(p: u64) -> Result<bool, crate::CoreError> {
    let mut k = 1;
    while (p.pow(k) - 1) % 15 != 0 {
        k += 1;
    }
    let f = FieldTable::new(p, k)?;
    let zeta = f.element_of_order(15).expect("15 | q − 1");
    let red = |x: &CycloElem| -> Option<u32> {
        let mut acc = 0u32;
        let mut zp = 1u32;
        for c in &x.c {
            let v = crate::arith::finite::rat_mod(c, p)? as u32;
            acc = f.add(acc, f.mul(f.from_int(v as i64), zp));
            zp = f.mul(zp, zeta);
        }
        Some(acc)
    };
    let pts = critical_points();
    let mut seen = BTreeSet::new();
    for c in &pts {
        let a = red(&c.coords.0).ok_or(crate::CoreError::BadReduction(p))?;
        let b = red(&c.coords.1).ok_or(crate::CoreError::BadReduction(p))?;
        // sanity: reduced points are critical
        seen.insert((a, b));
    }
    Ok(seen.len() == pts.len())
}

// ---------------------------------------------------------------------------
// Skew pentagon identification over Q(i)
// ---------------------------------------------------------------------------

/// F₋₂(x, y) = (x − 2)(y⁴ − y²(2x² − 2x + 1) + (1/5)(x² + x − 1)²).
pub fn build_f_minus2() -> BivarPoly<BigRational> {
    let x = BivarPoly::<BigRational>::x1();
    let y = BivarPoly::<BigRational>::x2();
    let c = |n: i64| BivarPoly::constant(rat(n, 1));
    let lin = x.sub(&c(2));
    let quad = x.pow(2).scale(&rat(2, 1)).sub(&x.scale(&rat(2, 1))).add(&c(1));
    let sq = x.pow(2).add(&x).sub(&c(1)).pow(2).scale(&rat(1, 5));
    lin.mul(&y.pow(4).sub(&y.pow(2).mul(&quad)).add(&sq))
}

fn to_gauss(p: &BivarPoly<BigRational>) -> BivarPoly<GaussRatElem> {
    p.map(|c| GaussRatElem::from_rat(c.clone()))
}

/// The linear map (x1, x2) ↦ (−(x1 + x2)/2 + shift, i(x1 − x2)/2).
fn pentagon_map(shift: i64) -> (BivarPoly<GaussRatElem>, BivarPoly<GaussRatElem>) {
    let x1 = BivarPoly::<GaussRatElem>::x1();
    let x2 = BivarPoly::<GaussRatElem>::x2();
    let half = GaussRatElem::from_rat(rat(1, 2));
    let a = x1
        .add(&x2)
        .scale(&-half.clone())
        .add(&BivarPoly::constant(GaussRatElem::from_i64(shift)));
    let ihalf = GaussRatElem::new(rat(0, 1), rat(1, 2));
    let b = x1.sub(&x2).scale(&ihalf);
    (a, b)
}

/// Checks P₅(x1, x2) = −10·F₋₂(L(x1, x2)) − 2 identically over Q(i), where
/// L(x1, x2) = (−(x1 + x2)/2 + 1, i(x1 − x2)/2). With `perturb` the +1 is dropped.
pub fn verify_pentagon_match_with(perturb: bool) -> bool {
    let (a, b) = pentagon_map(if perturb { 0 } else { 1 });
    let f = to_gauss(&build_f_minus2());
    let rhs = f
        .compose(&a, &b)
        .scale(&GaussRatElem::from_i64(-10))
        .add(&BivarPoly::constant(GaussRatElem::from_i64(-2)));
    let lhs = to_gauss(&build_p5::<BigRational>());
    lhs == rhs
}

pub fn verify_pentagon_match() -> bool {
    verify_pentagon_match_with(false)
}

/// The identity with the roles of the two sides exchanged: P₅(L(x)) = −10·F₋₂(x) − 2.
pub fn pentagon_match_reversed() -> bool {
    let (a, b) = pentagon_map(1);
    let p5 = to_gauss(&build_p5::<BigRational>());
    let lhs = p5.compose(&a, &b);
    let rhs = to_gauss(&build_f_minus2())
        .scale(&GaussRatElem::from_i64(-10))
        .add(&BivarPoly::constant(GaussRatElem::from_i64(-2)));
    lhs == rhs
}

// ---------------------------------------------------------------------------
// Bad primes
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BadPrimeCertificate {
    /// Res_{x1}(∂P₅/∂x1, ∂P₅/∂x2) as a polynomial in x2
    pub resultant: Poly<BigRational>,
    pub discriminant: BigInt,
    pub primes: BTreeSet<u64>,
    /// cofactor left after trial division (1 when fully factored)
    pub cofactor: BigInt,
}

/// Factor the x2-discriminant of the x1-resultant of the two partials of P₅.
pub fn bad_prime_certificate() -> BadPrimeCertificate {
    let p5 = build_p5::<BigRational>();
    let (g1, g2) = (p5.d1(), p5.d2());
    // interpolate R(x2) from 24 integer nodes, check on 4 more
    let nodes: Vec<BigRational> = (0..28).map(|t| rat(t - 13, 1)).collect();
    let vals: Vec<BigRational> = nodes
        .iter()
        .map(|t| resultant(&g1.as_poly_in_x1_at(t), &g2.as_poly_in_x1_at(t)))
        .collect();
    let r = Poly::interpolate(&nodes[..24], &vals[..24]);
    for (t, v) in nodes[24..].iter().zip(&vals[24..]) {
        assert_eq!(&r.eval(t), v, "resultant degree exceeds interpolation bound");
    }
    let n = r.degree().unwrap_or(0);
    let rp = r.derivative();
    let res = resultant(&r, &rp);
    let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 { rat(-1, 1) } else { rat(1, 1) };
    let disc_r = sign * res / r.lead();
    assert!(disc_r.is_integer(), "discriminant is integral");
    let disc = disc_r.to_integer();
    let mut rest = disc.abs();
    let mut primes = BTreeSet::new();
    let mut d = 2u64;
    while d < 100_000 && !rest.is_one() && !rest.is_zero() {
        let bd = BigInt::from(d);
        if (&rest % &bd).is_zero() {
            primes.insert(d);
            while (&rest % &bd).is_zero() {
                rest /= &bd;
            }
        }
        d += 1;
    }
    BadPrimeCertificate { resultant: r, discriminant: disc, primes, cofactor: rest }
}

// ---------------------------------------------------------------------------
// Singular points of the covering
// ---------------------------------------------------------------------------

/// e^{−πiα/3} in Q(ζ15).
fn sixth_root(alpha: i64) -> CycloElem {
    // e^{iπ/3} = −ζ3², so e^{−πiα/3} = (−ζ3²)^{−α} = (−1)^α ζ3^{−2α}
    let z = CycloElem::zeta_pow(-10 * alpha);
    if alpha.rem_euclid(2) == 1 {
        -z
    } else {
        z
    }
}

/// Critical triples (y1, y2, y3) of Σ (yᵢ + 1/yᵢ) on y1y2y3 = 1 among sixth roots of
/// unity, with their critical values.
pub fn critical_triples() -> Vec<([CycloElem; 3], CycloElem)> {
    let mut out = Vec::new();
    for a1 in 0..6 {
        for a2 in 0..6 {
            let y1 = sixth_root(a1);
            let y2 = sixth_root(a2);
            let y3 = (&y1 * &y2).inv().unwrap();
            let f = |y: &CycloElem| y - &y.inv().unwrap();
            let g = |y: &CycloElem| y + &y.inv().unwrap();
            if f(&y1) == f(&y3) && f(&y2) == f(&y3) {
                let v = &(&g(&y1) + &g(&y2)) + &g(&y3);
                out.push(([y1, y2, y3], v));
            }
        }
    }
    out
}

/// The set T of 6-tuples: pairs of critical triples with equal value.
pub fn y_singular_set() -> Vec<[CycloElem; 6]> {
    let tr = critical_triples();
    let mut out = Vec::new();
    for (a, va) in &tr {
        for (b, vb) in &tr {
            if va == vb {
                out.push([a[0].clone(), a[1].clone(), a[2].clone(), b[0].clone(), b[1].clone(), b[2].clone()]);
            }
        }
    }
    out
}

/// (|T|, |T|·5⁴).
pub fn count_y_singular() -> (usize, usize) {
    let t = y_singular_set().len();
    (t, t * 625)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    #[test]
    fn p5_shape() {
        let p = build_p5::<Q>();
        assert_eq!(p.coeff(5, 0), rat(1, 1));
        assert!(p.sub(&p.swap()).is_zero());
        assert_eq!(p.eval(&rat(0, 1), &rat(0, 1)), rat(0, 1));
        assert_eq!(p, build_p5_factored::<Q>());
    }

    #[test]
    fn dickson_small_and_sum() {
        let (a, b) = dickson_pair::<Q>(0);
        assert_eq!(a, BivarPoly::constant(rat(3, 1)));
        assert_eq!(b, BivarPoly::constant(rat(3, 1)));
        let (a, b) = dickson_pair::<Q>(2);
        assert_eq!(a, BivarPoly::from_terms(&[(2, 0, 1), (0, 1, -2)]));
        assert_eq!(b, BivarPoly::from_terms(&[(0, 2, 1), (1, 0, -2)]));
        let (a, b) = dickson_pair::<Q>(5);
        assert_eq!(a.add(&b), build_p5::<Q>());
    }

    #[test]
    fn critical_point_table() {
        let pts = critical_points();
        assert_eq!(pts.len(), 16);
        assert!(verify_critical_points(&pts));
        let counts = critical_value_counts(&pts);
        assert_eq!(counts, BTreeMap::from([(-3, 4), (-2, 10), (6, 2)]));
        let sizes: Vec<usize> = (0..5).map(|f| pts.iter().find(|c| c.family == f).unwrap().galois_orbit_size).collect();
        assert_eq!(sizes, vec![2, 2, 4, 4, 4]);
        let w = CycloElem::w();
        assert!(pts.iter().any(|c| c.coords == (w.clone(), w.clone()) && c.value == 6));
    }

    #[test]
    fn pentagon() {
        assert!(verify_pentagon_match());
        assert!(!verify_pentagon_match_with(true));
    }

    #[test]
    fn y_singular() {
        let (t, total) = count_y_singular();
        assert_eq!((t, total), (14, 8750));
        let ones: [CycloElem; 6] = std::array::from_fn(|_| CycloElem::one());
        assert!(y_singular_set().contains(&ones));
    }

    #[test]
    fn distinct_mod_seven() {
        assert!(critical_points_distinct_mod(7).unwrap());
    }
}
