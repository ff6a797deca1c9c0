//! The totally definite quaternion algebra B = (−6, w − 3) over F = Q(√5), lattices in
//! it with Z[w]-bases, and the invariants of the orders O′ ⊃ O: reduced discriminant,
//! trace dual, the ternary form at ℘₅, mass, class number and type number.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::finite::FieldTable;
use crate::arith::hnf::{hnf_coords, hnf_of, ZwVec};
use crate::arith::quad::forward_ops;
use crate::arith::{QuadElem, QuadInt};
use crate::error::{CoreError, Result};
use crate::field::Field;
use crate::linalg::Matrix;

fn qe(a: i64, b: i64) -> QuadElem {
    QuadElem::from_i64s(a, b)
}

/// X² = A_SQ.
pub fn a_sq() -> QuadElem {
    qe(-6, 0)
}

/// Y² = B_SQ.
pub fn b_sq() -> QuadElem {
    qe(-3, 1)
}

/// c1 + cX·X + cY·Y + cXY·XY.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuatElem {
    pub c1: QuadElem,
    pub cx: QuadElem,
    pub cy: QuadElem,
    pub cxy: QuadElem,
}

impl QuatElem {
    pub fn new(c1: QuadElem, cx: QuadElem, cy: QuadElem, cxy: QuadElem) -> Self {
        QuatElem { c1, cx, cy, cxy }
    }

    pub fn from_coords(c: [QuadElem; 4]) -> Self {
        let [c1, cx, cy, cxy] = c;
        QuatElem { c1, cx, cy, cxy }
    }

    pub fn coords(&self) -> [QuadElem; 4] {
        [self.c1.clone(), self.cx.clone(), self.cy.clone(), self.cxy.clone()]
    }

    pub fn from_f(x: QuadElem) -> Self {
        QuatElem::new(x, QuadElem::zero(), QuadElem::zero(), QuadElem::zero())
    }

    pub fn x() -> Self {
        QuatElem::new(QuadElem::zero(), QuadElem::one(), QuadElem::zero(), QuadElem::zero())
    }

    pub fn y() -> Self {
        QuatElem::new(QuadElem::zero(), QuadElem::zero(), QuadElem::one(), QuadElem::zero())
    }

    pub fn xy() -> Self {
        QuatElem::new(QuadElem::zero(), QuadElem::zero(), QuadElem::zero(), QuadElem::one())
    }

    pub fn conj(&self) -> Self {
        QuatElem::new(self.c1.clone(), -&self.cx, -&self.cy, -&self.cxy)
    }

    /// Reduced norm b·b̄ = c1² − a·cX² − b·cY² + ab·cXY² with a = X², b = Y².
    pub fn nr(&self) -> QuadElem {
        let a = a_sq();
        let b = b_sq();
        let ab = &a * &b;
        &(&(&self.c1 * &self.c1) - &(&a * &(&self.cx * &self.cx))) - &(&b * &(&self.cy * &self.cy))
            + &ab * &(&self.cxy * &self.cxy)
    }

    pub fn tr(&self) -> QuadElem {
        &self.c1 + &self.c1
    }

    pub fn scale(&self, s: &QuadElem) -> Self {
        QuatElem::new(&self.c1 * s, &self.cx * s, &self.cy * s, &self.cxy * s)
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.nr().inv()?;
        Some(self.conj().scale(&n))
    }

    /// Common integer denominator of the four coordinates.
    pub fn denominator(&self) -> BigInt {
        [&self.c1, &self.cx, &self.cy, &self.cxy].iter().fold(BigInt::one(), |d, c| d.lcm(&c.den))
    }

    pub fn is_zero(&self) -> bool {
        self.c1.is_zero() && self.cx.is_zero() && self.cy.is_zero() && self.cxy.is_zero()
    }

    /// Values of Nr under both real embeddings of F.
    pub fn nr_embedded(&self) -> (f64, f64) {
        self.nr().embed()
    }
}

impl Zero for QuatElem {
    fn zero() -> Self {
        QuatElem::from_f(QuadElem::zero())
    }
    fn is_zero(&self) -> bool {
        QuatElem::is_zero(self)
    }
}

impl One for QuatElem {
    fn one() -> Self {
        QuatElem::from_f(QuadElem::one())
    }
}

impl<'a, 'b> Add<&'b QuatElem> for &'a QuatElem {
    type Output = QuatElem;
    fn add(self, o: &QuatElem) -> QuatElem {
        QuatElem::new(&self.c1 + &o.c1, &self.cx + &o.cx, &self.cy + &o.cy, &self.cxy + &o.cxy)
    }
}

impl<'a, 'b> Sub<&'b QuatElem> for &'a QuatElem {
    type Output = QuatElem;
    fn sub(self, o: &QuatElem) -> QuatElem {
        QuatElem::new(&self.c1 - &o.c1, &self.cx - &o.cx, &self.cy - &o.cy, &self.cxy - &o.cxy)
    }
}

impl<'a, 'b> Mul<&'b QuatElem> for &'a QuatElem {
    type Output = QuatElem;
    // i = X, j = Y, k = XY: i² = a, j² = b, k² = −ab, ij = −ji = k,
    // ik = a·j, ki = −a·j, jk = −b·i, kj = b·i
    fn mul(self, o: &QuatElem) -> QuatElem {
        let a = a_sq();
        let b = b_sq();
        let ab = &a * &b;
        let (x0, x1, x2, x3) = (&self.c1, &self.cx, &self.cy, &self.cxy);
        let (y0, y1, y2, y3) = (&o.c1, &o.cx, &o.cy, &o.cxy);
        let c0 = &(&(x0 * y0) + &(&a * &(x1 * y1))) + &(&(&b * &(x2 * y2)) - &(&ab * &(x3 * y3)));
        let c1 = &(&(x0 * y1) + &(x1 * y0)) + &(&b * &(&(x3 * y2) - &(x2 * y3)));
        let c2 = &(&(x0 * y2) + &(x2 * y0)) + &(&a * &(&(x1 * y3) - &(x3 * y1)));
        let c3 = &(&(x0 * y3) + &(x3 * y0)) + &(&(x1 * y2) - &(x2 * y1));
        QuatElem::new(c0, c1, c2, c3)
    }
}

impl<'a> Neg for &'a QuatElem {
    type Output = QuatElem;
    fn neg(self) -> QuatElem {
        QuatElem::new(-&self.c1, -&self.cx, -&self.cy, -&self.cxy)
    }
}

forward_ops!(QuatElem);

impl fmt::Display for QuatElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, name) in [(&self.c1, ""), (&self.cx, "X"), (&self.cy, "Y"), (&self.cxy, "XY")] {
            if c.is_zero() {
                continue;
            }
            if name.is_empty() {
                parts.push(format!("({c})"));
            } else {
                parts.push(format!("({c}){name}"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Gcd of a list of elements of F as a fractional ideal, returned as its canonical
/// (totally positive when possible) generator.
pub fn fractional_gcd(xs: &[QuadElem]) -> QuadElem {
    let den = xs.iter().fold(BigInt::one(), |d, x| d.lcm(&x.den));
    let mut g = QuadInt::zero();
    for x in xs {
        let n = (x * &QuadElem::from_int(QuadInt::new(den.clone(), 0))).as_int().expect("cleared denominator");
        g = g.gcd(&n);
    }
    QuadElem::new(g.canonical_associate(), den)
}

/// Square root in Z[w], if one exists. A root s has N(s) = ±√N(x) and
/// Tr(s)² = Tr(x) + 2N(s), which pins s down up to sign and conjugation.
pub fn zw_sqrt(x: &QuadInt) -> Option<QuadInt> {
    if x.is_zero() {
        return Some(QuadInt::zero());
    }
    let nx = x.norm();
    if nx.is_negative() {
        return None;
    }
    let n = nx.sqrt();
    if &n * &n != nx {
        return None;
    }
    for ns in [n.clone(), -n] {
        let t2: BigInt = x.trace() + &ns * 2;
        if t2.is_negative() {
            continue;
        }
        let t = t2.sqrt();
        if &t * &t != t2 {
            continue;
        }
        let d2: BigInt = &t * &t - &ns * 4;
        if d2.is_negative() || !(&d2 % BigInt::from(5)).is_zero() {
            continue;
        }
        let d = (&d2 / BigInt::from(5)).sqrt();
        for d in [d.clone(), -d] {
            let c2 = &t - &d;
            if c2.is_odd() {
                continue;
            }
            let s = QuadInt::new(&c2 / BigInt::from(2), d);
            if &(&s * &s) == x {
                return Some(s);
            }
        }
    }
    None
}

/// A full-rank Z[w]-lattice in B, stored as (1/den)·L₀ with L₀ ⊆ Z[w]⁴ in Hermite
/// normal form on the coordinates (1, X, Y, XY). `den` is the least integer with
/// den·L integral, so the representation is canonical.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuatLattice {
    den: BigInt,
    hnf: [ZwVec; 4],
}

fn to_zw(x: &QuatElem, den: &BigInt) -> ZwVec {
    let d = QuadElem::from_int(QuadInt::new(den.clone(), 0));
    let c = x.coords();
    std::array::from_fn(|i| (&c[i] * &d).as_int().expect("denominator clears coordinates"))
}

fn from_zw(v: &ZwVec, den: &BigInt) -> QuatElem {
    QuatElem::from_coords(std::array::from_fn(|i| QuadElem::new(v[i].clone(), den.clone())))
}

impl QuatLattice {
    pub fn from_gens(gens: &[QuatElem]) -> Result<Self> {
        let den = gens.iter().fold(BigInt::one(), |d, g| d.lcm(&g.denominator()));
        let vecs: Vec<ZwVec> = gens.iter().map(|g| to_zw(g, &den)).collect();
        let hnf = hnf_of(&vecs)?;
        // den may not be minimal for the span; shrink it by the common content
        let mut content = BigInt::zero();
        for v in &hnf {
            for c in v {
                content = content.gcd(&c.a).gcd(&c.b);
            }
        }
        let g = content.gcd(&den);
        if g.is_one() {
            return Ok(QuatLattice { den, hnf });
        }
        let gq = QuadInt::new(g.clone(), 0);
        let scaled: Vec<ZwVec> = hnf.iter().map(|v| std::array::from_fn(|i| v[i].exact_div(&gq).unwrap())).collect();
        Ok(QuatLattice { den: &den / &g, hnf: hnf_of(&scaled)? })
    }

    pub fn basis(&self) -> [QuatElem; 4] {
        std::array::from_fn(|i| from_zw(&self.hnf[i], &self.den))
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn hnf_rows(&self) -> &[ZwVec; 4] {
        &self.hnf
    }

    /// Z[w]-coordinates of x on `basis()`, if x lies in the lattice.
    pub fn coords_of(&self, x: &QuatElem) -> Option<[QuadInt; 4]> {
        let d = QuadElem::from_int(QuadInt::new(self.den.clone(), 0));
        let c = x.coords();
        let mut v: ZwVec = std::array::from_fn(|_| QuadInt::zero());
        for i in 0..4 {
            v[i] = (&c[i] * &d).as_int()?;
        }
        hnf_coords(&self.hnf, &v)
    }

    pub fn contains(&self, x: &QuatElem) -> bool {
        self.coords_of(x).is_some()
    }

    pub fn contains_lattice(&self, o: &QuatLattice) -> bool {
        o.basis().iter().all(|b| self.contains(b))
    }

    pub fn mul(&self, o: &QuatLattice) -> Result<QuatLattice> {
        let (a, b) = (self.basis(), o.basis());
        let gens: Vec<QuatElem> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        QuatLattice::from_gens(&gens)
    }

    pub fn conj(&self) -> QuatLattice {
        QuatLattice::from_gens(&self.basis().iter().map(|b| b.conj()).collect::<Vec<_>>())
            .expect("conjugation preserves rank")
    }

    /// s·L for a central scalar s ≠ 0.
    pub fn scale(&self, s: &QuadElem) -> QuatLattice {
        QuatLattice::from_gens(&self.basis().iter().map(|b| b.scale(s)).collect::<Vec<_>>())
            .expect("nonzero scaling preserves rank")
    }

    /// x·L.
    pub fn left_mul(&self, x: &QuatElem) -> Result<QuatLattice> {
        QuatLattice::from_gens(&self.basis().iter().map(|b| x * b).collect::<Vec<_>>())
    }

    pub fn sum(&self, o: &QuatLattice) -> Result<QuatLattice> {
        let mut gens = self.basis().to_vec();
        gens.extend(o.basis());
        QuatLattice::from_gens(&gens)
    }

    /// Gram matrix Tr(eᵢ·ēⱼ) of a list of elements.
    pub fn gram_of(b: &[QuatElem]) -> Matrix<QuadElem> {
        let n = b.len();
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = (&b[i] * &b[j].conj()).tr();
            }
        }
        g
    }

    pub fn gram_det(&self) -> QuadElem {
        QuatLattice::gram_of(&self.basis()).det()
    }

    /// The trace dual {y : Tr(x·ȳ) ∈ Z[w] for all x ∈ L}.
    pub fn dual(&self) -> Result<QuatLattice> {
        QuatLattice::from_gens(&dual_basis_of(&self.basis())?)
    }

    pub fn intersect(&self, o: &QuatLattice) -> Result<QuatLattice> {
        self.dual()?.sum(&o.dual()?)?.dual()
    }

    /// Norm ideal Nr(L), generated by Nr(bᵢ) and Tr(bᵢ·b̄ⱼ); a canonical generator.
    pub fn norm_ideal(&self) -> QuadElem {
        let b = self.basis();
        let mut vals = Vec::new();
        for i in 0..4 {
            vals.push(b[i].nr());
            for j in i + 1..4 {
                vals.push((&b[i] * &b[j].conj()).tr());
            }
        }
        fractional_gcd(&vals)
    }

    pub fn is_order(&self) -> bool {
        if !self.contains(&QuatElem::one()) {
            return false;
        }
        let b = self.basis();
        b.iter().all(|x| b.iter().all(|y| self.contains(&(x * y))))
    }

    /// {b : self·b ⊆ self}.
    pub fn right_colon(&self) -> Result<QuatLattice> {
        let mut acc: Option<QuatLattice> = None;
        for b in self.basis() {
            let inv = b.inv().ok_or_else(|| CoreError::DegenerateLattice("zero basis vector".into()))?;
            let piece = self.left_mul(&inv)?;
            acc = Some(match acc {
                None => piece,
                Some(a) => a.intersect(&piece)?,
            });
        }
        Ok(acc.unwrap())
    }

    /// {b : b·self ⊆ self}.
    pub fn left_colon(&self) -> Result<QuatLattice> {
        Ok(self.conj().right_colon()?.conj())
    }

    /// det of the coordinates of a basis of `sub` on a basis of `self`; its ideal is
    /// the module index [self : sub].
    pub fn index_of(&self, sub: &QuatLattice) -> Result<QuadInt> {
        let mut m = Matrix::zeros(4, 4);
        for (i, b) in sub.basis().iter().enumerate() {
            let c = self.coords_of(b).ok_or_else(|| CoreError::Invalid("not a sublattice".into()))?;
            for j in 0..4 {
                m[(i, j)] = c[j].to_elem();
            }
        }
        m.det().as_int().ok_or_else(|| CoreError::Internal("non-integral index".into()))
    }
}

impl fmt::Display for QuatLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.basis();
        write!(f, "o_F[{}; {}; {}; {}]", b[0], b[1], b[2], b[3])
    }
}

/// gⱼ with Tr(fᵢ·ḡⱼ) = δᵢⱼ.
pub fn dual_basis_of(f: &[QuatElem]) -> Result<Vec<QuatElem>> {
    let g = QuatLattice::gram_of(f);
    let inv = g.inverse().ok_or_else(|| CoreError::DegenerateLattice("singular trace form".into()))?;
    Ok((0..f.len())
        .map(|j| {
            let mut acc = QuatElem::zero();
            for (k, fk) in f.iter().enumerate() {
                acc = &acc + &fk.scale(&inv[(j, k)]);
            }
            acc
        })
        .collect())
}

/// An order (or candidate order) with its defining basis.
#[derive(Clone, Debug)]
pub struct OrderLattice {
    pub basis: [QuatElem; 4],
    pub lattice: QuatLattice,
    pub is_order: bool,
}

impl OrderLattice {
    pub fn new(basis: [QuatElem; 4]) -> Result<Self> {
        let lattice = QuatLattice::from_gens(&basis)?;
        let is_order = lattice.is_order();
        Ok(OrderLattice { basis, lattice, is_order })
    }

    pub fn from_lattice(lattice: QuatLattice) -> Self {
        let is_order = lattice.is_order();
        OrderLattice { basis: lattice.basis(), lattice, is_order }
    }
}

fn q4(a: (i64, i64, i64, i64), x: (i64, i64, i64, i64), y: (i64, i64, i64, i64), xy: (i64, i64, i64, i64)) -> QuatElem {
    QuatElem::new(
        QuadElem::q(a.0, a.1, a.2, a.3),
        QuadElem::q(x.0, x.1, x.2, x.3),
        QuadElem::q(y.0, y.1, y.2, y.3),
        QuadElem::q(xy.0, xy.1, xy.2, xy.3),
    )
}

const Z: (i64, i64, i64, i64) = (0, 1, 0, 1);

/// The hereditary order o_F[1, X, w/2 + Y/2, (w/2)X + XY/2].
pub fn big_order_basis() -> [QuatElem; 4] {
    [
        QuatElem::one(),
        QuatElem::x(),
        q4((0, 1, 1, 2), Z, (1, 2, 0, 1), Z),
        q4(Z, (0, 1, 1, 2), Z, (1, 2, 0, 1)),
    ]
}

/// The Eichler order O = o_F[1, X, −1/2 + ((3−w)/2)Y, −w/2 − ((w+1)/2)X + Y/2 + (w/2)XY].
pub fn eichler_order_basis() -> [QuatElem; 4] {
    [
        QuatElem::one(),
        QuatElem::x(),
        q4((-1, 2, 0, 1), Z, (3, 2, -1, 2), Z),
        q4((0, 1, -1, 2), (-1, 2, -1, 2), (1, 2, 0, 1), (0, 1, 1, 2)),
    ]
}

/// The basis f₁..f₄ of O used for the dual basis and the ideal generators.
pub fn f_basis() -> [QuatElem; 4] {
    [
        QuatElem::one(),
        QuatElem::x(),
        q4((0, 1, 1, 1), (0, 1, 1, 2), (1, 1, 0, 1), (1, 2, 0, 1)),
        q4((0, 1, 1, 2), (1, 2, 1, 2), (1, 2, 0, 1), (0, 1, 1, 2)),
    ]
}

pub fn big_order() -> OrderLattice {
    OrderLattice::new(big_order_basis()).expect("full rank")
}

pub fn eichler_order() -> OrderLattice {
    OrderLattice::new(eichler_order_basis()).expect("full rank")
}

/// Residue field of a prime of Z[w] with odd residue characteristic.
pub struct ResidueField {
    pub name: &'static str,
    /// A generator of the prime ideal.
    pub pi: QuadInt,
    pub table: FieldTable,
    w_image: u32,
}

impl ResidueField {
    /// The inert prime ℘₃ = (3), residue field F₉.
    pub fn p3() -> Self {
        ResidueField::build("℘3", QuadInt::new(3, 0), 3, 2)
    }

    /// The ramified prime ℘₅ = (2 + w), residue field F₅.
    pub fn p5() -> Self {
        ResidueField::build("℘5", QuadInt::new(2, 1), 5, 1)
    }

    fn build(name: &'static str, pi: QuadInt, p: u64, n: u32) -> Self {
        let table = FieldTable::new(p, n).expect("small residue field");
        let w_image = table.sqrt5_root_w().expect("x² − x − 1 has a root");
        ResidueField { name, pi, table, w_image }
    }

    pub fn valuation(&self, x: &QuadInt) -> Option<u32> {
        if x.is_zero() {
            return None;
        }
        let mut v = 0;
        let mut y = x.clone();
        while let Some(z) = y.exact_div(&self.pi) {
            y = z;
            v += 1;
        }
        Some(v)
    }

    /// Valuation of an element of F (negative for denominators).
    pub fn valuation_f(&self, x: &QuadElem) -> Option<i64> {
        let vn = self.valuation(&x.num)? as i64;
        let vd = self.valuation(&QuadInt::new(x.den.clone(), 0))? as i64;
        Some(vn - vd)
    }

    fn reduce_int(&self, x: &QuadInt) -> u32 {
        let a = self.table.from_bigint(&x.a);
        let b = self.table.from_bigint(&x.b);
        self.table.add(a, self.table.mul(b, self.w_image))
    }

    /// Image in the residue field of a ℘-integral element of F.
    pub fn reduce(&self, x: &QuadElem) -> Option<u32> {
        let d = self.reduce_int(&QuadInt::new(x.den.clone(), 0));
        let di = self.table.inv(d)?;
        Some(self.table.mul(self.reduce_int(&x.num), di))
    }

    /// Tame Hilbert symbol (a, b) at this prime.
    pub fn hilbert_symbol(&self, a: &QuadInt, b: &QuadInt) -> i8 {
        let va = self.valuation(a).expect("nonzero");
        let vb = self.valuation(b).expect("nonzero");
        let strip = |x: &QuadInt, v: u32| {
            let mut y = x.clone();
            for _ in 0..v {
                y = y.exact_div(&self.pi).unwrap();
            }
            self.reduce_int(&y)
        };
        let (ua, ub) = (strip(a, va), strip(b, vb));
        let t = &self.table;
        // (−1)^{αβ} a^β / b^α on units, then the Legendre character
        let mut c = t.mul(t.pow(ua, vb as u64), t.inv(t.pow(ub, va as u64)).unwrap());
        if (va * vb) % 2 == 1 {
            c = t.neg(c);
        }
        if t.is_square(c) {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HilbertReport {
    pub symbols: Vec<(String, i8)>,
    pub both_totally_negative: bool,
    pub ramified: Vec<String>,
}

/// Local symbols of (−6, w − 3). Odd primes off 6·5 are unramified since both entries
/// are units there; ℘₂ is read off from the product formula.
pub fn hilbert_checks() -> HilbertReport {
    let a = QuadInt::new(-6, 0);
    let b = QuadInt::new(-3, 1);
    let (a1, a2) = a.embed();
    let (b1, b2) = b.embed();
    let inf1: i8 = if a1 < 0.0 && b1 < 0.0 { -1 } else { 1 };
    let inf2: i8 = if a2 < 0.0 && b2 < 0.0 { -1 } else { 1 };
    let s3 = ResidueField::p3().hilbert_symbol(&a, &b);
    let s5 = ResidueField::p5().hilbert_symbol(&a, &b);
    let s2 = inf1 * inf2 * s3 * s5;
    let symbols = vec![
        ("∞1".to_string(), inf1),
        ("∞2".to_string(), inf2),
        ("℘2".to_string(), s2),
        ("℘3".to_string(), s3),
        ("℘5".to_string(), s5),
    ];
    let mut ramified: Vec<String> = symbols.iter().filter(|(_, s)| *s == -1).map(|(p, _)| p.clone()).collect();
    ramified.sort_by_key(|p| if p.starts_with('℘') { (0, p.clone()) } else { (1, p.clone()) });
    HilbertReport { symbols, both_totally_negative: a1 < 0.0 && a2 < 0.0 && b1 < 0.0 && b2 < 0.0, ramified }
}

/// The integral ideal d with d² = (det Tr(eᵢēⱼ)), as a canonical generator.
pub fn reduced_discriminant(l: &QuatLattice) -> Result<QuadInt> {
    let det = l.gram_det();
    let det = det
        .as_int()
        .ok_or_else(|| CoreError::Consistency(format!("Gram determinant {det} is not integral")))?;
    for unit in [QuadInt::one(), QuadInt::new(-1, 0), QuadInt::w(), QuadInt::new(0, -1)] {
        let d = det.exact_div(&unit).unwrap();
        if let Some(s) = zw_sqrt(&d) {
            return Ok(s.canonical_associate());
        }
    }
    Err(CoreError::Consistency(format!("Gram determinant {det} is not a square ideal")))
}

/// Trace-dual basis of an order's defining basis.
pub fn dual_basis(o: &OrderLattice) -> Result<[QuatElem; 4]> {
    let d = dual_basis_of(&o.basis)?;
    Ok([d[0].clone(), d[1].clone(), d[2].clone(), d[3].clone()])
}

/// q(x) = Σ mᵢⱼxᵢxⱼ with m symmetric, so the xᵢxⱼ coefficient (i < j) is 2mᵢⱼ.
#[derive(Clone, Debug, PartialEq)]
pub struct TernaryForm {
    pub m: [[QuadElem; 3]; 3],
}

impl TernaryForm {
    /// Norm form on the span of three elements: Nr(Σ xᵢhᵢ).
    pub fn of_norm(h: &[QuatElem; 3]) -> Self {
        let two_inv = QuadElem::q(1, 2, 0, 1);
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { h[i].nr() } else { &(&h[i] * &h[j].conj()).tr() * &two_inv })
        });
        TernaryForm { m }
    }

    /// Coefficients in the order x₁², x₂², x₃², x₁x₂, x₁x₃, x₂x₃.
    pub fn coefficients(&self) -> [QuadElem; 6] {
        let two = qe(2, 0);
        [
            self.m[0][0].clone(),
            self.m[1][1].clone(),
            self.m[2][2].clone(),
            &self.m[0][1] * &two,
            &self.m[0][2] * &two,
            &self.m[1][2] * &two,
        ]
    }

    pub fn from_coefficients(c: &[QuadElem; 6]) -> Self {
        let h = QuadElem::q(1, 2, 0, 1);
        let (a12, a13, a23) = (&c[3] * &h, &c[4] * &h, &c[5] * &h);
        TernaryForm {
            m: [
                [c[0].clone(), a12.clone(), a13.clone()],
                [a12, c[1].clone(), a23.clone()],
                [a13, a23, c[2].clone()],
            ],
        }
    }

    pub fn scale(&self, s: &QuadElem) -> Self {
        TernaryForm { m: std::array::from_fn(|i| std::array::from_fn(|j| &self.m[i][j] * s)) }
    }

    /// Generator of the ideal spanned by the coefficients.
    pub fn content(&self) -> QuadElem {
        fractional_gcd(&self.coefficients())
    }
}

/// Reduction type of a ternary form over a residue field of odd characteristic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Reduction {
    /// Product of two non-proportional linear forms, given by coefficient vectors.
    Split([u32; 3], [u32; 3]),
    /// A unit times the square of a linear form.
    Square([u32; 3]),
    /// Rank two without a factorization over the residue field.
    Irreducible,
    /// Rank three.
    Regular,
    Zero,
}

impl Reduction {
    /// The Eichler invariant encoded by this reduction.
    pub fn eichler(&self) -> Option<i8> {
        match self {
            Reduction::Split(..) => Some(1),
            Reduction::Square(_) => Some(0),
            Reduction::Irreducible => Some(-1),
            _ => None,
        }
    }
}

/// Factors a ternary form over the residue field by searching linear forms; the field
/// is tiny (F₅ here) so exhaustive search is the simplest exact method.
pub fn reduce_ternary(coeffs: &[u32; 6], t: &FieldTable) -> Reduction {
    let q = t.q as u32;
    if coeffs.iter().all(|&c| c == 0) {
        return Reduction::Zero;
    }
    let product = |l: &[u32; 3], m: &[u32; 3]| -> [u32; 6] {
        let mul = |a: u32, b: u32| t.mul(a, b);
        let cross = |i: usize, j: usize| t.add(mul(l[i], m[j]), mul(l[j], m[i]));
        [mul(l[0], m[0]), mul(l[1], m[1]), mul(l[2], m[2]), cross(0, 1), cross(0, 2), cross(1, 2)]
    };
    // linear forms normalized so the first nonzero coefficient is 1
    let mut forms = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let l = [a, b, c];
                if l.iter().find(|&&x| x != 0) == Some(&1) {
                    forms.push(l);
                }
            }
        }
    }
    let mut square = None;
    for (i, l) in forms.iter().enumerate() {
        for m in &forms[i..] {
            let p = product(l, m);
            // q = λ·l·m for a unit λ
            let Some(k) = (0..6).find(|&k| p[k] != 0) else { continue };
            let lambda = t.mul(coeffs[k], t.inv(p[k]).unwrap());
            if lambda != 0 && (0..6).all(|k| t.mul(lambda, p[k]) == coeffs[k]) {
                if l == m {
                    square = Some(*l);
                } else {
                    return Reduction::Split(*l, *m);
                }
            }
        }
    }
    if let Some(l) = square {
        return Reduction::Square(l);
    }
    // rank of the symmetric matrix decides between irreducible rank 2 and regular
    let half = t.inv(t.from_int(2)).unwrap();
    let m = [
        [coeffs[0], t.mul(coeffs[3], half), t.mul(coeffs[4], half)],
        [t.mul(coeffs[3], half), coeffs[1], t.mul(coeffs[5], half)],
        [t.mul(coeffs[4], half), t.mul(coeffs[5], half), coeffs[2]],
    ];
    let det = {
        let mm = |a: u32, b: u32| t.mul(a, b);
        let minor = |r1: usize, r2: usize, c1: usize, c2: usize| t.sub(mm(m[r1][c1], m[r2][c2]), mm(m[r1][c2], m[r2][c1]));
        let d0 = mm(m[0][0], minor(1, 2, 1, 2));
        let d1 = mm(m[0][1], minor(1, 2, 0, 2));
        let d2 = mm(m[0][2], minor(1, 2, 0, 1));
        t.add(t.sub(d0, d1), d2)
    };
    if det != 0 {
        Reduction::Regular
    } else {
        Reduction::Irreducible
    }
}

#[derive(Clone, Debug)]
pub struct EichlerData {
    /// Basis of O* ∩ B₀.
    pub trace_zero_dual: [QuatElem; 3],
    /// The norm form on that basis, before scaling.
    pub unscaled: TernaryForm,
    /// The generator of Nr(O*) the form is divided by.
    pub dual_norm: QuadElem,
    pub form: TernaryForm,
    pub reduction: Reduction,
    pub eichler: i8,
}

/// Builds q_{O*∩B₀} = Nr(·)/Nr(O*) on the trace-zero part of the dual and reads off the
/// Eichler invariant at ℘₅ from its reduction.
pub fn ternary_form_and_eichler(o: &OrderLattice) -> Result<EichlerData> {
    if !o.is_order {
        return Err(CoreError::Invalid("not an order".into()));
    }
    let dual = o.lattice.dual()?;
    // HNF rows 1..3 have zero 1-coordinate; only row 0 has a nonzero trace
    let b = dual.basis();
    let h = [b[1].clone(), b[2].clone(), b[3].clone()];
    let unscaled = TernaryForm::of_norm(&h);
    let dual_norm = dual.norm_ideal();
    let form = unscaled.scale(&dual_norm.inv().unwrap());
    let p5 = ResidueField::p5();
    let content = form.content();
    if p5.valuation_f(&content) != Some(0) {
        return Err(CoreError::Consistency(format!(
            "ternary form is not primitive at ℘5 (content {content})"
        )));
    }
    let c = form.coefficients();
    let red: [u32; 6] = std::array::from_fn(|i| p5.reduce(&c[i]).expect("℘5-integral"));
    let reduction = reduce_ternary(&red, &p5.table);
    let eichler = reduction
        .eichler()
        .ok_or_else(|| CoreError::Consistency(format!("reduction {reduction:?} has no Eichler invariant")))?;
    Ok(EichlerData { trace_zero_dual: h, unscaled, dual_norm, form, reduction, eichler })
}

/// Inputs to the mass formula m = 2^{1−n}|ζ_F(−1)|·Nr(d_r)·Π_{℘|d_r} (1 − N℘⁻²)/(1 − e℘·N℘⁻¹).
#[derive(Clone, Debug)]
pub struct MassInputs {
    pub degree: u32,
    pub abs_zeta_minus_one: BigRational,
    pub nr_dr: BigInt,
    /// (N℘, Eichler invariant e℘) for each prime dividing d_r; e = −1 at ramified primes.
    pub local: Vec<(u64, i64)>,
}

impl MassInputs {
    /// The data for O with e(O_℘₅) = e.
    pub fn for_eichler_order(e: i64) -> Self {
        MassInputs {
            degree: 2,
            abs_zeta_minus_one: BigRational::new(1.into(), 30.into()),
            nr_dr: BigInt::from(900),
            local: vec![(4, -1), (9, -1), (5, e)],
        }
    }
}

pub fn mass(inp: &MassInputs) -> BigRational {
    let one = BigRational::one();
    let mut m = BigRational::new(BigInt::one(), BigInt::from(2u32).pow(inp.degree - 1))
        * &inp.abs_zeta_minus_one
        * BigRational::from_integer(inp.nr_dr.clone());
    for &(n, e) in &inp.local {
        let n = BigRational::from_integer(n.into());
        let num = &one - (&n * &n).recip();
        let den = &one - BigRational::from_integer(e.into()) / &n;
        m = m * num / den;
    }
    m
}

/// Embedding-number rule table and central-Picard indices per prime dividing d_r.
#[derive(Clone, Debug, Serialize)]
pub struct LocalRules {
    pub primes: Vec<String>,
    /// E(Ω_v, O_v) for the quadratic orders Ω attached to the roots of unity.
    pub embedding_numbers: Vec<i64>,
    /// [Γ(O_v) : F_v*·O_v*].
    pub picard_indices: Vec<i64>,
    /// Number of (α, Ω) terms in the correction sum.
    pub omega_terms: i64,
    /// h(Ω) and [Ω* : o_F*] for Ω = o_F[ζ₁₀].
    pub omega_class_number: i64,
    pub omega_unit_index: i64,
}

impl Default for LocalRules {
    fn default() -> Self {
        LocalRules {
            primes: vec!["℘2".into(), "℘3".into(), "℘5".into()],
            // unramified L at the maximal places ℘2, ℘3; ramified L with e = 1 at ℘5
            embedding_numbers: vec![2, 2, 0],
            picard_indices: vec![1, 1, 4],
            omega_terms: 4,
            omega_class_number: 1,
            omega_unit_index: 5,
        }
    }
}

/// h = m + Σ_{α,Ω} Π_v E(Ω_v, O_v)·h(Ω)/(2[Ω*:o_F*]).
pub fn class_number(m: &BigRational, rules: &LocalRules) -> BigRational {
    let prod: i64 = rules.embedding_numbers.iter().product();
    let term = BigRational::new(
        BigInt::from(prod * rules.omega_class_number),
        BigInt::from(2 * rules.omega_unit_index),
    );
    m + term * BigRational::from_integer(rules.omega_terms.into())
}

/// t from m = t·Π[Γ(O_v) : F_v*O_v*].
pub fn type_number(m: &BigRational, rules: &LocalRules) -> BigRational {
    let prod: i64 = rules.picard_indices.iter().product();
    m / BigRational::from_integer(prod.into())
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderInvariants {
    pub d_r: String,
    pub d_r_norm: String,
    pub eichler: i8,
    pub mass: String,
    pub h: i64,
    pub t: i64,
}

fn as_integer(x: &BigRational, what: &str) -> Result<i64> {
    if !x.is_integer() {
        return Err(CoreError::Consistency(format!("{what} = {x} is not an integer")));
    }
    x.to_integer().to_i64().ok_or_else(|| CoreError::Internal(format!("{what} overflows")))
}

pub fn class_and_type(m: &BigRational, rules: &LocalRules) -> Result<(i64, i64)> {
    Ok((as_integer(&class_number(m, rules), "h")?, as_integer(&type_number(m, rules), "t")?))
}

/// Every invariant of O in one pass.
pub fn order_invariants() -> Result<OrderInvariants> {
    let o = eichler_order();
    let dr = reduced_discriminant(&o.lattice)?;
    let e = ternary_form_and_eichler(&o)?.eichler;
    let mut inp = MassInputs::for_eichler_order(e as i64);
    inp.nr_dr = dr.norm().abs();
    let m = mass(&inp);
    let (h, t) = class_and_type(&m, &LocalRules::default())?;
    Ok(OrderInvariants {
        d_r: dr.to_string(),
        d_r_norm: dr.norm().abs().to_string(),
        eichler: e,
        mass: m.to_string(),
        h,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_table() {
        let (x, y, xy) = (QuatElem::x(), QuatElem::y(), QuatElem::xy());
        assert_eq!(&x * &y, xy);
        assert_eq!(&y * &x, -&xy);
        assert_eq!(&x * &x, QuatElem::from_f(qe(-6, 0)));
        assert_eq!(&y * &y, QuatElem::from_f(qe(-3, 1)));
        assert_eq!(&xy * &xy, QuatElem::from_f(qe(-18, 6)));
        assert_eq!(x.nr(), qe(6, 0));
        // associativity on basis triples
        let basis = [QuatElem::one(), x, y, xy];
        for a in &basis {
            for b in &basis {
                for c in &basis {
                    assert_eq!(&(a * b) * c, a * &(b * c));
                }
            }
        }
    }

    #[test]
    fn hilbert_symbols() {
        let r = hilbert_checks();
        let get = |p: &str| r.symbols.iter().find(|(q, _)| q == p).unwrap().1;
        assert_eq!(get("℘3"), -1);
        assert_eq!(get("℘5"), 1);
        assert!(r.both_totally_negative);
        assert_eq!(r.ramified, vec!["℘2", "℘3", "∞1", "∞2"]);
    }

    #[test]
    fn orders_and_discriminants() {
        let big = big_order();
        let o = eichler_order();
        assert!(big.is_order && o.is_order);
        assert!(big.lattice.contains_lattice(&o.lattice));
        // the f-basis spans O
        assert_eq!(QuatLattice::from_gens(&f_basis()).unwrap(), o.lattice);
        let d_big = reduced_discriminant(&big.lattice).unwrap();
        let d_o = reduced_discriminant(&o.lattice).unwrap();
        assert_eq!(d_big, QuadInt::new(12, 6));
        assert_eq!(d_big.norm(), BigInt::from(180));
        assert_eq!(d_o, QuadInt::new(30, 0));
        let idx = big.lattice.index_of(&o.lattice).unwrap();
        assert_eq!(idx.norm().abs(), BigInt::from(5));
        // d_r(O)² matches the Gram determinant up to a unit
        let det = o.lattice.gram_det().as_int().unwrap();
        let sq = &d_o * &d_o;
        assert!(det.exact_div(&sq).map(|u| u.is_unit()).unwrap_or(false));
    }

    #[test]
    fn dual_basis_matches_table() {
        let o = OrderLattice::new(f_basis()).unwrap();
        let g = dual_basis(&o).unwrap();
        let f = f_basis();
        for i in 0..4 {
            for j in 0..4 {
                let t = (&f[i] * &g[j].conj()).tr();
                assert_eq!(t, qe((i == j) as i64, 0));
            }
        }
        let z = QuadElem::zero();
        assert_eq!(g[0], QuatElem::new(QuadElem::q(1, 2, 0, 1), z.clone(), QuadElem::q(-1, 10, -3, 10), z.clone()));
        assert_eq!(g[1], QuatElem::new(z.clone(), QuadElem::q(1, 12, 0, 1), z.clone(), QuadElem::q(-1, 60, -3, 60)));
        assert_eq!(g[2], QuatElem::new(z.clone(), z.clone(), QuadElem::q(1, 5, 1, 5), QuadElem::q(0, 1, -1, 30)));
        assert_eq!(g[3], QuatElem::new(z.clone(), z.clone(), QuadElem::q(0, 1, -3, 15), QuadElem::q(0, 1, 1, 15)));
        let dd = o.lattice.dual().unwrap().dual().unwrap();
        assert_eq!(dd, o.lattice);
    }

    #[test]
    fn ternary_form_at_five() {
        let o = eichler_order();
        let d = ternary_form_and_eichler(&o).unwrap();
        assert_eq!(d.eichler, 1);
        assert!(matches!(d.reduction, Reduction::Split(..)));
        assert_eq!(d.dual_norm, QuadElem::q(1, 30, 0, 1));
        assert!(d.form.content().is_one());
        // the displayed form on the displayed basis h₁, h₂, h₃
        let z = QuadElem::zero();
        let h = [
            QuatElem::new(z.clone(), QuadElem::q(2, 6, -1, 6), z.clone(), z.clone()),
            QuatElem::new(z.clone(), z.clone(), QuadElem::q(-1, 5, -3, 5), z.clone()),
            QuatElem::new(z.clone(), QuadElem::q(-3, 12, 2, 12), QuadElem::q(1, 5, 1, 5), QuadElem::q(1, 60, 1, 60)),
        ];
        let dual = o.lattice.dual().unwrap();
        for hi in &h {
            assert!(dual.contains(hi));
        }
        let displayed = [
            QuadElem::q(25, 6, -15, 6),
            qe(3, 4),
            QuadElem::q(20, 6, -5, 6),
            z.clone(),
            QuadElem::q(-40, 6, 25, 6),
            qe(-2, -4),
        ];
        let raw = TernaryForm::of_norm(&h).coefficients();
        for k in 0..6 {
            assert_eq!(&raw[k] * &qe(5, 0), displayed[k], "coefficient {k}");
        }
        let p5 = ResidueField::p5();
        let red: [u32; 6] = std::array::from_fn(|k| p5.reduce(&displayed[k]).unwrap());
        assert_eq!(&red[..5], &[0, 0, 0, 0, 0]);
        assert_ne!(red[5], 0);
        assert!(matches!(reduce_ternary(&red, &p5.table), Reduction::Split(..)));
    }

    #[test]
    fn mass_class_type() {
        let m = mass(&MassInputs::for_eichler_order(1));
        assert_eq!(m, BigRational::from_integer(12.into()));
        assert_eq!(mass(&MassInputs::for_eichler_order(0)), BigRational::new(48.into(), 5.into()));
        let mut doubled = MassInputs::for_eichler_order(1);
        doubled.nr_dr *= 2;
        assert_eq!(mass(&doubled), BigRational::from_integer(24.into()));
        assert_eq!(class_and_type(&m, &LocalRules::default()).unwrap(), (12, 3));
        let mut forced = LocalRules::default();
        forced.embedding_numbers[2] = 2;
        assert_ne!(class_number(&m, &forced), m);
        let inv = order_invariants().unwrap();
        assert_eq!((inv.eichler, inv.h, inv.t), (1, 12, 3));
    }
}
