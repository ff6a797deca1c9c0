//! The twelve left O-ideal classes, their right orders, the norm forms on Z⁸ and theta
//! series computed by ellipsoid enumeration.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{QuadElem, QuadInt};
use crate::error::{CoreError, Result};
use crate::quatorder::{eichler_order, f_basis, reduced_discriminant, QuatElem, QuatLattice};

fn qe(a: i64, b: i64) -> QuadElem {
    QuadElem::from_i64s(a, b)
}

/// Representative of ξ·w^{2k} minimizing (a, |b|) in a + bw.
pub fn normalize_xi(x: &QuadInt) -> QuadInt {
    if x.is_zero() {
        return x.clone();
    }
    let up = QuadInt::new(1, 1);
    let down = QuadInt::new(2, -1);
    let key = |y: &QuadInt| (y.a.clone(), y.b.abs());
    let mut best = x.clone();
    loop {
        let a = &best * &up;
        let b = &best * &down;
        if key(&a) < key(&best) {
            best = a;
        } else if key(&b) < key(&best) {
            best = b;
        } else {
            return best;
        }
    }
}

/// A lattice in B with a chosen totally positive generator of its norm ideal.
#[derive(Clone, Debug, PartialEq)]
pub struct LeftIdeal {
    pub lattice: QuatLattice,
    pub norm_gen: QuadElem,
}

impl LeftIdeal {
    pub fn new(lattice: QuatLattice) -> Self {
        let norm_gen = lattice.norm_ideal();
        LeftIdeal { lattice, norm_gen }
    }

    pub fn conj(&self) -> LeftIdeal {
        LeftIdeal { lattice: self.lattice.conj(), norm_gen: self.norm_gen.clone() }
    }

    pub fn mul(&self, o: &LeftIdeal) -> Result<LeftIdeal> {
        Ok(LeftIdeal::new(self.lattice.mul(&o.lattice)?))
    }

    /// Ī/Nr(I).
    pub fn inverse(&self) -> LeftIdeal {
        let s = crate::field::Field::inv(&self.norm_gen).expect("nonzero norm");
        LeftIdeal::new(self.lattice.conj().scale(&s))
    }

    /// Ī·I/Nr(I).
    pub fn right_order(&self) -> Result<QuatLattice> {
        Ok(self.inverse().lattice.mul(&self.lattice)?)
    }

    /// The right order by both constructions; they must agree.
    pub fn right_order_checked(&self) -> Result<QuatLattice> {
        let a = self.right_order()?;
        let b = self.lattice.right_colon()?;
        if a != b {
            return Err(CoreError::Consistency(format!("right order mismatch: Ī·I/Nr(I) = {a}, colon = {b}")));
        }
        Ok(a)
    }

    pub fn left_order(&self) -> Result<QuatLattice> {
        self.lattice.left_colon()
    }
}

/// α₁…α₅ in the f-basis coordinates of O.
pub fn alpha(k: usize) -> QuatElem {
    let f = f_basis();
    let c: [QuadElem; 4] = match k {
        1 => [qe(0, 0), qe(1, 0), qe(0, 0), qe(0, 0)],
        2 => [qe(0, 0), qe(1, 0), qe(3, 0), qe(-1, 0)],
        3 => [qe(2, -1), qe(-1, 0), qe(-1, -1), qe(0, 1)],
        4 => [qe(0, 0), qe(-1, 0), qe(-2, -1), qe(-1, 2)],
        5 => [qe(-2, -5), qe(0, 0), qe(2, 4), qe(1, -4)],
        _ => panic!("α index {k} out of range"),
    };
    let mut acc = QuatElem::zero();
    for i in 0..4 {
        acc = &acc + &f[i].scale(&c[i]);
    }
    acc
}

/// Generators (a + bw, c + α_k) of the twelve ideals of o_K, as (k, a, b, c).
const IDEAL_DATA: [(usize, (i64, i64), (i64, i64)); 11] = [
    (1, (2, 1), (2, 0)),
    (1, (2, 0), (0, 2)),
    (1, (2, 1), (3, 0)),
    (2, (2, 1), (-2, 0)),
    (2, (7, -2), (16, 0)),
    (2, (9, 13), (10, 0)),
    (3, (4, -1), (8, 0)),
    (3, (4, -1), (9, 0)),
    (4, (7, 0), (6, 4)),
    (5, (5, 3), (13, 0)),
    (5, (17, 0), (12, 12)),
];

/// The rational prime under Nr(I_i), i = 1..12.
pub const IDEAL_PRIMES: [u64; 12] = [1, 5, 2, 5, 5, 31, 29, 11, 11, 7, 31, 17];

/// I_i = O·(a + bw, γ) for i = 1..12; I₁ = O.
pub fn ideal_from_generators(i: usize) -> Result<LeftIdeal> {
    if !(1..=12).contains(&i) {
        return Err(CoreError::Invalid(format!("ideal index {i} not in 1..12")));
    }
    let o = eichler_order();
    if i == 1 {
        return Ok(LeftIdeal::new(o.lattice));
    }
    let (k, (a, b), (c0, c1)) = IDEAL_DATA[i - 2];
    let g1 = QuatElem::from_f(qe(a, b));
    let g2 = &QuatElem::from_f(qe(c0, c1)) + &alpha(k);
    let f = f_basis();
    let gens: Vec<QuatElem> = f.iter().flat_map(|fj| [fj * &g1, fj * &g2]).collect();
    Ok(LeftIdeal::new(QuatLattice::from_gens(&gens)?))
}

pub fn all_ideals() -> Result<Vec<LeftIdeal>> {
    (1..=12).map(ideal_from_generators).collect()
}

/// Scaled norm on the Z-basis {X_k, w·X_k}: Nr_S(Σ yᵢzᵢ) = (YᵀG₁Y + (YᵀG₂Y)·w)/2.
#[derive(Clone, Debug)]
pub struct NormForm8 {
    /// 2·Q1 as an integer matrix (even diagonal).
    pub g1: [[i64; 8]; 8],
    /// 2·Q2.
    pub g2: [[i64; 8]; 8],
    /// The Z-basis z₁..z₈.
    pub zbasis: [QuatElem; 8],
    pub norm_gen: QuadElem,
    /// Q1 = Uᵀ·diag(d)·U with U unit upper triangular, in floating point for bounds.
    d: [f64; 8],
    u: [[f64; 8]; 8],
}

impl NormForm8 {
    pub fn q1(&self, y: &[i64; 8]) -> i64 {
        quad_eval(&self.g1, y) / 2
    }

    pub fn q2(&self, y: &[i64; 8]) -> i64 {
        quad_eval(&self.g2, y) / 2
    }

    pub fn element(&self, y: &[i64; 8]) -> QuatElem {
        let mut acc = QuatElem::zero();
        for (k, &c) in y.iter().enumerate() {
            if c != 0 {
                acc = &acc + &self.zbasis[k].scale(&qe(c, 0));
            }
        }
        acc
    }

    /// Eigenvalue-free definiteness witness: the LDL pivots of Q1.
    pub fn pivots(&self) -> [f64; 8] {
        self.d
    }
}

fn quad_eval(g: &[[i64; 8]; 8], y: &[i64; 8]) -> i64 {
    let mut s: i128 = 0;
    for i in 0..8 {
        if y[i] == 0 {
            continue;
        }
        let mut row: i128 = 0;
        for j in 0..8 {
            row += g[i][j] as i128 * y[j] as i128;
        }
        s += row * y[i] as i128;
    }
    s as i64
}

pub fn norm_form(ideal: &LeftIdeal) -> Result<NormForm8> {
    let b = ideal.lattice.basis();
    let w = QuatElem::from_f(QuadElem::w());
    let zbasis: [QuatElem; 8] = std::array::from_fn(|k| if k < 4 { b[k].clone() } else { &w * &b[k - 4] });
    let nu_inv = crate::field::Field::inv(&ideal.norm_gen).ok_or_else(|| CoreError::Invalid("zero norm".into()))?;
    let mut g1 = [[0i64; 8]; 8];
    let mut g2 = [[0i64; 8]; 8];
    let mut p = vec![vec![BigRational::zero(); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            // 2·B(zᵢ, zⱼ) = Tr(zᵢ·z̄ⱼ)
            let t = &(&zbasis[i] * &zbasis[j].conj()).tr() * &nu_inv;
            let (ta, tb) = t.coords();
            let to_i64 = |r: &BigRational| -> Result<i64> {
                if !r.is_integer() {
                    return Err(CoreError::Consistency(format!("scaled norm form not integral ({r})")));
                }
                r.to_integer().to_i64().ok_or_else(|| CoreError::Internal("norm form overflow".into()))
            };
            g1[i][j] = to_i64(&ta)?;
            g2[i][j] = to_i64(&tb)?;
            p[i][j] = ta / BigRational::from_integer(2.into());
        }
    }
    for i in 0..8 {
        if g1[i][i] % 2 != 0 || g2[i][i] % 2 != 0 {
            return Err(CoreError::Consistency("scaled norm not integer valued".into()));
        }
    }
    // exact LDLᵀ of Q1
    let mut d = vec![BigRational::zero(); 8];
    let mut u = vec![vec![BigRational::zero(); 8]; 8];
    for i in 0..8 {
        let mut di = p[i][i].clone();
        for k in 0..i {
            di -= &d[k] * &u[k][i] * &u[k][i];
        }
        if !di.is_positive() {
            return Err(CoreError::Consistency(format!(
                "Q1 is not positive definite (pivot {i} = {di}); wrong norm generator sign"
            )));
        }
        u[i][i] = BigRational::one();
        for j in i + 1..8 {
            let mut s = p[i][j].clone();
            for k in 0..i {
                s -= &d[k] * &u[k][i] * &u[k][j];
            }
            u[i][j] = s / &di;
        }
        d[i] = di;
    }
    let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
    Ok(NormForm8 {
        g1,
        g2,
        zbasis,
        norm_gen: ideal.norm_gen.clone(),
        d: std::array::from_fn(|i| f(&d[i])),
        u: std::array::from_fn(|i| std::array::from_fn(|j| f(&u[i][j]))),
    })
}

/// Visits every Y ∈ Z⁸ with Q1(Y) ≤ t (or = t when `shell`), in Fincke–Pohst order.
/// Floating point only sizes the coordinate ranges, with a margin; the caller's exact
/// integer test decides membership.
pub fn for_each_in_ellipsoid(nf: &NormForm8, t: i64, shell: bool, mut visit: impl FnMut(&[i64; 8], i64)) {
    if t < 0 {
        return;
    }
    let tf = t as f64;
    let eps = 1e-7 * (1.0 + tf);
    let mut y = [0i64; 8];
    let mut rem = [0f64; 9];
    let mut center = [0f64; 8];
    let mut hi = [0i64; 8];
    rem[8] = tf;
    // set up level i from the coordinates above it
    let init = |i: usize, y: &[i64; 8], rem: &[f64; 9], center: &mut [f64; 8], hi: &mut [i64; 8]| -> i64 {
        let mut c = 0.0;
        for j in i + 1..8 {
            c -= nf.u[i][j] * y[j] as f64;
        }
        center[i] = c;
        let r = ((rem[i + 1] + eps).max(0.0) / nf.d[i]).sqrt();
        hi[i] = (c + r).floor() as i64;
        (c - r).ceil() as i64
    };
    let mut i = 7usize;
    y[7] = init(7, &y, &rem, &mut center, &mut hi);
    loop {
        if y[i] > hi[i] {
            if i == 7 {
                return;
            }
            i += 1;
            y[i] += 1;
            continue;
        }
        let dy = y[i] as f64 - center[i];
        rem[i] = rem[i + 1] - nf.d[i] * dy * dy;
        if i == 1 && shell {
            // last coordinate solves d₀(y₀ − c₀)² = rem exactly, up to rounding
            let mut c = 0.0;
            for j in 1..8 {
                c -= nf.u[0][j] * y[j] as f64;
            }
            if rem[1] >= -eps {
                let r = (rem[1].max(0.0) / nf.d[0]).sqrt();
                let mut cands = [(c - r).floor() as i64, (c - r).ceil() as i64, (c + r).floor() as i64, (c + r).ceil() as i64];
                cands.sort_unstable();
                let mut last = None;
                for &y0 in &cands {
                    if Some(y0) == last {
                        continue;
                    }
                    last = Some(y0);
                    y[0] = y0;
                    let v = nf.q1(&y);
                    if v == t {
                        visit(&y, v);
                    }
                }
            }
            y[1] += 1;
            continue;
        }
        if i == 0 {
            let v = nf.q1(&y);
            if v <= t {
                visit(&y, v);
            }
            y[0] += 1;
            continue;
        }
        i -= 1;
        y[i] = init(i, &y, &rem, &mut center, &mut hi);
    }
}

/// All Y with Nr_S = ξ, complete and without repeats.
pub fn enumerate_by_norm(nf: &NormForm8, xi: &QuadInt) -> Result<Vec<[i64; 8]>> {
    let (t1, t2) = xi_coords(xi)?;
    let mut out = Vec::new();
    for_each_in_ellipsoid(nf, t1, true, |y, _| {
        if nf.q2(y) == t2 {
            out.push(*y);
        }
    });
    Ok(out)
}

fn xi_coords(xi: &QuadInt) -> Result<(i64, i64)> {
    let a = xi.a.to_i64().ok_or_else(|| CoreError::Invalid("ξ too large".into()))?;
    let b = xi.b.to_i64().ok_or_else(|| CoreError::Invalid("ξ too large".into()))?;
    if !(xi.is_zero() || xi.is_totally_positive()) {
        return Err(CoreError::Invalid(format!("ξ = {xi} is not totally positive")));
    }
    Ok((a, b))
}

pub fn count_by_norm(nf: &NormForm8, xi: &QuadInt) -> Result<u64> {
    Ok(enumerate_by_norm(nf, xi)?.len() as u64)
}

/// Representation numbers keyed by normalized ξ.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ThetaTable {
    pub counts: BTreeMap<(i64, i64), u64>,
}

impl ThetaTable {
    pub fn get(&self, xi: &QuadInt) -> Option<u64> {
        let n = normalize_xi(xi);
        self.counts.get(&(n.a.to_i64()?, n.b.to_i64()?)).copied()
    }
}

/// Counts c_{ξ,I} for each ξ in the list, from one ball enumeration.
pub fn theta_table(ideal: &LeftIdeal, xis: &[QuadInt]) -> Result<ThetaTable> {
    let nf = norm_form(ideal)?;
    theta_table_nf(&nf, xis)
}

pub fn theta_table_nf(nf: &NormForm8, xis: &[QuadInt]) -> Result<ThetaTable> {
    let mut targets = BTreeMap::new();
    let mut t_max = 0;
    for xi in xis {
        let (a, b) = xi_coords(xi)?;
        t_max = t_max.max(a);
        targets.insert((a, b), 0u64);
    }
    for_each_in_ellipsoid(nf, t_max, false, |y, v1| {
        let key = (v1, nf.q2(y));
        if let Some(c) = targets.get_mut(&key) {
            *c += 1;
        }
    });
    let mut counts = BTreeMap::new();
    for ((a, b), c) in targets {
        let n = normalize_xi(&QuadInt::new(a, b));
        counts.insert((n.a.to_i64().unwrap(), n.b.to_i64().unwrap()), c);
    }
    Ok(ThetaTable { counts })
}

/// I ~ J iff J̄·I has an element of norm Nr(I)·Nr(J), i.e. of scaled norm 1 when the
/// norm generator of J̄·I is Nr(I)·Nr(J).
pub fn same_class(i: &LeftIdeal, j: &LeftIdeal) -> Result<bool> {
    let lat = j.conj().lattice.mul(&i.lattice)?;
    let prod = LeftIdeal { norm_gen: &i.norm_gen * &j.norm_gen, lattice: lat };
    let nf = norm_form(&prod)?;
    let mut found = false;
    for_each_in_ellipsoid(&nf, 1, true, |y, _| {
        if nf.q2(y) == 0 {
            found = true;
        }
    });
    Ok(found)
}

pub fn xi_list(v: &[(i64, i64)]) -> Vec<QuadInt> {
    v.iter().map(|&(a, b)| QuadInt::new(a, b)).collect()
}

/// Columns of the ideal theta table.
pub const IDEAL_THETA_XIS: [(i64, i64); 12] =
    [(1, 0), (2, 0), (2, 1), (3, -1), (3, 0), (3, 1), (4, -1), (4, 0), (4, 1), (4, 2), (5, 0), (10, 0)];

/// Published counts c_{ξ,I_i} at IDEAL_THETA_XIS.
pub const IDEAL_THETA_EXPECTED: [[u64; 12]; 12] = [
    [2, 0, 0, 0, 0, 4, 4, 2, 0, 0, 10, 20],
    [0, 0, 10, 10, 0, 2, 2, 0, 4, 2, 18, 0],
    [0, 2, 0, 0, 2, 0, 0, 0, 0, 0, 20, 10],
    [0, 0, 2, 2, 0, 2, 2, 0, 4, 10, 0, 18],
    [0, 0, 2, 2, 0, 2, 2, 0, 4, 0, 10, 18],
    [0, 0, 0, 0, 0, 2, 2, 0, 4, 2, 18, 10],
    [0, 0, 0, 0, 0, 2, 2, 0, 4, 2, 18, 10],
    [0, 0, 0, 0, 0, 2, 2, 0, 4, 2, 18, 10],
    [0, 0, 2, 2, 0, 2, 2, 0, 4, 0, 10, 18],
    [0, 0, 2, 2, 0, 2, 2, 0, 4, 0, 10, 18],
    [0, 0, 0, 0, 0, 2, 2, 0, 4, 2, 18, 10],
    [0, 0, 2, 2, 0, 2, 2, 0, 4, 0, 10, 18],
];

/// Columns of the right-order theta table (the first is ξ = 1, i.e. e_i).
pub const ORDER_THETA_XIS: [(i64, i64); 14] = [
    (1, 0),
    (2, 0),
    (3, 0),
    (4, 0),
    (5, 0),
    (6, 0),
    (7, 0),
    (8, 0),
    (9, 0),
    (10, 0),
    (11, 0),
    (11, 1),
    (12, -1),
    (13, 1),
];

pub const ORDER_THETA_EXPECTED: [[u64; 14]; 12] = [
    [2, 0, 0, 2, 10, 2, 20, 0, 2, 20, 28, 4, 4, 44],
    [2, 0, 0, 2, 10, 2, 20, 0, 2, 20, 28, 4, 4, 44],
    [2, 0, 0, 2, 10, 2, 20, 0, 2, 20, 28, 4, 4, 44],
    [2, 0, 0, 2, 10, 2, 20, 0, 2, 20, 28, 4, 4, 44],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 14, 16, 20],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 16, 14, 16],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 16, 14, 16],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 16, 14, 16],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 14, 16, 20],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 16, 14, 16],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 14, 16, 20],
    [2, 0, 0, 2, 26, 0, 8, 0, 2, 0, 20, 14, 16, 20],
];

/// Counts of `ideal` at each listed ξ, in list order.
pub fn theta_row(ideal: &LeftIdeal, xis: &[(i64, i64)]) -> Result<Vec<u64>> {
    let list = xi_list(xis);
    let t = theta_table(ideal, &list)?;
    Ok(list.iter().map(|x| t.get(x).unwrap_or(0)).collect())
}

/// The right orders O_i = I_i⁻¹I_i as unit-norm ideals.
pub fn right_orders(ideals: &[LeftIdeal]) -> Result<Vec<LeftIdeal>> {
    ideals
        .iter()
        .map(|i| {
            let lat = i.right_order_checked()?;
            Ok(LeftIdeal { lattice: lat, norm_gen: QuadElem::one() })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    /// Class index of each I_i under same_class.
    pub ideal_classes: Vec<usize>,
    pub class_count: usize,
    /// Type bucket of each right order, by theta signature at 11+w, 12−w, 13+w.
    pub order_types: Vec<usize>,
    pub type_count: usize,
    pub unit_counts: Vec<u64>,
    pub reduced_discriminants: Vec<String>,
}

pub fn classify_all() -> Result<ClassReport> {
    let ideals = all_ideals()?;
    let n = ideals.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let same: Vec<((usize, usize), bool)> = pairs
        .par_iter()
        .map(|&(i, j)| Ok(((i, j), same_class(&ideals[i], &ideals[j])?)))
        .collect::<Result<_>>()?;
    // union-find over the equal pairs
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for ((i, j), s) in same {
        if s {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    let mut labels = BTreeMap::new();
    let ideal_classes: Vec<usize> = (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            let k = labels.len();
            *labels.entry(r).or_insert(k)
        })
        .collect();
    let orders = right_orders(&ideals)?;
    let sig_xis = [(1, 0), (5, 0), (11, 1), (12, -1), (13, 1)];
    let sigs: Vec<Vec<u64>> = orders.par_iter().map(|o| theta_row(o, &sig_xis)).collect::<Result<_>>()?;
    let mut buckets: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let order_types: Vec<usize> = sigs
        .iter()
        .map(|s| {
            let k = buckets.len();
            *buckets.entry(s[2..].to_vec()).or_insert(k)
        })
        .collect();
    let reduced_discriminants = orders
        .iter()
        .map(|o| reduced_discriminant(&o.lattice).map(|d| d.to_string()))
        .collect::<Result<_>>()?;
    Ok(ClassReport {
        class_count: labels.len(),
        ideal_classes,
        type_count: buckets.len(),
        order_types,
        unit_counts: sigs.iter().map(|s| s[0]).collect(),
        reduced_discriminants,
    })
}
