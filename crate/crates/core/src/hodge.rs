//! The dihedral group of order 8 acting on the quintic and its 120 nodes: isotypic
//! decompositions, the node-evaluation map on quintic forms, its certified rank, and the
//! resulting Hodge numbers of the small resolution.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::finite::is_prime;
use crate::arith::CycloElem;
use crate::chebyshev::{build_p5, critical_points, CriticalPoint};
use crate::error::{CoreError, Result};
use crate::field::rat;
use crate::linalg::{pow_mod, rank_mod_p, Matrix};

// ---------------------------------------------------------------------------
// The group
// ---------------------------------------------------------------------------

/// An element of D4 acting on the affine coordinates (x₁, x₂, x₃, x₄).
/// `index` is 0 for the identity and k for σ_k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct D4Element {
    pub index: usize,
    /// The image of a point x is (x[perm[0]], …, x[perm[3]]).
    pub perm: [usize; 4],
}

pub const D4_LABELS: [&str; 8] = ["id", "σ1", "σ2", "σ3", "σ4", "σ5", "σ6", "σ7"];

/// Degrees of χ₁ … χ₅.
pub const CHAR_DEGREES: [i64; 5] = [1, 1, 1, 1, 2];

/// Conjugacy class of each element (by index): {id}, {σ1, σ2}, {σ3, σ7}, {σ4}, {σ5, σ6}.
const CLASS_OF: [usize; 8] = [0, 1, 1, 2, 3, 4, 4, 2];

/// Character values χᵢ on the five classes above.
const CHAR_TABLE: [[i64; 5]; 5] = [
    [1, 1, 1, 1, 1],
    [1, -1, 1, 1, -1],
    [1, 1, -1, 1, -1],
    [1, -1, -1, 1, 1],
    [2, 0, 0, -2, 0],
];

impl D4Element {
    pub fn identity() -> Self {
        D4Element { index: 0, perm: [0, 1, 2, 3] }
    }

    pub fn label(&self) -> &'static str {
        D4_LABELS[self.index]
    }

    /// Action on a point.
    pub fn apply<T: Clone>(&self, x: &[T; 4]) -> [T; 4] {
        std::array::from_fn(|i| x[self.perm[i]].clone())
    }

    /// The composite self ∘ other, labelled by lookup in the group.
    pub fn compose(&self, other: &Self) -> Self {
        let perm = std::array::from_fn(|i| other.perm[self.perm[i]]);
        d4_elements().into_iter().find(|g| g.perm == perm).expect("D4 is closed")
    }

    pub fn inverse(&self) -> Self {
        let mut perm = [0; 4];
        for (i, &p) in self.perm.iter().enumerate() {
            perm[p] = i;
        }
        d4_elements().into_iter().find(|g| g.perm == perm).expect("D4 is closed")
    }

    pub fn class(&self) -> usize {
        CLASS_OF[self.index]
    }

    /// χ_{i+1}(self).
    pub fn character(&self, i: usize) -> i64 {
        CHAR_TABLE[i][self.class()]
    }
}

fn perm_compose(a: [usize; 4], b: [usize; 4]) -> [usize; 4] {
    std::array::from_fn(|i| b[a[i]])
}

/// id, σ1, …, σ7, built from σ1 = (x₁ x₂), σ3 = (x₁ x₃)(x₂ x₄) and σ5 = σ1σ3.
pub fn d4_elements() -> [D4Element; 8] {
    let id = [0, 1, 2, 3];
    let s1 = [1, 0, 2, 3];
    let s3 = [2, 3, 0, 1];
    let s5 = perm_compose(s1, s3);
    let s4 = perm_compose(s5, s5);
    let s6 = perm_compose(s4, s5);
    let s7 = perm_compose(s3, s4);
    let s2 = perm_compose(s3, s5);
    [id, s1, s2, s3, s4, s5, s6, s7].map({
        let mut k = 0;
        move |perm| {
            k += 1;
            D4Element { index: k - 1, perm }
        }
    })
}

/// Multiplicities of χ₁ … χ₅ in a representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotypicDecomp {
    pub mult: [i64; 5],
}

impl IsotypicDecomp {
    pub fn dim(&self) -> i64 {
        self.mult.iter().zip(CHAR_DEGREES).map(|(m, d)| m * d).sum()
    }
}

/// Inner products ⟨φ, χᵢ⟩ of a character given by its value on id, σ1, …, σ7.
pub fn decompose(phi: &[i64; 8]) -> Result<IsotypicDecomp> {
    let mut mult = [0; 5];
    for (i, m) in mult.iter_mut().enumerate() {
        let s: i64 = d4_elements().iter().map(|g| g.character(i) * phi[g.index]).sum();
        if s % 8 != 0 || s < 0 {
            return Err(CoreError::Consistency(format!(
                "character {phi:?} pairs to {s}/8 with χ{}",
                i + 1
            )));
        }
        *m = s / 8;
    }
    Ok(IsotypicDecomp { mult })
}

// ---------------------------------------------------------------------------
// Quintic forms in x₀, …, x₄
// ---------------------------------------------------------------------------

pub type Exps = [u8; 5];

/// Homogeneous polynomial with integer coefficients in x₀ … x₄.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Form {
    pub terms: BTreeMap<Exps, i64>,
}

impl Form {
    pub fn add_term(&mut self, e: Exps, c: i64) {
        let v = self.terms.entry(e).or_insert(0);
        *v += c;
        if *v == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|e| e.iter().map(|&a| a as u32).sum())
    }

    pub fn derivative(&self, i: usize) -> Form {
        let mut out = Form::default();
        for (e, &c) in &self.terms {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                out.add_term(f, c * e[i] as i64);
            }
        }
        out
    }

    pub fn times_var(&self, i: usize) -> Form {
        let mut out = Form::default();
        for (e, &c) in &self.terms {
            let mut f = *e;
            f[i] += 1;
            out.add_term(f, c);
        }
        out
    }

    /// ρ(g)f = f ∘ g⁻¹, with x₀ fixed.
    pub fn act(&self, g: &D4Element) -> Form {
        let mut out = Form::default();
        for (e, &c) in &self.terms {
            out.add_term(act_exps(g, e), c);
        }
        out
    }

    /// Homogenize an affine polynomial in x₁ … x₄ given as (exponents, coefficient).
    pub fn homogenize(deg: u8, terms: &[([u8; 4], i64)]) -> Form {
        let mut out = Form::default();
        for (a, c) in terms {
            let d: u8 = a.iter().sum();
            assert!(d <= deg, "term of degree {d} exceeds {deg}");
            out.add_term([deg - d, a[0], a[1], a[2], a[3]], *c);
        }
        out
    }

    /// Coefficient vector on the given monomial basis.
    pub fn coords(&self, basis: &MonomialBasis) -> Vec<i64> {
        let mut v = vec![0; basis.len()];
        for (e, &c) in &self.terms {
            v[basis.index(e)] += c;
        }
        v
    }

    /// Exact value at the point (1, x₁, x₂, x₃, x₄).
    pub fn eval_affine(&self, x: &[CycloElem; 4]) -> CycloElem {
        let deg = self.degree().unwrap_or(0) as usize;
        let pows: Vec<Vec<CycloElem>> = x.iter().map(|xi| powers(xi, deg)).collect();
        let mut acc = CycloElem::zero();
        for (e, &c) in &self.terms {
            let mut t = CycloElem::from_int(c);
            for k in 0..4 {
                if e[k + 1] > 0 {
                    t = t * pows[k][e[k + 1] as usize].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }
}

fn act_exps(g: &D4Element, e: &Exps) -> Exps {
    // x_i ↦ x_{g⁻¹(i)}: the exponent of x_i moves to slot g⁻¹.perm[i]
    let ginv = g.inverse();
    let mut out = [e[0], 0, 0, 0, 0];
    for i in 0..4 {
        out[1 + ginv.perm[i]] += e[1 + i];
    }
    out
}

fn powers(x: &CycloElem, n: usize) -> Vec<CycloElem> {
    let mut out = vec![CycloElem::one()];
    for k in 1..=n {
        out.push(out[k - 1].clone() * x.clone());
    }
    out
}

/// All monomials of a fixed degree in x₀ … x₄, in lexicographic order of exponents.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub exps: Vec<Exps>,
    index: BTreeMap<Exps, usize>,
}

impl MonomialBasis {
    pub fn new(deg: u8) -> Self {
        let mut exps = Vec::new();
        for a in 0..=deg {
            for b in 0..=deg - a {
                for c in 0..=deg - a - b {
                    for d in 0..=deg - a - b - c {
                        exps.push([a, b, c, d, deg - a - b - c - d]);
                    }
                }
            }
        }
        let index = exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        MonomialBasis { exps, index }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index(&self, e: &Exps) -> usize {
        self.index[e]
    }

    /// The permutation of basis indices induced by ρ(g).
    pub fn permutation(&self, g: &D4Element) -> Vec<usize> {
        self.exps.iter().map(|e| self.index(&act_exps(g, e))).collect()
    }
}

/// F₅ = x₀⁵ (P₅(x₁/x₀, x₂/x₀) − P₅(x₃/x₀, x₄/x₀)).
pub fn quintic_form() -> Form {
    let p5 = build_p5::<BigRational>();
    let mut terms = Vec::new();
    for (&(i, j), c) in &p5.terms {
        let c: i64 = c.to_integer().try_into().expect("small coefficient");
        terms.push(([i as u8, j as u8, 0, 0], c));
        terms.push(([0, 0, i as u8, j as u8], -c));
    }
    Form::homogenize(5, &terms)
}

/// The 25 forms x_j·∂F₅/∂x_i.
pub fn jacobian_forms() -> Vec<Form> {
    let f = quintic_form();
    let mut out = Vec::new();
    for i in 0..5 {
        let d = f.derivative(i);
        for j in 0..5 {
            out.push(d.times_var(j));
        }
    }
    out
}

/// Σ_g χ(g)·ρ(g)m for the affine monomial m, homogenized to degree 5.
pub fn isotypic_sum(i: usize, m: [u8; 4]) -> Form {
    let f = Form::homogenize(5, &[(m, 1)]);
    let mut out = Form::default();
    for g in d4_elements() {
        for (e, c) in f.act(&g).terms {
            out.add_term(e, c * g.character(i));
        }
    }
    out
}

/// A χ₃-form vanishing on the nodes but outside the Jacobian span.
pub fn extra_kernel_form() -> Form {
    let parts: [([u8; 4], i64); 6] = [
        ([2, 0, 1, 0], -1),
        ([4, 0, 1, 0], -1),
        ([1, 1, 1, 0], -1),
        ([2, 2, 1, 0], -1),
        ([3, 0, 1, 0], 3),
        ([2, 1, 1, 0], 3),
    ];
    let mut out = Form::default();
    for (m, c) in parts {
        for (e, d) in isotypic_sum(2, m).terms {
            out.add_term(e, c * d);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Nodes
// ---------------------------------------------------------------------------

/// A node of the affine threefold P₅(x₁, x₂) = P₅(x₃, x₄): a pair of critical points of
/// P₅ with the same critical value.
#[derive(Clone, Debug)]
pub struct Node {
    pub first: usize,
    pub second: usize,
    pub coords: [CycloElem; 4],
    pub value: i64,
}

/// All ordered same-value pairs of critical points, each checked exactly to be a point
/// of the threefold where every partial of F₅ vanishes and the affine Hessian is
/// nondegenerate.
pub fn enumerate_nodes() -> Result<(Vec<CriticalPoint>, Vec<Node>)> {
    let crit = critical_points();
    let mut nodes = Vec::new();
    for (a, ca) in crit.iter().enumerate() {
        for (b, cb) in crit.iter().enumerate() {
            if ca.value == cb.value {
                let coords = [
                    ca.coords.0.clone(),
                    ca.coords.1.clone(),
                    cb.coords.0.clone(),
                    cb.coords.1.clone(),
                ];
                nodes.push(Node { first: a, second: b, coords, value: ca.value });
            }
        }
    }
    let f = quintic_form();
    let grads: Vec<Form> = (0..5).map(|i| f.derivative(i)).collect();
    let hess: Vec<Vec<Form>> =
        (1..5).map(|i| (1..5).map(|j| grads[i].derivative(j)).collect()).collect();
    let bad: Vec<String> = nodes
        .par_iter()
        .filter_map(|n| {
            if !f.eval_affine(&n.coords).is_zero() {
                return Some(format!("F5 ≠ 0 at node ({}, {})", n.first, n.second));
            }
            if grads.iter().any(|g| !g.eval_affine(&n.coords).is_zero()) {
                return Some(format!("gradient ≠ 0 at node ({}, {})", n.first, n.second));
            }
            let h = Matrix::from_rows(
                hess.iter().map(|r| r.iter().map(|q| q.eval_affine(&n.coords)).collect()).collect(),
            );
            if h.det().is_zero() {
                return Some(format!("degenerate Hessian at node ({}, {})", n.first, n.second));
            }
            None
        })
        .collect();
    if let Some(msg) = bad.into_iter().next() {
        return Err(CoreError::Consistency(msg));
    }
    Ok((crit, nodes))
}

/// The permutation π of node indices with g(node k) = node π[k].
pub fn node_permutation(crit: &[CriticalPoint], nodes: &[Node], g: &D4Element) -> Result<Vec<usize>> {
    let find_crit = |x: &CycloElem, y: &CycloElem| {
        crit.iter().position(|c| &c.coords.0 == x && &c.coords.1 == y)
    };
    let mut index = BTreeMap::new();
    for (k, n) in nodes.iter().enumerate() {
        index.insert((n.first, n.second), k);
    }
    nodes
        .iter()
        .map(|n| {
            let y = g.apply(&n.coords);
            find_crit(&y[0], &y[1])
                .zip(find_crit(&y[2], &y[3]))
                .and_then(|key| index.get(&key).copied())
                .ok_or_else(|| {
                    CoreError::Consistency(format!(
                        "{} maps node ({}, {}) off the node set",
                        g.label(),
                        n.first,
                        n.second
                    ))
                })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Decompositions
// ---------------------------------------------------------------------------

/// D4 on the 126 quintic monomials.
pub fn monomial_multiplicities() -> Result<IsotypicDecomp> {
    let basis = MonomialBasis::new(5);
    let mut phi = [0; 8];
    for g in d4_elements() {
        phi[g.index] = basis.permutation(&g).iter().enumerate().filter(|(i, j)| i == *j).count() as i64;
    }
    decompose(&phi)
}

/// D4 on the functions on the node set.
pub fn node_multiplicities(crit: &[CriticalPoint], nodes: &[Node]) -> Result<IsotypicDecomp> {
    let mut phi = [0; 8];
    for g in d4_elements() {
        let perm = node_permutation(crit, nodes, &g)?;
        phi[g.index] = perm.iter().enumerate().filter(|(i, j)| i == *j).count() as i64;
    }
    decompose(&phi)
}

/// Traces of D4 on the five partials of F₅ and on the five linear forms.
pub const PARTIALS_CHARACTER: [i64; 8] = [5, 3, 3, -1, 1, -1, -1, -1];
pub const LINEAR_CHARACTER: [i64; 8] = [5, 3, 3, 1, 1, 1, 1, 1];

/// The span of the Jacobian forms: its dimension, the decomposition predicted by the
/// tabulated characters, and the one computed from the span itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacobianReport {
    pub span_dim: usize,
    pub from_characters: IsotypicDecomp,
    pub from_span: IsotypicDecomp,
}

/// Ranks over Q of integer vectors.
fn rank_q(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect()).rank()
}

/// 8·pᵢ applied to an integer vector under a basis permutation action.
fn project8(i: usize, v: &[i64], perms: &[Vec<usize>; 8]) -> Vec<i64> {
    let mut out = vec![0; v.len()];
    for g in d4_elements() {
        let c = CHAR_DEGREES[i] * g.character(i);
        if c == 0 {
            continue;
        }
        for (k, &x) in v.iter().enumerate() {
            out[perms[g.index][k]] += c * x;
        }
    }
    out
}

fn monomial_perms(basis: &MonomialBasis) -> [Vec<usize>; 8] {
    d4_elements().map(|g| basis.permutation(&g))
}

/// Multiplicities of an invariant subspace spanned by the given forms.
fn span_multiplicities(forms: &[Form], basis: &MonomialBasis) -> Result<IsotypicDecomp> {
    let perms = monomial_perms(basis);
    let vecs: Vec<Vec<i64>> = forms.iter().map(|f| f.coords(basis)).collect();
    let mut mult = [0; 5];
    for (i, m) in mult.iter_mut().enumerate() {
        let proj: Vec<Vec<i64>> = vecs.iter().map(|v| project8(i, v, &perms)).collect();
        let r = rank_q(&proj) as i64;
        if r % CHAR_DEGREES[i] != 0 {
            return Err(CoreError::Consistency(format!("χ{}-part of dimension {r}", i + 1)));
        }
        *m = r / CHAR_DEGREES[i];
    }
    Ok(IsotypicDecomp { mult })
}

pub fn jacobian_kernel_multiplicities() -> Result<JacobianReport> {
    let basis = MonomialBasis::new(5);
    let forms = jacobian_forms();
    let span_dim = rank_q(&forms.iter().map(|f| f.coords(&basis)).collect::<Vec<_>>());
    let mut prod = [0; 8];
    for k in 0..8 {
        prod[k] = PARTIALS_CHARACTER[k] * LINEAR_CHARACTER[k];
    }
    let from_characters = decompose(&prod)?;
    let from_span = span_multiplicities(&forms, &basis)?;
    if span_dim != 25 || from_span.dim() != 25 {
        return Err(CoreError::Consistency(format!("Jacobian span has dimension {span_dim}")));
    }
    Ok(JacobianReport { span_dim, from_characters, from_span })
}

// ---------------------------------------------------------------------------
// The evaluation map
// ---------------------------------------------------------------------------

/// An explicit subspace of forms vanishing on all nodes, checked exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelLowerBound {
    pub jacobian_dim: usize,
    pub extra_vanishes: bool,
    pub dim: usize,
}

/// The Jacobian span together with the extra form: checks exact vanishing at every node
/// and the dimension over Q.
pub fn kernel_lower_bound(nodes: &[Node]) -> Result<KernelLowerBound> {
    let basis = MonomialBasis::new(5);
    let f = quintic_form();
    let grads: Vec<Form> = (0..5).map(|i| f.derivative(i)).collect();
    let h = extra_kernel_form();
    let grad_ok = nodes.par_iter().all(|n| grads.iter().all(|g| g.eval_affine(&n.coords).is_zero()));
    if !grad_ok {
        return Err(CoreError::Consistency("a partial of F5 is nonzero at a node".into()));
    }
    let extra_vanishes = nodes.par_iter().all(|n| h.eval_affine(&n.coords).is_zero());
    let mut rows: Vec<Vec<i64>> = jacobian_forms().iter().map(|g| g.coords(&basis)).collect();
    let jacobian_dim = rank_q(&rows);
    let dim = if extra_vanishes {
        rows.push(h.coords(&basis));
        rank_q(&rows)
    } else {
        jacobian_dim
    };
    Ok(KernelLowerBound { jacobian_dim, extra_vanishes, dim })
}

/// Primes p ≡ 1 mod 15 above a bound, in increasing order.
pub fn primes_1_mod_15(above: u64) -> impl Iterator<Item = u64> {
    let start = above + 1 + (15 - (above + 1) % 15 + 1) % 15;
    (start..).step_by(15).filter(|&p| is_prime(p))
}

/// An element of exact order 15 in F_p.
pub fn zeta15_mod(p: u64) -> u64 {
    assert_eq!(p % 15, 1);
    (2..p)
        .map(|x| pow_mod(x, (p - 1) / 15, p))
        .find(|&z| pow_mod(z, 5, p) != 1 && pow_mod(z, 3, p) != 1)
        .expect("F_p* is cyclic")
}

/// M = (fᵢ(P_j)) reduced modulo p, rows indexed by monomials and columns by nodes.
pub fn evaluation_matrix_mod(nodes: &[Node], basis: &MonomialBasis, p: u64, zeta: u64) -> Result<Vec<Vec<u64>>> {
    let red: Vec<[u64; 4]> = nodes
        .iter()
        .map(|n| {
            let mut out = [0; 4];
            for k in 0..4 {
                out[k] = n.coords[k].reduce_mod(p, zeta).ok_or_else(|| {
                    CoreError::Invalid(format!("node coordinate not integral at {p}"))
                })?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(basis
        .exps
        .iter()
        .map(|e| {
            red.iter()
                .map(|x| (0..4).fold(1, |acc, k| acc * pow_mod(x[k], e[k + 1] as u64, p) % p))
                .collect()
        })
        .collect())
}

/// Rank of the evaluation map, proved by pinching an explicit kernel against a
/// modular rank.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankCertificate {
    pub prime: u64,
    pub zeta: u64,
    pub primes_tried: Vec<(u64, usize)>,
    pub kernel_lower_bound: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub corank: usize,
}

pub const MAX_PRIME_ATTEMPTS: usize = 4;

pub fn evaluation_rank(nodes: &[Node]) -> Result<RankCertificate> {
    let basis = MonomialBasis::new(5);
    let kb = kernel_lower_bound(nodes)?;
    let upper = basis.len() - kb.dim;
    let mut tried = Vec::new();
    for p in primes_1_mod_15(10_000).take(MAX_PRIME_ATTEMPTS) {
        let zeta = zeta15_mod(p);
        let m = evaluation_matrix_mod(nodes, &basis, p, zeta)?;
        let r = rank_mod_p(&m, p);
        tried.push((p, r));
        if r > upper {
            return Err(CoreError::Consistency(format!(
                "rank {r} mod {p} exceeds the bound {upper} from the explicit kernel"
            )));
        }
        if r == upper {
            return Ok(RankCertificate {
                prime: p,
                zeta,
                primes_tried: tried,
                kernel_lower_bound: kb.dim,
                rank: r,
                kernel_dim: basis.len() - r,
                corank: nodes.len() - r,
            });
        }
    }
    Err(CoreError::Consistency(format!(
        "modular ranks {tried:?} never reach the upper bound {upper}"
    )))
}

/// Blockwise ranks of the evaluation map on the isotypic parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockReport {
    pub prime: u64,
    pub block_dims: [usize; 5],
    pub block_ranks: [usize; 5],
    pub kernel: IsotypicDecomp,
    pub cokernel: IsotypicDecomp,
}

/// Projects the monomial space onto each isotypic part, evaluates at the nodes and
/// takes ranks modulo the certified prime. The blockwise ranks sum to the certified
/// total, so each is exact.
pub fn cokernel_multiplicities(
    crit: &[CriticalPoint],
    nodes: &[Node],
    cert: &RankCertificate,
) -> Result<BlockReport> {
    let basis = MonomialBasis::new(5);
    let p = cert.prime;
    let m = evaluation_matrix_mod(nodes, &basis, p, cert.zeta)?;
    let perms = monomial_perms(&basis);
    let node_mult = node_multiplicities(crit, nodes)?;
    let results: Vec<(usize, usize)> = (0..5)
        .into_par_iter()
        .map(|i| {
            let mut proj_rows = Vec::with_capacity(basis.len());
            let mut eval_rows = Vec::with_capacity(basis.len());
            for k in 0..basis.len() {
                let mut e = vec![0i64; basis.len()];
                e[k] = 1;
                let pk = project8(i, &e, &perms);
                let mut row = vec![0u64; nodes.len()];
                for (j, &c) in pk.iter().enumerate() {
                    if c != 0 {
                        let c = c.rem_euclid(p as i64) as u64;
                        for (r, &x) in row.iter_mut().zip(&m[j]) {
                            *r = (*r + c * x) % p;
                        }
                    }
                }
                proj_rows.push(pk.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect());
                eval_rows.push(row);
            }
            (rank_mod_p(&proj_rows, p), rank_mod_p(&eval_rows, p))
        })
        .collect();
    let block_dims: [usize; 5] = std::array::from_fn(|i| results[i].0);
    let block_ranks: [usize; 5] = std::array::from_fn(|i| results[i].1);
    if block_ranks.iter().sum::<usize>() != cert.rank {
        return Err(CoreError::Consistency(format!(
            "blockwise ranks {block_ranks:?} do not sum to {}",
            cert.rank
        )));
    }
    let mut kernel = [0; 5];
    let mut cokernel = [0; 5];
    for i in 0..5 {
        let d = CHAR_DEGREES[i];
        let (dim, rank) = (block_dims[i] as i64, block_ranks[i] as i64);
        if dim % d != 0 || rank % d != 0 {
            return Err(CoreError::Consistency(format!("χ{} block not a multiple of {d}", i + 1)));
        }
        kernel[i] = (dim - rank) / d;
        cokernel[i] = node_mult.mult[i] - rank / d;
    }
    Ok(BlockReport {
        prime: p,
        block_dims,
        block_ranks,
        kernel: IsotypicDecomp { mult: kernel },
        cokernel: IsotypicDecomp { mult: cokernel },
    })
}

// ---------------------------------------------------------------------------
// Hodge numbers
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeNumbers {
    pub nodes: i64,
    pub defect: i64,
    pub euler_smooth: i64,
    pub euler_resolved: i64,
    pub h3_resolved: i64,
    pub h2_resolved: i64,
    pub h30: i64,
    pub h21: i64,
    pub h3_singular: i64,
    pub h4_singular: i64,
}

fn binom(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Euler number of a smooth hypersurface of degree d in P⁴: d·[J³]c₃.
pub fn euler_smooth_hypersurface(d: i64) -> i64 {
    let c3: i64 = (0..=3).map(|k| binom(5, k) * (-d).pow(3 - k as u32)).sum();
    d * c3
}

pub fn hodge_numbers(nodes: i64, defect: i64) -> HodgeNumbers {
    let euler_smooth = euler_smooth_hypersurface(5);
    // h² = 1 for a smooth hypersurface, so χ = 4 − h³
    let h3_smooth = 4 - euler_smooth;
    let h3_resolved = h3_smooth - 2 * nodes + 2 * defect;
    let euler_resolved = euler_smooth + 4 * nodes;
    // χ = 2 + 2h² − h³ on a threefold with h¹ = 0
    let h2_resolved = (euler_resolved - 2 + h3_resolved) / 2;
    let h30 = 1;
    let h21 = h3_resolved / 2 - h30;
    // H²(X̃) → H²(E) has image h² − 1 inside the 2s-dimensional H²(E)
    let h3_singular = h3_resolved + 2 * nodes - (h2_resolved - 1);
    // χ(X̄) = χ_smooth + s = 3 − h³(X̄) + h⁴(X̄)
    let h4_singular = euler_smooth + nodes - 3 + h3_singular;
    HodgeNumbers {
        nodes,
        defect,
        euler_smooth,
        euler_resolved,
        h3_resolved,
        h2_resolved,
        h30,
        h21,
        h3_singular,
        h4_singular,
    }
}

/// Everything computed here, in one record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HodgeReport {
    pub node_count: usize,
    pub node_values: BTreeMap<i64, usize>,
    pub diagonal_nodes: usize,
    pub monomials: IsotypicDecomp,
    pub nodes: IsotypicDecomp,
    pub jacobian: JacobianReport,
    pub kernel_lower_bound: KernelLowerBound,
    pub certificate: RankCertificate,
    pub blocks: BlockReport,
    pub hodge: HodgeNumbers,
}

pub fn hodge_report() -> Result<HodgeReport> {
    let (crit, nodes) = enumerate_nodes()?;
    let mut node_values = BTreeMap::new();
    for n in &nodes {
        *node_values.entry(n.value).or_insert(0) += 1;
    }
    let diagonal_nodes = nodes.iter().filter(|n| n.first == n.second).count();
    let monomials = monomial_multiplicities()?;
    let node_mult = node_multiplicities(&crit, &nodes)?;
    let jacobian = jacobian_kernel_multiplicities()?;
    let kernel_lower_bound = kernel_lower_bound(&nodes)?;
    let certificate = evaluation_rank(&nodes)?;
    let blocks = cokernel_multiplicities(&crit, &nodes, &certificate)?;
    for i in 0..5 {
        if blocks.cokernel.mult[i] != node_mult.mult[i] - (monomials.mult[i] - blocks.kernel.mult[i]) {
            return Err(CoreError::Consistency(format!("χ{} cokernel identity fails", i + 1)));
        }
    }
    let hodge = hodge_numbers(nodes.len() as i64, certificate.corank as i64);
    Ok(HodgeReport {
        node_count: nodes.len(),
        node_values,
        diagonal_nodes,
        monomials,
        nodes: node_mult,
        jacobian,
        kernel_lower_bound,
        certificate,
        blocks,
        hodge,
    })
}

/// Number of D4-orbits on a set given by its permutations.
pub fn orbit_count(perms: &[Vec<usize>]) -> usize {
    let n = perms.first().map_or(0, |p| p.len());
    let mut seen = BTreeSet::new();
    let mut orbits = 0;
    for k in 0..n {
        if seen.insert(k) {
            orbits += 1;
            for p in perms {
                seen.insert(p[k]);
            }
        }
    }
    orbits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_law_and_presentation() {
        let g = d4_elements();
        let (s3, s5) = (g[3], g[5]);
        let id = D4Element::identity();
        assert_eq!(s3.compose(&s3), id);
        let s5sq = s5.compose(&s5);
        assert_eq!(s5sq, g[4]);
        assert_eq!(s5sq.compose(&s5sq), id);
        assert_eq!(s3.compose(&s5).compose(&s3), s5.inverse());
        // σ1 = σ3σ5³, σ2 = σ3σ5, σ7 = σ3σ5², and σ5² = σ1σ2
        let s5cube = s5sq.compose(&s5);
        assert_eq!(s3.compose(&s5cube), g[1]);
        assert_eq!(s3.compose(&s5), g[2]);
        assert_eq!(s3.compose(&s5sq), g[7]);
        assert_eq!(g[1].compose(&g[2]), s5sq);
        let all: BTreeSet<[usize; 4]> = g.iter().map(|x| x.perm).collect();
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn classes_are_conjugacy_classes() {
        let g = d4_elements();
        for a in &g {
            let conj: BTreeSet<usize> =
                g.iter().map(|b| b.compose(a).compose(&b.inverse()).index).collect();
            let class: BTreeSet<usize> = g.iter().filter(|b| b.class() == a.class()).map(|b| b.index).collect();
            assert_eq!(conj, class, "{}", a.label());
        }
    }

    #[test]
    fn character_table_orthonormal() {
        let g = d4_elements();
        for i in 0..5 {
            for j in 0..5 {
                let s: i64 = g.iter().map(|x| x.character(i) * x.character(j)).sum();
                assert_eq!(s, if i == j { 8 } else { 0 });
            }
        }
        // characters are class functions compatible with products on linear ones
        for i in 0..4 {
            for a in &g {
                for b in &g {
                    assert_eq!(a.compose(b).character(i), a.character(i) * b.character(i));
                }
            }
        }
    }

    #[test]
    fn monomials() {
        let basis = MonomialBasis::new(5);
        assert_eq!(basis.len(), 126);
        let d = monomial_multiplicities().unwrap();
        assert_eq!(d.mult, [27, 9, 23, 7, 30]);
        assert_eq!(d.dim(), 126);
        let perms = monomial_perms(&basis);
        assert_eq!(orbit_count(&perms) as i64, d.mult[0]);
    }

    #[test]
    fn projections_are_orthogonal_idempotents() {
        let basis = MonomialBasis::new(5);
        let perms = monomial_perms(&basis);
        let n = basis.len();
        let cols: Vec<Vec<Vec<i64>>> = (0..5)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let mut e = vec![0; n];
                        e[k] = 1;
                        project8(i, &e, &perms)
                    })
                    .collect()
            })
            .collect();
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..n {
                    let twice = project8(i, &cols[j][k], &perms);
                    let expect: Vec<i64> =
                        if i == j { cols[j][k].iter().map(|x| 8 * x).collect() } else { vec![0; n] };
                    assert_eq!(twice, expect);
                }
            }
        }
        let traces: Vec<i64> = (0..5).map(|i| (0..n).map(|k| cols[i][k][k]).sum::<i64>() / 8).collect();
        assert_eq!(traces, vec![27, 9, 23, 7, 60]);
    }

    #[test]
    fn form_action_is_equivariant_with_points() {
        let f = extra_kernel_form();
        let x: [CycloElem; 4] = std::array::from_fn(|k| CycloElem::zeta_pow(k as i64 + 1) + CycloElem::from_int(k as i64));
        for g in d4_elements() {
            // (ρ(g)f)(g x) = f(x)
            assert_eq!(f.act(&g).eval_affine(&g.apply(&x)), f.eval_affine(&x), "{}", g.label());
        }
    }

    #[test]
    fn quintic_symmetries() {
        let f = quintic_form();
        assert_eq!(f.degree(), Some(5));
        let g = d4_elements();
        let neg = |f: &Form| {
            let mut o = Form::default();
            for (e, &c) in &f.terms {
                o.add_term(*e, -c);
            }
            o
        };
        assert_eq!(f.act(&g[1]), f);
        assert_eq!(f.act(&g[2]), f);
        assert_eq!(f.act(&g[3]), neg(&f));
        let h = extra_kernel_form();
        for x in &g {
            let sign = x.character(2);
            assert_eq!(h.act(x), if sign == 1 { h.clone() } else { neg(&h) }, "{}", x.label());
        }
    }

    #[test]
    fn nodes_and_their_decomposition() {
        let (crit, nodes) = enumerate_nodes().unwrap();
        assert_eq!(nodes.len(), 120);
        let w = CycloElem::w();
        let wb = CycloElem::one() - w.clone();
        assert!(nodes.iter().any(|n| n.coords == [w.clone(), w.clone(), wb.clone(), wb.clone()] && n.value == 6));
        let s3 = d4_elements()[3];
        let perm = node_permutation(&crit, &nodes, &s3).unwrap();
        let fixed: Vec<usize> = (0..nodes.len()).filter(|&k| perm[k] == k).collect();
        assert_eq!(fixed.len(), 16);
        assert!(fixed.iter().all(|&k| nodes[k].first == nodes[k].second));
        let d = node_multiplicities(&crit, &nodes).unwrap();
        assert_eq!(d.mult, [27, 13, 17, 7, 28]);
        assert_eq!(d.dim(), 120);
    }

    #[test]
    fn jacobian_span() {
        let r = jacobian_kernel_multiplicities().unwrap();
        assert_eq!(r.span_dim, 25);
        assert_eq!(r.from_characters.mult, [5, 1, 6, 1, 6]);
        assert_eq!(r.from_span, r.from_characters);
    }

    #[test]
    fn evaluation_is_equivariant() {
        let (crit, nodes) = enumerate_nodes().unwrap();
        let basis = MonomialBasis::new(5);
        let p = primes_1_mod_15(10_000).next().unwrap();
        let z = zeta15_mod(p);
        let m = evaluation_matrix_mod(&nodes, &basis, p, z).unwrap();
        for g in d4_elements() {
            let mp = basis.permutation(&g);
            let np = node_permutation(&crit, &nodes, &g).unwrap();
            for k in 0..basis.len() {
                // e(ρ(g)f) at g(P) equals e(f) at P
                for (j, &gj) in np.iter().enumerate() {
                    assert_eq!(m[mp[k]][gj], m[k][j]);
                }
            }
        }
    }

    #[test]
    fn primes_and_roots() {
        let ps: Vec<u64> = primes_1_mod_15(10_000).take(3).collect();
        assert!(ps.iter().all(|&p| p > 10_000 && p % 15 == 1 && is_prime(p)));
        assert_eq!(ps[0], 10_111);
        for p in ps {
            let z = zeta15_mod(p);
            let order = (1..=15).find(|&k| pow_mod(z, k, p) == 1).unwrap();
            assert_eq!(order, 15);
        }
    }

    #[test]
    fn hodge_numbers_from_defect() {
        let h = hodge_numbers(120, 20);
        assert_eq!(h.euler_smooth, -200);
        assert_eq!(h.h3_resolved, 4);
        assert_eq!(h.euler_resolved, 280);
        assert_eq!(h.h2_resolved, 141);
        assert_eq!(h.h3_singular, 104);
        assert_eq!(h.h4_singular, 21);
        assert_eq!((h.h30, h.h21), (1, 1));
        // a smooth quintic
        let s = hodge_numbers(0, 0);
        assert_eq!((s.h3_resolved, s.h2_resolved), (204, 1));
    }

    #[test]
    fn full_report() {
        let r = hodge_report().unwrap();
        assert_eq!(r.node_count, 120);
        assert_eq!(r.diagonal_nodes, 16);
        assert_eq!(r.node_values.values().copied().collect::<BTreeSet<_>>(), BTreeSet::from([100, 16, 4]));
        assert!(r.kernel_lower_bound.extra_vanishes);
        assert_eq!(r.kernel_lower_bound.dim, 26);
        assert_eq!((r.certificate.rank, r.certificate.kernel_dim, r.certificate.corank), (100, 26, 20));
        assert_eq!(r.blocks.kernel.mult, [5, 1, 7, 1, 6]);
        assert_eq!(r.blocks.cokernel.mult, [5, 5, 1, 1, 4]);
        assert_eq!(r.hodge.h3_resolved, 4);
    }

    #[test]
    fn extra_form_is_the_only_vanishing_combination() {
        let (_, nodes) = enumerate_nodes().unwrap();
        let basis = MonomialBasis::new(5);
        let p = primes_1_mod_15(10_000).next().unwrap();
        let m = evaluation_matrix_mod(&nodes, &basis, p, zeta15_mod(p)).unwrap();
        let gens = [[2, 0, 1, 0], [4, 0, 1, 0], [1, 1, 1, 0], [2, 2, 1, 0], [3, 0, 1, 0], [2, 1, 1, 0]];
        let rows: Vec<Vec<u64>> = gens
            .iter()
            .map(|&g| {
                let v = isotypic_sum(2, g).coords(&basis);
                (0..nodes.len())
                    .map(|j| {
                        v.iter().enumerate().fold(0, |acc, (k, &c)| {
                            (acc + c.rem_euclid(p as i64) as u64 * m[k][j]) % p
                        })
                    })
                    .collect()
            })
            .collect();
        // one relation among the six sums, and the extra form realizes it exactly
        assert_eq!(rank_mod_p(&rows, p), 5);
        let h = extra_kernel_form();
        assert!(nodes.iter().all(|n| h.eval_affine(&n.coords).is_zero()));
        assert_eq!(h.terms.len(), 40);
    }
}
