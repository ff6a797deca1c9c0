//! Frobenius traces on H³ of the resolved quintic, local L-factors, their splitting over
//! Q(√5), Dirichlet coefficients and the numerical test of the functional equation.

pub mod fm;

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::finite::is_prime;
use crate::arith::QuadElem;
use crate::error::{CoreError, Result};
use crate::pointcount::{self, check_good};
use crate::poly::Poly;

pub use fm::{fm_eval, FmEvaluator};

/// h²(X̃): the H² Frobenius scale satisfies |k| ≤ 141.
pub const K_BOUND: i64 = 141;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub q: u64,
    pub count: u128,
    pub k: i64,
    pub a_q: i64,
}

fn weil_ok(q: u64, a: i128) -> bool {
    // |a| ≤ 4q^{3/2}  ⇔  a² ≤ 16q³
    a * a <= 16 * (q as i128).pow(3)
}

fn trace_from(q: u64, count: u128, k: i64) -> i128 {
    let q = q as i128;
    1 + q * q * q + k as i128 * (q + q * q) - count as i128
}

pub fn determine_k(q: u64, count: u128) -> Result<i64> {
    check_good(q)?;
    let candidates: Vec<i64> = (-K_BOUND..=K_BOUND).filter(|&k| weil_ok(q, trace_from(q, count, k))).collect();
    if q <= 20 {
        return Err(CoreError::AmbiguousK { q, candidates });
    }
    match candidates.len() {
        0 => Err(CoreError::NoK(q)),
        1 => Ok(candidates[0]),
        _ => Err(CoreError::AmbiguousK { q, candidates }),
    }
}

pub fn trace_record(q: u64) -> Result<TraceRecord> {
    let b = pointcount::resolved_count(q)?;
    let k = determine_k(q, b.resolved_total)?;
    Ok(TraceRecord { q, count: b.resolved_total, k, a_q: trace_from(q, b.resolved_total, k) as i64 })
}

pub fn trace_aq(q: u64) -> Result<i64> {
    trace_record(q).map(|r| r.a_q)
}

// ---------------------------------------------------------------------------
// Small primes
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmallPrimeMethod {
    /// eigenvalues of Fr_{p²} from a_{p²}, a_{p⁴}; square roots signed by a_{p³}
    Quartic,
    /// integer roots of a³ − (3a_{p²} + 6p³)a + 2a_{p³} = 0
    Cubic,
}

#[derive(Clone, Debug)]
pub struct SmallPrimeOptions {
    /// use the quartic route when p⁴ is at most this
    pub p4_limit: u64,
}

impl Default for SmallPrimeOptions {
    fn default() -> Self {
        SmallPrimeOptions { p4_limit: 20_000 }
    }
}

impl SmallPrimeOptions {
    pub fn slow() -> Self {
        SmallPrimeOptions { p4_limit: u64::MAX }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallPrimeTraces {
    pub p: u64,
    pub a_p: i64,
    pub a_p2: i64,
    pub a_p3: i64,
    pub a_p4: Option<i64>,
    pub method: SmallPrimeMethod,
}

/// Power sums s₃, s₄ of the Frobenius eigenvalues implied by a_p and s₂ = a_{p²}, via
/// Newton's identities with e₁ = a, e₂ = (a² − s₂)/2, e₃ = p³a, e₄ = p⁶.
pub fn newton_s3_s4(p: u64, a: i128, s2: i128) -> (i128, i128) {
    let p3 = (p as i128).pow(3);
    let e2 = (a * a - s2) / 2;
    let e3 = p3 * a;
    let e4 = p3 * p3;
    let s3 = a * s2 - e2 * a + 3 * e3;
    let s4 = a * s3 - e2 * s2 + e3 * a - 4 * e4;
    (s3, s4)
}

fn consistent(p: u64, a: i128, s2: i64, s3: i64, s4: Option<i64>) -> bool {
    if !weil_ok(p, a) || (a * a - s2 as i128) % 2 != 0 {
        return false;
    }
    let (t3, t4) = newton_s3_s4(p, a, s2 as i128);
    t3 == s3 as i128 && s4.map_or(true, |s4| t4 == s4 as i128)
}

/// Roots of a complex polynomial (coefficients lowest degree first) by Durand–Kerner.
pub fn complex_roots(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    // start on a circle of the size of the largest roots
    let r = (1..=n).map(|k| monic[n - k].norm().powf(1.0 / k as f64)).fold(1e-3, f64::max);
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(r, 0.4 + std::f64::consts::TAU * k as f64 / n as f64)).collect();
    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * x + k);
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm() / z[i].norm().max(1.0));
        }
        if delta < 1e-16 {
            break;
        }
    }
    z
}

fn quartic_candidates(p: u64, s2: i64, s3: i64, s4: i64) -> Vec<i64> {
    // eigenvalues β of Fr_{p²}, scaled by p³ onto the unit circle:
    // U⁴ − (s₂/p³)U³ + (e₂/p⁶)U² − (s₂/p³)U + 1 with e₂ = (s₂² − s₄)/2
    let p3 = (p as f64).powi(3);
    let s2f = s2 as f64;
    let e2 = (s2f * s2f - s4 as f64) / 2.0;
    let c: Vec<Complex64> = [1.0, -s2f / p3, e2 / (p3 * p3), -s2f / p3, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let roots = complex_roots(&c);
    let scale = (p as f64).powf(1.5);
    let sq: Vec<Complex64> = roots.iter().map(|b| b.sqrt() * scale).collect();
    let mut out = Vec::new();
    for signs in 0..16u32 {
        let alphas: Vec<Complex64> = (0..4).map(|i| if signs >> i & 1 == 1 { -sq[i] } else { sq[i] }).collect();
        let a: Complex64 = alphas.iter().sum();
        let t3: Complex64 = alphas.iter().map(|x| x * x * x).sum();
        let ar = a.re.round();
        if a.im.abs() > 1e-6 * scale || (a.re - ar).abs() > 1e-6 * scale {
            continue;
        }
        if (t3.re - s3 as f64).abs() > 1e-6 * scale.powi(3) || t3.im.abs() > 1e-6 * scale.powi(3) {
            continue;
        }
        let ai = ar as i64;
        if consistent(p, ai as i128, s2, s3, Some(s4)) && !out.contains(&ai) {
            out.push(ai);
        }
    }
    out
}

fn cubic_candidates(p: u64, s2: i64, s3: i64) -> Vec<i64> {
    let bound = (4.0 * (p as f64).powf(1.5)).floor() as i64;
    (-bound..=bound).filter(|&a| consistent(p, a as i128, s2, s3, None)).collect()
}

pub fn small_prime_traces(p: u64, opts: &SmallPrimeOptions) -> Result<SmallPrimeTraces> {
    if !is_prime(p) {
        return Err(CoreError::NotPrime(p));
    }
    check_good(p)?;
    let a_p2 = trace_aq(p * p)?;
    let a_p3 = trace_aq(p * p * p)?;
    let use_quartic = p.checked_pow(4).map_or(false, |q| q <= opts.p4_limit);
    let (cands, a_p4, method) = if use_quartic {
        let a_p4 = trace_aq(p.pow(4))?;
        let c = quartic_candidates(p, a_p2, a_p3, a_p4);
        let cubic = cubic_candidates(p, a_p2, a_p3);
        if c.iter().any(|a| !cubic.contains(a)) {
            return Err(CoreError::Consistency(format!("p={p}: quartic route {c:?} disagrees with cubic {cubic:?}")));
        }
        (c, Some(a_p4), SmallPrimeMethod::Quartic)
    } else {
        (cubic_candidates(p, a_p2, a_p3), None, SmallPrimeMethod::Cubic)
    };
    match cands.as_slice() {
        [a] => Ok(SmallPrimeTraces { p, a_p: *a, a_p2, a_p3, a_p4, method }),
        [] => Err(CoreError::Precision(format!("p={p}: no sign assignment reproduces a_(p^3); increase working precision"))),
        _ => Err(CoreError::Precision(format!(
            "p={p}: candidates {cands:?} all fit; count over F_(p^4) to separate them"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Local factors
// ---------------------------------------------------------------------------

/// det(1 − Fr_p·T | H³) = Σ coeffs[i]·T^i.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFactor {
    pub p: u64,
    pub coeffs: Vec<i128>,
}

impl LocalFactor {
    /// Characteristic polynomial T⁴ − a T³ + c₂T² − p³a T + p⁶, highest degree first.
    pub fn charpoly(&self) -> Vec<i128> {
        self.coeffs.clone()
    }

    pub fn is_palindromic(&self) -> bool {
        let p3 = (self.p as i128).pow(3);
        self.coeffs.len() == 5 && self.coeffs[0] == 1 && self.coeffs[4] == p3 * p3 && self.coeffs[1] * p3 == self.coeffs[3]
    }

    pub fn roots(&self) -> Vec<Complex64> {
        // reciprocal roots of det(1 − Fr T) are roots of the characteristic polynomial
        let c: Vec<Complex64> = self.coeffs.iter().rev().map(|&x| Complex64::new(x as f64, 0.0)).collect();
        complex_roots(&c)
    }

    /// max over roots of | |root|/p^{3/2} − 1 |
    pub fn weil_defect(&self) -> f64 {
        let s = (self.p as f64).powf(1.5);
        self.roots().iter().map(|r| (r.norm() / s - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub fn frob_charpoly(p: u64, a_p: i64, a_p2: i64) -> Result<LocalFactor> {
    let (a, s2) = (a_p as i128, a_p2 as i128);
    if (a * a - s2) % 2 != 0 {
        return Err(CoreError::Invalid(format!("p={p}: a_p² ≢ a_(p²) mod 2 ({a_p}, {a_p2})")));
    }
    let p3 = (p as i128).pow(3);
    Ok(LocalFactor { p, coeffs: vec![1, -a, (a * a - s2) / 2, -p3 * a, p3 * p3] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FSplitting {
    /// T⁴ − … = (T² − tT + p³)(T² − σ(t)T + p³)
    Split { t: QuadElem, t_conj: QuadElem },
    /// T⁴ − … = S² − c·S + p⁶ with S = T² and c = a_{p²}/2
    Inert { c: i128 },
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

fn quad_poly(c: &[QuadElem]) -> Poly<QuadElem> {
    Poly::new(c.to_vec())
}

fn big(x: i128) -> QuadElem {
    QuadElem::from_int(crate::arith::QuadInt::new(BigInt::from(x), 0))
}

pub fn split_over_f(p: u64, a_p: i64, a_p2: i64) -> Result<FSplitting> {
    let lf = frob_charpoly(p, a_p, a_p2)?;
    let p3 = (p as i128).pow(3);
    let quartic = quad_poly(&lf.coeffs.iter().rev().map(|&x| big(x)).collect::<Vec<_>>());
    let m = p % 5;
    if m == 1 || m == 4 {
        let a = a_p as i128;
        let prod = lf.coeffs[2] - 2 * p3;
        // t = (a ± s√5)/2 with a² − 4·tσ(t) = 5s²
        let d = a * a - 4 * prod;
        let s = (d % 5 == 0).then(|| isqrt(d / 5)).flatten().ok_or_else(|| {
            CoreError::Consistency(format!("p={p}: discriminant {d} is not 5·square"))
        })?;
        // √5 = 2w − 1, so t = (a − s)/2 + s·w
        let t = QuadElem::q((a - s) as i64, 2, s as i64, 1);
        let tc = t.conj();
        let one = QuadElem::from_i64s(1, 0);
        let f1 = quad_poly(&[big(p3), -t.clone(), one.clone()]);
        let f2 = quad_poly(&[big(p3), -tc.clone(), one]);
        if f1 * f2 != quartic {
            return Err(CoreError::Consistency(format!("p={p}: quadratic pair does not reproduce the quartic")));
        }
        Ok(FSplitting::Split { t, t_conj: tc })
    } else {
        if a_p != 0 || a_p2 % 2 != 0 {
            return Err(CoreError::Consistency(format!("p={p} is inert but a_p={a_p}, a_(p²)={a_p2}")));
        }
        let c = a_p2 as i128 / 2;
        // S² − cS + p⁶ at S = T² reproduces the quartic
        let sq = quad_poly(&[big(p3 * p3), QuadElem::from_i64s(0, 0), big(-c), QuadElem::from_i64s(0, 0), QuadElem::from_i64s(1, 0)]);
        if sq != quartic {
            return Err(CoreError::Consistency(format!("p={p}: quartic is not a quadratic in T²")));
        }
        Ok(FSplitting::Inert { c })
    }
}

// ---------------------------------------------------------------------------
// Trace table and cache
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub a_p: i64,
    pub a_p2: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceTable {
    pub entries: BTreeMap<u64, TraceEntry>,
}

/// Published (p, a_p, a_{p²}) for the good primes below 80.
pub const TRACE_TABLE: [(u64, i64, i64); 18] = [
    (7, 0, -140),
    (11, -116, 1444),
    (13, 0, 5980),
    (17, 0, -340),
    (19, -20, 6404),
    (23, 0, 6900),
    (29, 60, -95116),
    (31, 24, -82876),
    (37, 0, -59940),
    (41, -316, -51516),
    (47, 0, 187060),
    (53, 0, -471700),
    (59, -1160, -146156),
    (61, -1116, -131436),
    (67, 0, -907180),
    (71, -156, -814316),
    (73, 0, 27740),
    (79, -460, -1520396),
];

/// The value of L'(2) obtained from the functional-equation sums.
pub const L_PRIME_AT_2: f64 = 2.83811389801282;

pub const TRACE_CACHE_HEADER: &str = "p,a_p,a_p2";

pub fn good_primes_upto(n: u64) -> Vec<u64> {
    (7..=n).filter(|&p| is_prime(p)).collect()
}

impl TraceTable {
    /// Prime powers whose counts are still needed for coefficients up to n_max.
    pub fn missing(&self, n_max: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for p in good_primes_upto(n_max) {
            match self.entries.get(&p) {
                None => {
                    out.push(p);
                    if p * p <= n_max {
                        out.push(p * p);
                    }
                }
                Some(e) => {
                    if p * p <= n_max && e.a_p2.is_none() {
                        out.push(p * p);
                    }
                }
            }
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut t = TraceTable::default();
        if !path.exists() {
            return Ok(t);
        }
        let corrupt = |row: usize, reason: String| CoreError::CacheCorrupt { path: path.display().to_string(), row, reason };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| corrupt(0, e.to_string()))?;
        let header: Vec<String> = rdr.headers().map_err(|e| corrupt(0, e.to_string()))?.iter().map(str::to_string).collect();
        if header.join(",") != TRACE_CACHE_HEADER {
            return Err(corrupt(0, "header mismatch".into()));
        }
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| corrupt(row, e.to_string()))?;
            if rec.len() != 3 {
                return Err(corrupt(row, "expected 3 columns".into()));
            }
            let p: u64 = rec[0].parse().map_err(|_| corrupt(row, "bad p".into()))?;
            let a_p: i64 = rec[1].parse().map_err(|_| corrupt(row, "bad a_p".into()))?;
            let a_p2: Option<i64> = if rec[2].is_empty() {
                None
            } else {
                Some(rec[2].parse().map_err(|_| corrupt(row, "bad a_p2".into()))?)
            };
            if !is_prime(p) || p < 7 {
                return Err(corrupt(row, format!("{p} is not a good prime")));
            }
            if !weil_ok(p, a_p as i128) || a_p2.map_or(false, |s| !weil_ok(p * p, s as i128)) {
                return Err(corrupt(row, format!("p={p}: trace violates the Weil bound")));
            }
            if a_p2.map_or(false, |s| (a_p as i128 * a_p as i128 - s as i128) % 2 != 0) {
                return Err(corrupt(row, format!("p={p}: parity of a_p² and a_(p²) differ")));
            }
            if (p % 5 == 2 || p % 5 == 3) && a_p != 0 {
                return Err(corrupt(row, format!("p={p} ≡ ±2 mod 5 needs a_p = 0")));
            }
            t.entries.insert(p, TraceEntry { a_p, a_p2 });
        }
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e: std::io::Error| CoreError::Io { path: path.display().to_string(), source: e };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut s = String::from(TRACE_CACHE_HEADER);
        s.push('\n');
        for (p, e) in &self.entries {
            let a2 = e.a_p2.map(|x| x.to_string()).unwrap_or_default();
            s.push_str(&format!("{p},{},{a2}\n", e.a_p));
        }
        // write-then-rename so an interrupted run never leaves a torn cache
        let tmp = path.with_extension("csv.tmp");
        std::fs::write(&tmp, s).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }

    /// Compute every missing trace needed for coefficients up to n_max.
    pub fn fill(&mut self, n_max: u64, opts: &SmallPrimeOptions) -> Result<Vec<u64>> {
        let todo: Vec<u64> = good_primes_upto(n_max)
            .into_iter()
            .filter(|&p| match self.entries.get(&p) {
                None => true,
                Some(e) => p * p <= n_max && e.a_p2.is_none(),
            })
            .collect();
        let results: Vec<Result<(u64, TraceEntry)>> = todo
            .par_iter()
            .map(|&p| {
                if p <= 20 {
                    let s = small_prime_traces(p, opts)?;
                    return Ok((p, TraceEntry { a_p: s.a_p, a_p2: Some(s.a_p2) }));
                }
                let a_p = match self.entries.get(&p) {
                    Some(e) => e.a_p,
                    None => trace_aq(p)?,
                };
                let a_p2 = if p * p <= n_max { Some(trace_aq(p * p)?) } else { None };
                Ok((p, TraceEntry { a_p, a_p2 }))
            })
            .collect();
        for r in results {
            let (p, e) = r?;
            self.entries.insert(p, e);
        }
        Ok(todo)
    }
}

/// Load the cache (if any), compute what is missing up to n_max and write it back.
pub fn ensure_traces(n_max: u64, cache: Option<&Path>, opts: &SmallPrimeOptions) -> Result<TraceTable> {
    let mut t = match cache {
        Some(p) => TraceTable::load(p)?,
        None => TraceTable::default(),
    };
    let added = t.fill(n_max, opts)?;
    if let (Some(path), false) = (cache, added.is_empty()) {
        t.save(path)?;
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Bad factors and Dirichlet coefficients
// ---------------------------------------------------------------------------

/// A candidate local factor at a bad prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BadFactor {
    One,
    /// (1 − ε·p^{2j}·p^{−2s})⁻¹, for p = 2, 3
    Quadratic { eps: i8, j: u32 },
    /// (1 − ε·p^{j}·p^{−s})⁻¹, for p = 5
    Linear { eps: i8, j: u32 },
}

impl BadFactor {
    pub fn candidates(p: u64) -> Vec<BadFactor> {
        let mut v = vec![BadFactor::One];
        for j in 0..=3 {
            for eps in [1, -1] {
                v.push(if p == 5 { BadFactor::Linear { eps, j } } else { BadFactor::Quadratic { eps, j } });
            }
        }
        v
    }

    /// Coefficients of p^{−ks} for k = 0..=k_max.
    pub fn series(&self, p: u64, k_max: usize) -> Vec<i128> {
        let mut b = vec![0i128; k_max + 1];
        b[0] = 1;
        match *self {
            BadFactor::One => {}
            BadFactor::Quadratic { eps, j } => {
                let r = eps as i128 * (p as i128).pow(2 * j);
                for k in (2..=k_max).step_by(2) {
                    b[k] = b[k - 2] * r;
                }
            }
            BadFactor::Linear { eps, j } => {
                let r = eps as i128 * (p as i128).pow(j);
                for k in 1..=k_max {
                    b[k] = b[k - 1] * r;
                }
            }
        }
        b
    }

    pub fn describe(&self, p: u64) -> String {
        match *self {
            BadFactor::One => "1".into(),
            BadFactor::Quadratic { eps, j } => {
                format!("(1{}{p}^({}-2s))^-1", if eps > 0 { "-" } else { "+" }, 2 * j)
            }
            BadFactor::Linear { eps, j } => format!("(1{}{p}^({j}-s))^-1", if eps > 0 { "-" } else { "+" }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BadFactorGuess {
    /// exponents (a, b, c) of N = 2^a·3^b·5^c
    pub exps: [u32; 3],
    pub w: i8,
    pub l2: BadFactor,
    pub l3: BadFactor,
    pub l5: BadFactor,
}

impl BadFactorGuess {
    /// N = 2²·3²·5⁴, w = −1, L₂ = (1 − 2^{2−2s})⁻¹, L₃ = (1 − 3^{2−2s})⁻¹, L₅ = 1.
    pub fn accepted() -> Self {
        BadFactorGuess {
            exps: [2, 2, 4],
            w: -1,
            l2: BadFactor::Quadratic { eps: 1, j: 1 },
            l3: BadFactor::Quadratic { eps: 1, j: 1 },
            l5: BadFactor::One,
        }
    }

    pub fn conductor(&self) -> u64 {
        2u64.pow(self.exps[0]) * 3u64.pow(self.exps[1]) * 5u64.pow(self.exps[2])
    }

    pub fn factor(&self, p: u64) -> BadFactor {
        match p {
            2 => self.l2,
            3 => self.l3,
            _ => self.l5,
        }
    }
}

/// Coefficients of p^{−ks} in 1/det(1 − Fr_p·p^{−s}), k = 0..=k_max.
pub fn good_euler_series(lf: &LocalFactor, k_max: usize) -> Vec<i128> {
    let c = &lf.coeffs;
    let mut b = vec![0i128; k_max + 1];
    b[0] = 1;
    for k in 1..=k_max {
        let mut v = 0i128;
        for i in 1..=4.min(k) {
            v -= c[i] * b[k - i];
        }
        b[k] = v;
    }
    b
}

/// a_1..a_{n_max} (index 0 unused) of the Euler product with the given bad factors.
pub fn dirichlet_coeffs(n_max: u64, guess: &BadFactorGuess, table: &TraceTable) -> Result<Vec<i128>> {
    let missing = table.missing(n_max);
    if !missing.is_empty() {
        return Err(CoreError::MissingTraces(missing));
    }
    let n = n_max as usize;
    let mut local: BTreeMap<u64, Vec<i128>> = BTreeMap::new();
    for p in (2..=n_max).filter(|&p| is_prime(p)) {
        let mut k_max = 0;
        let mut pk = p;
        while pk <= n_max {
            k_max += 1;
            pk *= p;
        }
        let series = if p <= 5 {
            guess.factor(p).series(p, k_max)
        } else {
            let e = table.entries[&p];
            // a_{p²} only matters when p² ≤ n_max
            let lf = frob_charpoly(p, e.a_p, e.a_p2.unwrap_or(e.a_p * e.a_p))?;
            good_euler_series(&lf, k_max)
        };
        local.insert(p, series);
    }
    // multiplicative assembly via the smallest prime factor
    let mut spf = vec![0usize; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            for j in (i..=n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i;
                }
            }
        }
    }
    let mut a = vec![0i128; n + 1];
    if n >= 1 {
        a[1] = 1;
    }
    for m in 2..=n {
        let p = spf[m];
        let mut rest = m;
        let mut k = 0;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        a[m] = a[rest] * local[&(p as u64)][k];
    }
    Ok(a)
}

// ---------------------------------------------------------------------------
// Functional-equation test
// ---------------------------------------------------------------------------

fn factorial(m: u32) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// I(τ) = Σ a_n/n²·F_m(4nτπ²/√N).
pub fn half_sum(m: u32, tau: f64, coeffs: &[i128], conductor: u64, ev: &FmEvaluator) -> Result<f64> {
    let c = 4.0 * std::f64::consts::PI.powi(2) / (conductor as f64).sqrt();
    let mut s = 0.0;
    for (n, &an) in coeffs.iter().enumerate().skip(1) {
        if an == 0 {
            continue;
        }
        let nf = n as f64;
        let f = ev.eval(m, c * nf * tau)?;
        if f == 0.0 {
            break;
        }
        s += an as f64 / (nf * nf) * f;
    }
    Ok(s)
}

/// Estimate of L^{(m)}(2): m!·(I(t) + (−1)^m·w·I(1/t)).
///
/// Reflecting the left contour s ↦ −s turns s^{−m−1} into (−1)^{m+1}s^{−m−1}, so the
/// second sum carries (−1)^m·w; for m = 0 this is w itself.
pub fn fe_test(m: u32, t: f64, coeffs: &[i128], guess: &BadFactorGuess) -> Result<f64> {
    let ev = FmEvaluator::default();
    let n = guess.conductor();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 } * guess.w as f64;
    Ok(factorial(m) * (half_sum(m, t, coeffs, n, &ev)? + sign * half_sum(m, 1.0 / t, coeffs, n, &ev)?))
}

pub fn fe_values(m: u32, ts: &[f64], coeffs: &[i128], guess: &BadFactorGuess) -> Result<Vec<f64>> {
    ts.iter().map(|&t| fe_test(m, t, coeffs, guess)).collect()
}

pub fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

pub const DEFAULT_T_GRID: [f64; 5] = [1.0, 1.5, 2.0, 2.5, 3.0];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuessScore {
    pub guess: BadFactorGuess,
    /// m = 0 test values over the t-grid
    pub values: Vec<f64>,
    /// max − min of the values over the t-grid
    pub spread: f64,
    /// estimated size of the omitted terms n > n_max
    pub tail: f64,
    /// (spread + tail) relative to the size of the sums
    pub score: f64,
}

/// Σ_{n > n_max} n^{−1/2}·F₀(c·n·τ): the omitted terms for coefficients of typical size
/// |a_n| ≈ n^{3/2}. A guess whose sums have not converged cannot be confirmed, so this
/// enters its score.
fn tail_estimate(c: f64, n_max: usize, tau: f64) -> f64 {
    let mut s = 0.0;
    let mut n = n_max + 1;
    loop {
        let term = fm::f0(c * n as f64 * tau) / (n as f64).sqrt();
        s += term;
        if term < 1e-22 * s.max(1e-300) || n > 200 * n_max {
            break;
        }
        n += 1 + n / 1000;
    }
    s
}

/// Rank all guesses N = 2^a3^b5^c (a, b ≤ 4, c ≤ 6), w = ±1 and 9³ bad-factor sets by the
/// relative t-spread of the m = 0 test plus the truncation tail.
///
/// For each N the sums split by the 30-smooth part d of n:
/// I(τ) = Σ_d B(d)·S_τ(d) with S_τ(d) = Σ_{(m,30)=1} g_m/(dm)²·F₀(c·dm·τ), so the F₀
/// values are computed once per N and each guess costs one short dot product.
pub fn guess_search(n_max: u64, table: &TraceTable, ts: &[f64]) -> Result<Vec<GuessScore>> {
    let base = BadFactorGuess { exps: [0, 0, 0], w: 1, l2: BadFactor::One, l3: BadFactor::One, l5: BadFactor::One };
    let g = dirichlet_coeffs(n_max, &base, table)?;
    let n = n_max as usize;
    let mut smooth: Vec<(usize, [usize; 3])> = Vec::new();
    for i in 0..64 {
        for j in 0..64 {
            for k in 0..64 {
                let d = 2u128.pow(i) * 3u128.pow(j) * 5u128.pow(k);
                if d > n as u128 {
                    break;
                }
                smooth.push((d as usize, [i as usize, j as usize, k as usize]));
            }
            if 2u128.pow(i) * 3u128.pow(j) > n as u128 {
                break;
            }
        }
        if 2u128.pow(i) > n as u128 {
            break;
        }
    }
    // only p^k ≤ n_max is ever used, which keeps p^{3k} well inside i128
    let k_max = |p: u64| (1..).take_while(|&k| (p as u128).pow(k) <= n as u128).last().unwrap_or(0) as usize;
    let cands: Vec<Vec<(BadFactor, Vec<i128>)>> = [2u64, 3, 5]
        .iter()
        .map(|&p| BadFactor::candidates(p).into_iter().map(|f| (f, f.series(p, k_max(p)))).collect())
        .collect();
    let mut exps_list = Vec::new();
    for a in 0..=4u32 {
        for b in 0..=4u32 {
            for c in 0..=6u32 {
                exps_list.push([a, b, c]);
            }
        }
    }
    let scored: Vec<Vec<GuessScore>> = exps_list
        .par_iter()
        .map(|&exps| {
            let cond = (2u64.pow(exps[0]) * 3u64.pow(exps[1]) * 5u64.pow(exps[2])) as f64;
            let c = 4.0 * std::f64::consts::PI.powi(2) / cond.sqrt();
            let tau_min = ts.iter().map(|&t| t.min(1.0 / t)).fold(f64::INFINITY, f64::min);
            let tail = tail_estimate(c, n, tau_min);
            // s[τ-index][dir][d-index]
            let mut s = vec![[vec![0.0f64; smooth.len()], vec![0.0f64; smooth.len()]]; ts.len()];
            for (ti, &t) in ts.iter().enumerate() {
                for (dir, tau) in [t, 1.0 / t].into_iter().enumerate() {
                    for (di, &(d, _)) in smooth.iter().enumerate() {
                        let mut acc = 0.0;
                        for m in 1..=n / d {
                            let gm = g[m];
                            if gm == 0 || m % 2 == 0 || m % 3 == 0 || m % 5 == 0 {
                                continue;
                            }
                            let nn = (d * m) as f64;
                            acc += gm as f64 / (nn * nn) * fm::f0(c * nn * tau);
                        }
                        s[ti][dir][di] = acc;
                    }
                }
            }
            let mut out = Vec::new();
            for (l2, b2) in &cands[0] {
                for (l3, b3) in &cands[1] {
                    for (l5, b5) in &cands[2] {
                        let weights: Vec<f64> =
                            smooth.iter().map(|&(_, [i, j, k])| (b2[i] * b3[j] * b5[k]) as f64).collect();
                        let halves: Vec<[f64; 2]> = (0..ts.len())
                            .map(|ti| {
                                let dot = |dir: usize| weights.iter().zip(&s[ti][dir]).map(|(w, x)| w * x).sum::<f64>();
                                [dot(0), dot(1)]
                            })
                            .collect();
                        let scale = halves.iter().map(|h| h[0].abs() + h[1].abs()).fold(0.0, f64::max).max(1e-300);
                        for w in [1i8, -1] {
                            let values: Vec<f64> = halves.iter().map(|h| h[0] + w as f64 * h[1]).collect();
                            let sp = spread(&values);
                            out.push(GuessScore {
                                guess: BadFactorGuess { exps, w, l2: *l2, l3: *l3, l5: *l5 },
                                values,
                                spread: sp,
                                tail,
                                score: (sp + tail) / scale,
                            });
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut all: Vec<GuessScore> = scored.into_iter().flatten().collect();
    all.sort_by(|a, b| a.score.partial_cmp(&b.score).unwrap_or(std::cmp::Ordering::Equal));
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_examples() {
        // q ≡ ±2 mod 5 with the uniform count
        for q in [23u64, 37, 43, 47] {
            let c = (q as u128).pow(3) + (q as u128).pow(2) + q as u128 + 1;
            assert_eq!(determine_k(q, c).unwrap(), 1);
        }
        assert!(matches!(determine_k(7, 400), Err(CoreError::AmbiguousK { q: 7, .. })));
        assert_eq!(trace_aq(29).unwrap(), 60);
        assert_eq!(trace_aq(31).unwrap(), 24);
        assert_eq!(trace_aq(121).unwrap(), 1444);
    }

    #[test]
    fn newton_identities_on_known_quartic() {
        // eigenvalues ±i·7^{3/2} twice: a = 0, s2 = −4·343, s3 = 0, s4 = 4·343²
        let (s3, s4) = newton_s3_s4(7, 0, -4 * 343);
        assert_eq!((s3, s4), (0, 4 * 343 * 343));
    }

    #[test]
    fn small_primes() {
        let s7 = small_prime_traces(7, &SmallPrimeOptions::default()).unwrap();
        assert_eq!((s7.a_p, s7.a_p2), (0, -140));
        assert_eq!(s7.method, SmallPrimeMethod::Quartic);
        let s11 = small_prime_traces(11, &SmallPrimeOptions::default()).unwrap();
        assert_eq!((s11.a_p, s11.a_p2), (-116, 1444));
        assert_eq!(s11.method, SmallPrimeMethod::Quartic);
    }

    #[test]
    fn charpoly_and_splitting() {
        let lf = frob_charpoly(7, 0, -140).unwrap();
        assert_eq!(lf.coeffs, vec![1, 0, 70, 0, 7i128.pow(6)]);
        assert!(lf.is_palindromic());
        assert!(lf.weil_defect() < 1e-9);
        let lf11 = frob_charpoly(11, -116, 1444).unwrap();
        assert_eq!(lf11.coeffs, vec![1, 116, (116 * 116 - 1444) / 2, 116 * 1331, 11i128.pow(6)]);
        assert!(lf11.weil_defect() < 1e-9);
        match split_over_f(11, -116, 1444).unwrap() {
            FSplitting::Split { t, t_conj } => {
                // −(58 − 2√5) and −(58 + 2√5), √5 = 2w − 1
                assert_eq!(t, QuadElem::from_i64s(-60, 4));
                assert_eq!(t_conj, QuadElem::from_i64s(-56, -4));
            }
            _ => panic!("11 splits"),
        }
        assert_eq!(split_over_f(7, 0, -140).unwrap(), FSplitting::Inert { c: -70 });
        assert!(frob_charpoly(7, 1, -140).is_err());
        assert!(split_over_f(11, -116, 1446).is_err());
    }

    #[test]
    fn guess_search_small_range() {
        // exercises the largest bad-factor candidates without overflow
        let t = ensure_traces(120, None, &SmallPrimeOptions::default()).unwrap();
        let r = guess_search(120, &t, &DEFAULT_T_GRID).unwrap();
        assert_eq!(r.len(), 5 * 5 * 7 * 9 * 9 * 9 * 2);
        assert!(r.windows(2).all(|w| w[0].score <= w[1].score));
    }

    #[test]
    fn bad_factor_series() {
        let f = BadFactor::Quadratic { eps: 1, j: 1 };
        assert_eq!(f.series(2, 4), vec![1, 0, 4, 0, 16]);
        let g = BadFactor::Linear { eps: -1, j: 2 };
        assert_eq!(g.series(5, 2), vec![1, -25, 625]);
        assert_eq!(BadFactor::candidates(2).len(), 9);
        assert_eq!(BadFactor::candidates(5).len(), 9);
        assert_eq!(BadFactorGuess::accepted().conductor(), 22500);
    }

    #[test]
    fn euler_series_inverts_factor() {
        let lf = frob_charpoly(11, -116, 1444).unwrap();
        let b = good_euler_series(&lf, 8);
        for k in 1..=8 {
            let conv: i128 = (0..=4.min(k)).map(|i| lf.coeffs[i] * b[k - i]).sum();
            assert_eq!(conv, 0);
        }
    }

    #[test]
    fn missing_traces_are_listed() {
        let t = TraceTable::default();
        let err = dirichlet_coeffs(20, &BadFactorGuess::accepted(), &t).unwrap_err();
        match err {
            CoreError::MissingTraces(v) => assert_eq!(v, vec![7, 11, 13, 17, 19]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn trace_cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.csv");
        let t = ensure_traces(60, Some(&path), &SmallPrimeOptions::default()).unwrap();
        assert_eq!(t.entries[&7], TraceEntry { a_p: 0, a_p2: Some(-140) });
        assert_eq!(t.entries[&29].a_p, 60);
        let again = TraceTable::load(&path).unwrap();
        assert_eq!(again, t);
        let a = dirichlet_coeffs(60, &BadFactorGuess::accepted(), &t).unwrap();
        assert_eq!(a[1], 1);
        assert_eq!(a[7], 0);
        assert_eq!((a[2], a[4], a[16]), (0, 4, 16));
        assert_eq!(a[29 * 2], 0);
        assert_eq!(a[11 * 4], a[11] * a[4]);
        let bad = std::fs::read_to_string(&path).unwrap().replace("\n13,0,", "\n13,2,");
        std::fs::write(&path, bad).unwrap();
        assert!(matches!(TraceTable::load(&path), Err(CoreError::CacheCorrupt { .. })));
    }
}
