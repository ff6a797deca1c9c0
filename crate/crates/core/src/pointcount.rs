//! Point counts of the nodal quintic, its small resolution and the locus at infinity
//! over finite fields.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::finite::{dickson_gcd_condition, prime_power, FieldTable};
use crate::error::{CoreError, Result};

/// Above this q a full q² scan is replaced by the permutation argument whenever the
/// Dickson vector map is a bijection (which makes the histogram uniform).
pub const DEFAULT_SCAN_LIMIT: u64 = 2000;

pub fn check_good(q: u64) -> Result<(u64, u32)> {
    let (p, n) = prime_power(q).ok_or(CoreError::NotPrimePower(q))?;
    if p == 2 || p == 3 || p == 5 {
        return Err(CoreError::BadReduction(q));
    }
    Ok((p, n))
}

// ---------------------------------------------------------------------------
// Scan kernel
// ---------------------------------------------------------------------------

/// Precomputed data for evaluating P₅ over F_q with table lookups only.
///
/// Additive arithmetic runs on a packed form (one byte per F_p digit for extension
/// fields, the plain residue for prime fields). Multiplication by per-row constants
/// goes through a discrete-log table whose zero sentinel maps to 0.
struct Kernel {
    q: usize,
    p: u32,
    n: u32,
    /// packed value of g^k for k < 2(q−1), followed by zeros
    exp_packed: Vec<u32>,
    /// log of each dense element; log(0) = 2(q−1)
    log: Vec<u32>,
    packed: Vec<u32>,
    /// byte tables for packed → dense
    unpack: [Vec<u32>; 4],
}

impl Kernel {
    fn new(f: &FieldTable) -> Self {
        let q = f.q as usize;
        let p = f.p as u32;
        let n = f.n;
        assert!(n == 1 || p < 128, "packed digits need p < 128");
        let zero_log = 2 * (q as u32 - 1);
        let packed: Vec<u32> = (0..q as u32)
            .map(|x| {
                if n == 1 {
                    x
                } else {
                    f.digits(x).iter().enumerate().map(|(i, &d)| (d as u32) << (8 * i)).sum()
                }
            })
            .collect();
        let exp_tab = f.exp.as_ref().expect("log tables required for scans");
        let log_tab = f.log.as_ref().unwrap();
        let mut exp_packed = vec![0u32; 2 * zero_log as usize + 1];
        for k in 0..2 * (q - 1) {
            exp_packed[k] = packed[exp_tab[k % (q - 1)] as usize];
        }
        let log: Vec<u32> = (0..q).map(|x| if x == 0 { zero_log } else { log_tab[x] }).collect();
        let unpack = std::array::from_fn(|i| {
            if (i as u32) < n && n > 1 {
                (0..256u32).map(|d| if d < p { d * p.pow(i as u32) } else { 0 }).collect()
            } else {
                Vec::new()
            }
        });
        Kernel { q, p, n, exp_packed, log, packed, unpack }
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        if self.n == 1 {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else {
            let s = a + b;
            let t = s + (128 - self.p) * 0x0101_0101;
            let over = (t >> 7) & 0x0101_0101;
            s - over * self.p
        }
    }

    #[inline(always)]
    fn dense(&self, v: u32) -> usize {
        if self.n == 1 {
            v as usize
        } else {
            let mut d = 0u32;
            for i in 0..self.n as usize {
                d += self.unpack[i][((v >> (8 * i)) & 0xff) as usize];
            }
            d as usize
        }
    }
}

/// Row constants of P₅ seen as a polynomial in x2:
/// x2⁵ − 5x1·x2³ + (5x1 + 5)·x2² + (−5x1³ + 5x1² − 5)·x2 + (x1⁵ + 5x1² − 5x1).
fn row_constants(f: &FieldTable, x1: u32) -> [u32; 4] {
    let five = f.from_int(5);
    let x1_2 = f.mul(x1, x1);
    let x1_3 = f.mul(x1_2, x1);
    let x1_5 = f.mul(x1_3, x1_2);
    let c3 = f.neg(f.mul(five, x1));
    let c2 = f.add(f.mul(five, x1), five);
    let c1 = f.sub(f.sub(f.mul(five, x1_2), f.mul(five, x1_3)), five);
    let c0 = f.sub(f.add(x1_5, f.mul(five, x1_2)), f.mul(five, x1));
    [c0, c1, c2, c3]
}

/// Histogram of P₅ over F_q², by full scan. Rows x1 are split into stripes processed
/// in parallel; symmetry P₅(x1, x2) = P₅(x2, x1) halves the work.
pub fn value_histogram_scan(f: &FieldTable) -> Vec<u64> {
    let k = Kernel::new(f);
    let q = k.q;
    let pk5: Vec<u32> = (0..q as u32).map(|x| k.packed[f.pow(x, 5) as usize]).collect();
    let l1: Vec<u32> = (0..q as u32).map(|x| k.log[x as usize]).collect();
    let l2: Vec<u32> = (0..q as u32).map(|x| k.log[f.mul(x, x) as usize]).collect();
    let l3: Vec<u32> = (0..q as u32).map(|x| k.log[f.pow(x, 3) as usize]).collect();
    let stripe = 64usize;
    let stripes: Vec<usize> = (0..q).step_by(stripe).collect();
    stripes
        .par_iter()
        .map(|&start| {
            let mut h = vec![0u64; q];
            for x1 in start..(start + stripe).min(q) {
                let [c0, c1, c2, c3] = row_constants(f, x1 as u32);
                let c0p = k.packed[c0 as usize];
                let (lc1, lc2, lc3) = (k.log[c1 as usize], k.log[c2 as usize], k.log[c3 as usize]);
                let e = &k.exp_packed;
                let eval = |x2: usize| {
                    let mut v = k.add(c0p, pk5[x2]);
                    v = k.add(v, e[(lc3 + l3[x2]) as usize]);
                    v = k.add(v, e[(lc2 + l2[x2]) as usize]);
                    k.add(v, e[(lc1 + l1[x2]) as usize])
                };
                h[k.dense(eval(x1))] += 1;
                for x2 in x1 + 1..q {
                    h[k.dense(eval(x2))] += 2;
                }
            }
            h
        })
        .reduce(
            || vec![0u64; q],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Reference evaluation of the same histogram through generic field operations.
pub fn value_histogram_reference(f: &FieldTable) -> Vec<u64> {
    let q = f.q as u32;
    let mut h = vec![0u64; q as usize];
    for x1 in 0..q {
        for x2 in 0..q {
            h[crate::chebyshev::p5_eval(f, x1, x2) as usize] += 1;
        }
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HistogramMethod {
    Scan,
    /// uniform histogram from the Dickson permutation property
    Permutation,
}

/// P₅ value histogram over F_q².
pub fn value_histogram(q: u64) -> Result<Vec<u64>> {
    check_good(q)?;
    let f = FieldTable::for_q(q)?;
    Ok(value_histogram_scan(&f))
}

fn histogram_auto(f: &FieldTable, scan_limit: u64) -> (Vec<u64>, HistogramMethod) {
    if f.q > scan_limit && dickson_gcd_condition(5, f.q) {
        (vec![f.q; f.q as usize], HistogramMethod::Permutation)
    } else {
        (value_histogram_scan(f), HistogramMethod::Scan)
    }
}

pub fn sum_of_squares(h: &[u64]) -> u128 {
    h.iter().map(|&x| x as u128 * x as u128).sum()
}

// ---------------------------------------------------------------------------
// Nodes
// ---------------------------------------------------------------------------

/// Path A: closed form in q mod 15.
pub fn rational_nodes_closed_form(q: u64) -> u64 {
    match q % 15 {
        1 => 120,
        11 => 104,
        4 => 24,
        14 => 8,
        _ => 0,
    }
}

/// Path B: common zeros of both partials over F_q, bucketed by critical value; the
/// sum of squared bucket sizes counts pairs (P, Q) with P₅(P) = P₅(Q).
pub fn rational_nodes_scan(f: &FieldTable) -> u64 {
    let q = f.q as u32;
    let five = f.from_int(5);
    let d1 = |x1: u32, x2: u32| {
        // 5x1⁴ − 15x1²x2 − 5x2³ + 10x1x2 + 5x2² + 10x1 − 5
        let x1_2 = f.mul(x1, x1);
        let x2_2 = f.mul(x2, x2);
        let mut v = f.mul(five, f.mul(x1_2, x1_2));
        v = f.sub(v, f.mul(f.from_int(15), f.mul(x1_2, x2)));
        v = f.sub(v, f.mul(five, f.mul(x2_2, x2)));
        v = f.add(v, f.mul(f.from_int(10), f.mul(x1, x2)));
        v = f.add(v, f.mul(five, x2_2));
        v = f.add(v, f.mul(f.from_int(10), x1));
        f.sub(v, five)
    };
    let mut buckets: BTreeMap<u32, u64> = BTreeMap::new();
    for x1 in 0..q {
        for x2 in 0..q {
            if d1(x1, x2) == 0 && d1(x2, x1) == 0 {
                *buckets.entry(crate::chebyshev::p5_eval(f, x1, x2)).or_insert(0) += 1;
            }
        }
    }
    buckets.values().map(|c| c * c).sum()
}

pub fn rational_node_count(q: u64, verify: bool) -> Result<u64> {
    check_good(q)?;
    let a = rational_nodes_closed_form(q);
    if verify {
        let f = FieldTable::for_q(q)?;
        let b = rational_nodes_scan(&f);
        if a != b {
            return Err(CoreError::Consistency(format!("node count at q={q}: closed form {a}, scan {b}")));
        }
    }
    Ok(a)
}

// ---------------------------------------------------------------------------
// Infinity
// ---------------------------------------------------------------------------

/// Points of x1⁵ + x2⁵ = x3⁵ + x4⁵ in P³(F_q): (Σ g(v)² − 1)/(q − 1).
pub fn infinity_count_with(f: &FieldTable) -> Result<u64> {
    let q = f.q as usize;
    let c = f.value_histogram(|t| f.pow(t, 5));
    let sum_sq: u128 = if c.iter().all(|&x| x == 1) {
        // t ↦ t⁵ is a bijection, so g is the constant q
        (q as u128).pow(3)
    } else {
        let support: Vec<(u32, u64)> = c.iter().enumerate().filter(|(_, &n)| n > 0).map(|(v, &n)| (v as u32, n)).collect();
        let mut g = vec![0u64; q];
        for &(a, na) in &support {
            for &(b, nb) in &support {
                g[f.add(a, b) as usize] += na * nb;
            }
        }
        sum_of_squares(&g)
    };
    let num = sum_sq - 1;
    let den = q as u128 - 1;
    if num % den != 0 {
        return Err(CoreError::Consistency(format!("infinity count not integral at q={q}")));
    }
    Ok((num / den) as u64)
}

pub fn infinity_count(q: u64) -> Result<u64> {
    check_good(q)?;
    infinity_count_with(&FieldTable::for_q(q)?)
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBreakdown {
    pub q: u64,
    pub affine_singular_model: u128,
    pub rational_nodes: u64,
    pub infinity: u64,
    pub resolved_total: u128,
}

impl CountBreakdown {
    pub fn assemble(q: u64, affine: u128, nodes: u64, infinity: u64) -> Self {
        let blow = (q as u128 + 1).pow(2) - 1;
        CountBreakdown {
            q,
            affine_singular_model: affine,
            rational_nodes: nodes,
            infinity,
            resolved_total: affine + nodes as u128 * blow + infinity as u128,
        }
    }

    pub fn is_consistent(&self) -> bool {
        let r = Self::assemble(self.q, self.affine_singular_model, self.rational_nodes, self.infinity);
        r.resolved_total == self.resolved_total
    }
}

#[derive(Clone, Debug)]
pub struct CountOptions {
    pub scan_limit: u64,
    pub verify_nodes: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { scan_limit: DEFAULT_SCAN_LIMIT, verify_nodes: false }
    }
}

pub fn resolved_count(q: u64) -> Result<CountBreakdown> {
    resolved_count_with(q, &CountOptions::default()).map(|(b, _)| b)
}

/// Always scans, regardless of q.
pub fn resolved_count_scanned(q: u64) -> Result<CountBreakdown> {
    resolved_count_with(q, &CountOptions { scan_limit: u64::MAX, verify_nodes: false }).map(|(b, _)| b)
}

pub fn resolved_count_with(q: u64, opts: &CountOptions) -> Result<(CountBreakdown, HistogramMethod)> {
    check_good(q)?;
    let f = FieldTable::for_q(q)?;
    let (h, method) = histogram_auto(&f, opts.scan_limit);
    let total: u64 = h.iter().sum();
    if total != q * q {
        return Err(CoreError::Consistency(format!("histogram mass {total} ≠ q² at q={q}")));
    }
    let affine = sum_of_squares(&h);
    let nodes = rational_node_count(q, opts.verify_nodes)?;
    let inf = infinity_count_with(&f)?;
    let b = CountBreakdown::assemble(q, affine, nodes, inf);
    let m5 = q % 5;
    if m5 == 2 || m5 == 3 {
        let expect = (q as u128).pow(3) + (q as u128).pow(2) + q as u128 + 1;
        if b.resolved_total != expect {
            return Err(CoreError::Consistency(format!(
                "q={q} ≡ ±2 mod 5 but resolved count {} ≠ q³+q²+q+1",
                b.resolved_total
            )));
        }
    }
    Ok((b, method))
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

pub const COUNT_CACHE_HEADER: &str = "q,affine,nodes,infinity,resolved,checksum";

pub fn row_checksum(fields: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(fields.join(",").as_bytes());
    let d = h.finalize();
    d.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Read a checksummed CSV; every row's last column must be the checksum of the others.
pub fn read_checked_csv(path: &Path, header: &str) -> Result<Vec<Vec<String>>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::Io { path: path.display().to_string(), source: e })?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != header {
                return Err(CoreError::CacheCorrupt { path: path.display().to_string(), row: 0, reason: "header mismatch".into() });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        let ncols = header.split(',').count();
        if cols.len() != ncols {
            return Err(CoreError::CacheCorrupt { path: path.display().to_string(), row: i, reason: format!("expected {ncols} columns") });
        }
        let (body, sum) = cols.split_at(ncols - 1);
        if row_checksum(body) != sum[0] {
            return Err(CoreError::CacheCorrupt {
                path: path.display().to_string(),
                row: i,
                reason: format!("checksum mismatch for key {}", body[0]),
            });
        }
        rows.push(body.to_vec());
    }
    Ok(rows)
}

pub fn append_checked_rows(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let io = |e| CoreError::Io { path: path.display().to_string(), source: e };
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
    }
    let fresh = !path.exists();
    let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    if fresh {
        writeln!(file, "{header}").map_err(io)?;
    }
    for r in rows {
        writeln!(file, "{},{}", r.join(","), row_checksum(r)).map_err(io)?;
    }
    Ok(())
}

pub fn load_count_cache(path: &Path) -> Result<BTreeMap<u64, CountBreakdown>> {
    let mut out = BTreeMap::new();
    for (i, r) in read_checked_csv(path, COUNT_CACHE_HEADER)?.into_iter().enumerate() {
        let bad = |_| CoreError::CacheCorrupt { path: path.display().to_string(), row: i + 1, reason: "unparsable number".into() };
        let b = CountBreakdown {
            q: r[0].parse().map_err(bad)?,
            affine_singular_model: r[1].parse().map_err(bad)?,
            rational_nodes: r[2].parse().map_err(bad)?,
            infinity: r[3].parse().map_err(bad)?,
            resolved_total: r[4].parse().map_err(bad)?,
        };
        if !b.is_consistent() {
            return Err(CoreError::CacheCorrupt { path: path.display().to_string(), row: i + 1, reason: "inconsistent totals".into() });
        }
        out.insert(b.q, b);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CountRangeReport {
    pub computed: Vec<u64>,
    pub records: Vec<CountBreakdown>,
}

/// Ensure every q in the list has a cache row; rows already present are not recomputed.
pub fn count_range(qs: &[u64], cache: &Path) -> Result<CountRangeReport> {
    let existing = load_count_cache(cache)?;
    let mut computed = Vec::new();
    let mut new_rows = Vec::new();
    let mut records = Vec::new();
    let mut fresh: BTreeMap<u64, CountBreakdown> = BTreeMap::new();
    for &q in qs {
        if let Some(b) = existing.get(&q).or_else(|| fresh.get(&q)) {
            records.push(b.clone());
            continue;
        }
        let b = resolved_count(q)?;
        computed.push(q);
        new_rows.push(vec![
            b.q.to_string(),
            b.affine_singular_model.to_string(),
            b.rational_nodes.to_string(),
            b.infinity.to_string(),
            b.resolved_total.to_string(),
        ]);
        fresh.insert(q, b.clone());
        records.push(b);
    }
    append_checked_rows(cache, COUNT_CACHE_HEADER, &new_rows)?;
    Ok(CountRangeReport { computed, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_matches_reference() {
        for q in [7u64, 11, 13, 49, 121, 343, 31] {
            let f = FieldTable::for_q(q).unwrap();
            assert_eq!(value_histogram_scan(&f), value_histogram_reference(&f), "q={q}");
        }
    }

    #[test]
    fn uniform_when_dickson_permutes() {
        for q in [7u64, 13, 17, 23, 343] {
            let h = value_histogram(q).unwrap();
            assert!(h.iter().all(|&c| c == q), "q={q}");
        }
        assert_eq!(value_histogram(7).unwrap().iter().sum::<u64>(), 49);
    }

    #[test]
    fn node_paths_agree() {
        for q in [7u64, 11, 13, 19, 29, 31, 41, 49, 59, 61, 121, 169] {
            let f = FieldTable::for_q(q).unwrap();
            assert_eq!(rational_nodes_closed_form(q), rational_nodes_scan(&f), "q={q}");
        }
        assert_eq!(rational_nodes_closed_form(31), 120);
        assert_eq!(rational_nodes_closed_form(7), 0);
        assert_eq!(rational_nodes_closed_form(11), 104);
    }

    #[test]
    fn infinity_examples() {
        assert_eq!(infinity_count(7).unwrap(), 57);
        for q in [13u64, 17, 19, 29, 49, 59] {
            if q % 5 == 2 || q % 5 == 3 || q % 5 == 4 {
                assert_eq!(infinity_count(q).unwrap(), q * q + q + 1, "q={q}");
            }
        }
    }

    #[test]
    fn resolved_examples() {
        assert_eq!(resolved_count(7).unwrap().resolved_total, 400);
        assert_eq!(resolved_count(13).unwrap().resolved_total, 2380);
        assert!(check_good(9).is_err());
        assert!(check_good(25).is_err());
    }

    #[test]
    fn cache_roundtrip_and_idempotence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        let r1 = count_range(&[7], &path).unwrap();
        assert_eq!(r1.computed, vec![7]);
        assert_eq!(r1.records[0].resolved_total, 400);
        let r2 = count_range(&[7], &path).unwrap();
        assert!(r2.computed.is_empty());
        let r3 = count_range(&[7, 13, 23], &path).unwrap();
        assert_eq!(r3.computed, vec![13, 23]);
        for b in &r3.records {
            let q = b.q as u128;
            assert_eq!(b.resolved_total, q * q * q + q * q + q + 1);
        }
        // corrupt a row
        let text = std::fs::read_to_string(&path).unwrap().replace("2380", "2381");
        std::fs::write(&path, text).unwrap();
        let err = load_count_cache(&path).unwrap_err();
        assert!(matches!(err, CoreError::CacheCorrupt { row: 2, .. }), "{err}");
    }
}
