use std::collections::BTreeMap;

use anyhow::Context;
use quintic_core::arith::finite::is_prime;
use quintic_core::brandt::{fmt_xw, BrandtContext, EigenSystem, DIM};
use quintic_core::idealtheta::{all_ideals, right_orders, theta_row, IDEAL_THETA_XIS, ORDER_THETA_XIS};
use quintic_core::lfunction::{
    dirichlet_coeffs, ensure_traces, fe_values, frob_charpoly, guess_search, small_prime_traces, split_over_f, spread,
    trace_record, FSplitting, TraceEntry, TraceTable,
};
use quintic_core::pointcount::{
    append_checked_rows, check_good, load_count_cache, resolved_count_with, CountOptions, HistogramMethod,
    COUNT_CACHE_HEADER,
};
use quintic_core::{hodge, quatorder, CoreError, Zw};
use rayon::prelude::*;
use serde::Serialize;

use crate::{csv_text, envelope, parse_xi, usage, Config, Output};

// ---------------------------------------------------------------------------
// count
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CountResult {
    #[serde(flatten)]
    breakdown: quintic_core::pointcount::CountBreakdown,
    method: Option<HistogramMethod>,
    cached: bool,
    closed_form: Option<u128>,
}

pub fn count(cfg: &Config, q: u64, verify_nodes: bool) -> anyhow::Result<Output> {
    check_good(q)?;
    cfg.check_cache()?;
    let path = cfg.count_cache();
    let cache = load_count_cache(&path)?;
    let (breakdown, method, cached) = match cache.get(&q) {
        Some(b) if !verify_nodes => (b.clone(), None, true),
        _ => {
            let opts = CountOptions { verify_nodes, ..CountOptions::default() };
            let (b, m) = resolved_count_with(q, &opts)?;
            if !cache.contains_key(&q) {
                let row = vec![
                    b.q.to_string(),
                    b.affine_singular_model.to_string(),
                    b.rational_nodes.to_string(),
                    b.infinity.to_string(),
                    b.resolved_total.to_string(),
                ];
                append_checked_rows(&path, COUNT_CACHE_HEADER, &[row])?;
            }
            (b, Some(m), false)
        }
    };
    let r = q % 5;
    let closed_form = (r == 2 || r == 3).then(|| {
        let q = q as u128;
        q * q * q + q * q + q + 1
    });
    let ok = closed_form.map_or(true, |c| c == breakdown.resolved_total);
    let text = envelope(cfg, "count", CountResult { breakdown, method, cached, closed_form })?;
    Ok(Output { text, ok })
}

// ---------------------------------------------------------------------------
// traces
// ---------------------------------------------------------------------------

/// (a_p, a_{p²}) for one good prime, from the small-prime route below 20 and from
/// point counts otherwise.
pub fn compute_trace_pair(cfg: &Config, p: u64, slow: bool) -> quintic_core::Result<TraceEntry> {
    if p <= 20 {
        let s = small_prime_traces(p, &cfg.small_prime_options(slow))?;
        return Ok(TraceEntry { a_p: s.a_p, a_p2: Some(s.a_p2) });
    }
    let a_p = trace_record(p)?.a_q;
    let a_p2 = trace_record(p * p)?.a_q;
    Ok(TraceEntry { a_p, a_p2: Some(a_p2) })
}

/// Cache-backed (a_p, a_{p²}) for the given good primes. Missing entries are computed
/// and written back.
pub fn traces_for(cfg: &Config, primes: &[u64], slow: bool) -> quintic_core::Result<TraceTable> {
    let path = cfg.trace_cache();
    let mut table = TraceTable::load(&path)?;
    let todo: Vec<u64> =
        primes.iter().copied().filter(|p| table.entries.get(p).map_or(true, |e| e.a_p2.is_none())).collect();
    let fresh: Vec<(u64, TraceEntry)> =
        todo.par_iter().map(|&p| compute_trace_pair(cfg, p, slow).map(|e| (p, e))).collect::<quintic_core::Result<_>>()?;
    if !fresh.is_empty() {
        table.entries.extend(fresh);
        table.save(&path)?;
    }
    Ok(table)
}

pub fn good_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(7)..=hi).filter(|&p| is_prime(p)).collect()
}

#[derive(Serialize)]
struct TracePower {
    q: u64,
    a_q: i64,
    count: Option<String>,
    k: Option<i64>,
}

#[derive(Serialize)]
struct TraceResult {
    p: u64,
    method: &'static str,
    traces: Vec<TracePower>,
}

pub fn trace(cfg: &Config, p: u64, powers: u32, slow: bool) -> anyhow::Result<Output> {
    check_good(p)?;
    if !is_prime(p) {
        return Err(CoreError::NotPrime(p).into());
    }
    if !(1..=4).contains(&powers) {
        return Err(usage("--powers must be between 1 and 4"));
    }
    cfg.check_cache()?;
    let mut traces = Vec::new();
    let method;
    if p <= 20 {
        let s = small_prime_traces(p, &cfg.small_prime_options(slow))?;
        method = match s.method {
            quintic_core::lfunction::SmallPrimeMethod::Quartic => "quartic",
            quintic_core::lfunction::SmallPrimeMethod::Cubic => "cubic",
        };
        let vals = [Some(s.a_p), Some(s.a_p2), Some(s.a_p3), s.a_p4];
        for (i, v) in vals.iter().enumerate().take(powers as usize) {
            let q = p.pow(i as u32 + 1);
            match v {
                Some(a) => traces.push(TracePower { q, a_q: *a, count: None, k: None }),
                None => {
                    let r = trace_record(q)?;
                    traces.push(TracePower { q, a_q: r.a_q, count: Some(r.count.to_string()), k: Some(r.k) });
                }
            }
        }
    } else {
        method = "count";
        let recs: Vec<_> =
            (1..=powers).into_par_iter().map(|e| trace_record(p.pow(e))).collect::<quintic_core::Result<_>>()?;
        for r in recs {
            traces.push(TracePower { q: r.q, a_q: r.a_q, count: Some(r.count.to_string()), k: Some(r.k) });
        }
    }
    if traces.len() >= 2 {
        let path = cfg.trace_cache();
        let mut table = TraceTable::load(&path)?;
        let e = TraceEntry { a_p: traces[0].a_q, a_p2: Some(traces[1].a_q) };
        if table.entries.get(&p) != Some(&e) {
            table.entries.insert(p, e);
            table.save(&path)?;
        }
    }
    Ok(Output::ok(envelope(cfg, "trace", TraceResult { p, method, traces })?))
}

// ---------------------------------------------------------------------------
// lfactor
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LFactorResult {
    p: u64,
    a_p: i64,
    a_p2: i64,
    /// det(1 − Fr·T) coefficients, constant term first
    coeffs: Vec<String>,
    palindromic: bool,
    weil_defect: f64,
    splitting: FSplitting,
}

pub fn lfactor(cfg: &Config, p: u64, slow: bool) -> anyhow::Result<Output> {
    check_good(p)?;
    if !is_prime(p) {
        return Err(CoreError::NotPrime(p).into());
    }
    cfg.check_cache()?;
    let table = traces_for(cfg, &[p], slow)?;
    let e = table.entries[&p];
    let a_p2 = e.a_p2.expect("traces_for fills a_p2");
    let lf = frob_charpoly(p, e.a_p, a_p2)?;
    let splitting = split_over_f(p, e.a_p, a_p2)?;
    let palindromic = lf.is_palindromic();
    let weil_defect = lf.weil_defect();
    let res = LFactorResult {
        p,
        a_p: e.a_p,
        a_p2,
        coeffs: lf.coeffs.iter().map(|c| c.to_string()).collect(),
        palindromic,
        weil_defect,
        splitting,
    };
    let ok = palindromic && weil_defect < 1e-6;
    Ok(Output { text: envelope(cfg, "lfactor", res)?, ok })
}

// ---------------------------------------------------------------------------
// lseries
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GuessMode {
    Default,
    Search,
}

#[derive(Serialize)]
struct FeResult {
    n_max: u64,
    m: u32,
    guess: quintic_core::lfunction::BadFactorGuess,
    conductor: u64,
    t: Vec<f64>,
    values: Vec<f64>,
    spread: f64,
}

pub fn lseries(
    cfg: &Config,
    n_max: Option<u64>,
    m: u32,
    ts: Option<Vec<f64>>,
    mode: GuessMode,
    slow: bool,
) -> anyhow::Result<Output> {
    if m > 2 {
        return Err(usage("--m must be 0, 1 or 2"));
    }
    cfg.check_cache()?;
    let opts = cfg.small_prime_options(slow);
    match mode {
        GuessMode::Default => {
            let n_max = n_max.unwrap_or(cfg.precision.fe_n_max);
            let ts = ts.unwrap_or_else(|| cfg.precision.t_grid.clone());
            let table = ensure_traces(n_max, Some(&cfg.trace_cache()), &opts)?;
            let guess = cfg.guess();
            let coeffs = dirichlet_coeffs(n_max, &guess, &table)?;
            let values = fe_values(m, &ts, &coeffs, &guess)?;
            let res = FeResult { n_max, m, guess, conductor: guess.conductor(), spread: spread(&values), t: ts, values };
            Ok(Output::ok(envelope(cfg, "lseries", res)?))
        }
        GuessMode::Search => {
            let n_max = n_max.unwrap_or(cfg.precision.guess_n_max);
            let ts = ts.unwrap_or_else(|| cfg.search_t_grid.clone());
            let table = ensure_traces(n_max, Some(&cfg.trace_cache()), &opts)?;
            let ranked = guess_search(n_max, &table, &ts)?;
            Ok(Output::ok(envelope(cfg, "lseries", ranked)?))
        }
    }
}

// ---------------------------------------------------------------------------
// theta
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ThetaWhat {
    Ideals,
    Orders,
}

pub fn parse_xi_list(s: &str) -> anyhow::Result<Vec<(i64, i64)>> {
    s.split(',')
        .map(|t| {
            let x = parse_xi(t)?;
            let a = i64::try_from(&x.a).map_err(|_| usage(format!("ξ {t} is too large")))?;
            let b = i64::try_from(&x.b).map_err(|_| usage(format!("ξ {t} is too large")))?;
            if !x.is_totally_positive() {
                return Err(usage(format!("ξ = {t} is not totally positive")));
            }
            Ok((a, b))
        })
        .collect()
}

pub fn xi_label((a, b): (i64, i64)) -> String {
    Zw::new(a, b).to_string()
}

/// Theta coefficients of the twelve ideals or their right orders, one row per class.
pub fn theta_rows(what: ThetaWhat, xis: &[(i64, i64)]) -> quintic_core::Result<Vec<Vec<u64>>> {
    let ideals = all_ideals()?;
    let lattices = match what {
        ThetaWhat::Ideals => ideals,
        ThetaWhat::Orders => right_orders(&ideals)?,
    };
    lattices.par_iter().map(|l| theta_row(l, xis)).collect()
}

pub fn theta_csv(cfg: &Config, what: ThetaWhat, xis: &[(i64, i64)]) -> anyhow::Result<String> {
    let rows = theta_rows(what, xis)?;
    let (label, name) = match what {
        ThetaWhat::Ideals => ("ideal", "I"),
        ThetaWhat::Orders => ("order", "O"),
    };
    let mut header = vec![label.to_string()];
    header.extend(xis.iter().map(|&x| xi_label(x)));
    let body: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| std::iter::once(format!("{name}{}", i + 1)).chain(r.iter().map(u64::to_string)).collect())
        .collect();
    csv_text(cfg, &header, &body)
}

pub fn default_xis(what: ThetaWhat) -> Vec<(i64, i64)> {
    match what {
        ThetaWhat::Ideals => IDEAL_THETA_XIS.to_vec(),
        ThetaWhat::Orders => ORDER_THETA_XIS.to_vec(),
    }
}

pub fn theta(cfg: &Config, what: ThetaWhat, xis: Option<&str>) -> anyhow::Result<Output> {
    let xis = match xis {
        Some(s) => parse_xi_list(s)?,
        None => default_xis(what),
    };
    Ok(Output::ok(theta_csv(cfg, what, &xis)?))
}

// ---------------------------------------------------------------------------
// order-invariants, brandt, hodge
// ---------------------------------------------------------------------------

pub fn order_invariants(cfg: &Config) -> anyhow::Result<Output> {
    let inv = quatorder::order_invariants()?;
    let ok = inv.eichler == 1 && inv.h == 12 && inv.t == 3;
    Ok(Output { text: envelope(cfg, "order-invariants", inv)?, ok })
}

#[derive(Serialize)]
struct BrandtResult {
    xi: String,
    embedding: quintic_core::brandt::EmbeddingChoice,
    rows: usize,
    cols: usize,
    pattern_ok: bool,
    trace: String,
    eigenvalue: Option<String>,
}

pub fn brandt(cfg: &Config, xi: &str, eigen: bool) -> anyhow::Result<Output> {
    let x = parse_xi(xi)?;
    if !x.is_totally_positive() {
        return Err(usage(format!("ξ = {xi} is not totally positive")));
    }
    let (ctx, eigenvalue, embedding) = if eigen {
        let mut sys = EigenSystem::resolve(cfg.embedding_choice)?;
        let l = sys.eigenvalue(&x)?;
        let choice = sys.ctx.choice;
        (sys.ctx, Some(fmt_xw(&l)), choice)
    } else {
        (BrandtContext::new(cfg.embedding_choice)?, None, cfg.embedding_choice)
    };
    let b = ctx.brandt_matrix(&x)?;
    let res = BrandtResult {
        xi: x.to_string(),
        embedding,
        rows: DIM,
        cols: DIM,
        pattern_ok: b.pattern_ok(),
        trace: b.trace().to_string(),
        eigenvalue,
    };
    let ok = res.pattern_ok;
    Ok(Output { text: envelope(cfg, "brandt", res)?, ok })
}

pub fn hodge(cfg: &Config) -> anyhow::Result<Output> {
    let r = hodge::hodge_report()?;
    let ok = r.certificate.corank == 20;
    Ok(Output { text: envelope(cfg, "hodge", r)?, ok })
}

/// Comma-separated list of u64.
pub fn parse_u64_list(s: &str) -> anyhow::Result<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("{t:?} is not a non-negative integer")))
        .collect::<anyhow::Result<_>>()
        .map_err(|e| usage(e.to_string()))
}

pub fn parse_f64_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("{t:?} is not a number"))))
        .collect()
}

/// Name → value map of the printed traces, for lookups by p.
pub fn printed_traces() -> BTreeMap<u64, (i64, i64)> {
    quintic_core::lfunction::TRACE_TABLE.iter().map(|&(p, a, a2)| (p, (a, a2))).collect()
}
