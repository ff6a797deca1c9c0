use std::time::Instant;

use quintic_core::arith::finite::prime_power;
use quintic_core::arith::FieldTable;
use quintic_core::pointcount::{check_good, value_histogram_scan};
use quintic_core::CoreError;
use serde::Serialize;

use crate::{envelope, Config, Output};

pub const DEFAULT_QS: [u64; 3] = [101, 343, 1009];

#[derive(Serialize)]
pub struct BenchRow {
    pub q: u64,
    /// points of F_q² covered by the scan
    pub points: u64,
    pub single_thread_secs: f64,
    pub parallel_secs: f64,
    pub single_thread_rate: f64,
    pub parallel_rate: f64,
    pub speedup: f64,
}

#[derive(Serialize)]
pub struct BenchReport {
    pub threads: usize,
    pub min_rate: f64,
    pub rows: Vec<BenchRow>,
    pub ok: bool,
}

fn time_scan(f: &FieldTable, reps: u32) -> f64 {
    let t = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(value_histogram_scan(f));
    }
    t.elapsed().as_secs_f64() / reps as f64
}

pub fn run(cfg: &Config, qs: &[u64]) -> anyhow::Result<BenchReport> {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let threads = rayon::current_num_threads();
    let mut rows = Vec::new();
    for &q in qs {
        check_good(q)?;
        let (p, n) = prime_power(q).ok_or(CoreError::NotPrimePower(q))?;
        if q > cfg.table_budget {
            return Err(CoreError::Invalid(format!("q = {q} exceeds the table budget {}", cfg.table_budget)).into());
        }
        let f = FieldTable::with_budget(p, n, cfg.table_budget)?;
        let points = q * q;
        // repeat small scans so each timing covers roughly 10⁷ points
        let reps = (10_000_000 / points).clamp(1, 100) as u32;
        let s = single.install(|| time_scan(&f, reps));
        let m = time_scan(&f, reps);
        rows.push(BenchRow {
            q,
            points,
            single_thread_secs: s,
            parallel_secs: m,
            single_thread_rate: points as f64 / s,
            parallel_rate: points as f64 / m,
            speedup: s / m,
        });
    }
    let ok = rows.iter().all(|r| r.parallel_rate.max(r.single_thread_rate) >= cfg.precision.bench_min_rate);
    Ok(BenchReport { threads, min_rate: cfg.precision.bench_min_rate, rows, ok })
}

pub fn bench(cfg: &Config, qs: &[u64]) -> anyhow::Result<Output> {
    let r = run(cfg, qs)?;
    let ok = r.ok;
    Ok(Output { text: envelope(cfg, "bench", r)?, ok })
}
