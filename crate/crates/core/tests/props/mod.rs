//! Property suites shared by the `properties` and `acceptance` test targets. Each
//! suite runs a proptest runner for the given number of cases and returns the first
//! failure, if any.

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use quintic_core::arith::finite::is_prime;
use quintic_core::arith::{FieldTable, QuadInt};
use quintic_core::brandt::{commute, BrandtContext, EmbeddingChoice};
use quintic_core::chebyshev::dickson_eval;
use quintic_core::idealtheta::{all_ideals, count_by_norm, norm_form, NormForm8};
use quintic_core::lfunction::{ensure_traces, frob_charpoly, small_prime_traces, trace_aq, FmEvaluator, SmallPrimeOptions, TraceTable};

pub type Outcome = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn finish(r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Outcome {
    r.map_err(|e| e.to_string())
}

/// Traces for p < 400, written to and read back from a cache file.
fn cached_traces() -> &'static TraceTable {
    static T: OnceLock<TraceTable> = OnceLock::new();
    T.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("traces.csv");
        let built = ensure_traces(400, Some(&path), &SmallPrimeOptions::default()).expect("traces");
        let loaded = TraceTable::load(&path).expect("reload");
        assert_eq!(built, loaded);
        loaded
    })
}

/// |a_p| ≤ 4p^{3/2}, |a_{p²}| ≤ 4p³, and the local factor has all roots of absolute value p^{3/2}.
pub fn weil_bounds(cases: u32) -> Outcome {
    let t = cached_traces();
    for (&p, e) in &t.entries {
        let p3 = (p as i128).pow(3);
        let ok1 = (e.a_p as i128).pow(2) <= 16 * p3;
        let ok2 = e.a_p2.map_or(true, |s| (s as i128).pow(2) <= 16 * p3 * p3);
        if !(ok1 && ok2) {
            return Err(format!("p={p}: Weil bound fails for {e:?}"));
        }
    }
    let with_p2: Vec<(u64, i64, i64)> =
        t.entries.iter().filter_map(|(&p, e)| e.a_p2.map(|s| (p, e.a_p, s))).collect();
    finish(runner(cases).run(&proptest::sample::select(with_p2), |(p, a, s)| {
        let lf = frob_charpoly(p, a, s).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(lf.is_palindromic());
        prop_assert!(lf.weil_defect() < 1e-9, "p={}: defect {}", p, lf.weil_defect());
        Ok(())
    }))
}

/// a_q = 0 whenever q ≡ ±2 mod 5.
pub fn trace_vanishes_off_split_class(cases: u32) -> Outcome {
    let mut qs: Vec<u64> = (7..700).filter(|&p| is_prime(p) && matches!(p % 5, 2 | 3)).collect();
    qs.push(343);
    finish(runner(cases).run(&proptest::sample::select(qs), |q| {
        let a = if q <= 20 { small_prime_traces(q, &SmallPrimeOptions::default()).map(|t| t.a_p) } else { trace_aq(q) };
        let a = a.map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(a, 0, "q = {}", q);
        Ok(())
    }))
}

fn forms() -> &'static Vec<NormForm8> {
    static F: OnceLock<Vec<NormForm8>> = OnceLock::new();
    F.get_or_init(|| all_ideals().expect("ideals").iter().map(|i| norm_form(i).expect("norm form")).collect())
}

/// Representation numbers are even (β and −β) and unchanged under ξ ↦ w²ξ.
pub fn theta_even_and_unit_square(cases: u32) -> Outcome {
    let nfs = forms();
    let strat = (0..nfs.len(), 1i64..10, -6i64..7).prop_filter("totally positive", |&(_, a, b)| {
        QuadInt::new(a, b).is_totally_positive()
    });
    finish(runner(cases).run(&strat, |(i, a, b)| {
        let xi = QuadInt::new(a, b);
        let c = count_by_norm(&nfs[i], &xi).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(c % 2, 0, "I{} at {}", i + 1, xi);
        let w2 = QuadInt::new(1, 1);
        let moved = &xi * &w2;
        let c2 = count_by_norm(&nfs[i], &moved).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(c, c2, "I{} at {} vs {}", i + 1, xi, moved);
        Ok(())
    }))
}

/// B(ξ)B(η) = B(η)B(ξ) for random pairs of small totally positive ξ, η.
pub fn brandt_commutativity(cases: u32) -> Outcome {
    let ctx = BrandtContext::new(EmbeddingChoice::default()).map_err(|e| e.to_string())?;
    let xis: Vec<(i64, i64)> = vec![(2, 0), (3, 0), (3, 1), (4, -1), (2, 1), (7, 0), (4, 1), (5, -1), (5, 1)];
    let strat = (proptest::sample::select(xis.clone()), proptest::sample::select(xis)).prop_filter("distinct", |(x, y)| x != y);
    finish(runner(cases).run(&strat, |(x, y)| {
        let bx = ctx.brandt_matrix(&QuadInt::new(x.0, x.1)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let by = ctx.brandt_matrix(&QuadInt::new(y.0, y.1)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(commute(&bx, &by), "B({:?}) and B({:?}) do not commute", x, y);
        Ok(())
    }))
}

/// x·F_m'(x) = −F_{m−1}(x), with the derivative from a central difference.
pub fn fm_ode(cases: u32) -> Outcome {
    let ev = FmEvaluator::default();
    finish(runner(cases).run(&(1u32..=2, 0.05f64..20.0), |(m, x)| {
        let h = 1e-4 * x;
        let f = |y: f64| ev.eval(m, y).map_err(|e| TestCaseError::fail(e.to_string()));
        let d = (f(x + h)? - f(x - h)?) / (2.0 * h);
        let rhs = -ev.eval(m - 1, x).map_err(|e| TestCaseError::fail(e.to_string()))? / x;
        prop_assert!((d - rhs).abs() <= 1e-6 * rhs.abs().max(1e-12), "m={} x={}: {} vs {}", m, x, d, rhs);
        Ok(())
    }))
}

/// D_n(e₁(y), e₂(y)) = (e₁(yⁿ), e₂(yⁿ)) for y₁y₂y₃ = 1, and D_m ∘ D_n = D_{mn}.
pub fn dickson_functional_equation(cases: u32) -> Outcome {
    let strat = (proptest::sample::select(vec![7u64, 11, 13, 31, 101, 997]), 1u32..1000, 1u32..1000, 1usize..9, 1usize..9);
    finish(runner(cases).run(&strat, |(p, u, v, m, n)| {
        let f = FieldTable::new(p, 1).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let (y1, y2) = ((u % (p as u32 - 1)) + 1, (v % (p as u32 - 1)) + 1);
        let y3 = f.inv(f.mul(y1, y2)).expect("nonzero");
        let e = |a: u32, b: u32, c: u32| {
            let s1 = f.add(f.add(a, b), c);
            let s2 = f.add(f.add(f.mul(a, b), f.mul(a, c)), f.mul(b, c));
            (s1, s2)
        };
        let (s1, s2) = e(y1, y2, y3);
        let pw = |y: u32| f.pow(y, n as u64);
        prop_assert_eq!(dickson_eval(&f, n, s1, s2), e(pw(y1), pw(y2), pw(y3)), "p={} n={}", p, n);
        let (a, b) = dickson_eval(&f, n, s1, s2);
        prop_assert_eq!(dickson_eval(&f, m, a, b), dickson_eval(&f, m * n, s1, s2), "p={} m={} n={}", p, m, n);
        Ok(())
    }))
}
