use std::path::{Path, PathBuf};

use anyhow::Context;
use quintic_core::brandt::{eigen_table, fmt_xw, EigenSystem};
use quintic_core::{hodge, Zw};
use serde::Serialize;

use crate::commands::{default_xis, printed_traces, theta_csv, traces_for, ThetaWhat};
use crate::{csv_text, envelope, Config, Output};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Traces,
    Theta,
    Eigenvalues,
    Hodge,
}

#[derive(Serialize)]
struct Written {
    kind: String,
    files: Vec<PathBuf>,
}

fn write(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// `p,a_p,a_p2` for the good primes of the printed trace table.
pub fn traces_csv(cfg: &Config) -> anyhow::Result<String> {
    cfg.check_cache()?;
    let primes: Vec<u64> = printed_traces().keys().copied().collect();
    let table = traces_for(cfg, &primes, false)?;
    let rows: Vec<Vec<String>> = primes
        .iter()
        .map(|p| {
            let e = table.entries[p];
            vec![p.to_string(), e.a_p.to_string(), e.a_p2.map(|x| x.to_string()).unwrap_or_default()]
        })
        .collect();
    csv_text(cfg, &["p".into(), "a_p".into(), "a_p2".into()], &rows)
}

/// `xi,p,lambda` for every row of the printed eigenvalue table, computed.
pub fn eigenvalues_csv(cfg: &Config) -> anyhow::Result<String> {
    let mut sys = EigenSystem::resolve(cfg.embedding_choice)?;
    let mut rows = Vec::new();
    for r in eigen_table() {
        let xi = Zw::new(r.xi.0, r.xi.1);
        let l = sys.eigenvalue(&xi)?;
        rows.push(vec![xi.to_string(), r.p.to_string(), fmt_xw(&l)]);
    }
    csv_text(cfg, &["xi".into(), "p".into(), "lambda".into()], &rows)
}

pub fn export(cfg: &Config, kind: Kind, out: &Path) -> anyhow::Result<Output> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let files = match kind {
        Kind::Traces => vec![write(out, "traces.csv", &traces_csv(cfg)?)?],
        Kind::Theta => vec![
            write(out, "theta_ideals.csv", &theta_csv(cfg, ThetaWhat::Ideals, &default_xis(ThetaWhat::Ideals))?)?,
            write(out, "theta_orders.csv", &theta_csv(cfg, ThetaWhat::Orders, &default_xis(ThetaWhat::Orders))?)?,
        ],
        Kind::Eigenvalues => vec![write(out, "eigenvalues.csv", &eigenvalues_csv(cfg)?)?],
        Kind::Hodge => {
            let r = hodge::hodge_report()?;
            vec![write(out, "hodge.json", &envelope(cfg, "export", r)?)?]
        }
    };
    let kind = format!("{kind:?}").to_lowercase();
    Ok(Output::ok(envelope(cfg, "export", Written { kind, files })?))
}
