use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quintic_cli::commands::{self, GuessMode, ThetaWhat};
use quintic_cli::{bench, export, verify, Config, Output};

/// Point counts, L-factors, Brandt matrices and Hodge data of the nodal quintic threefold.
#[derive(Parser)]
#[command(name = "quintic", version)]
struct Cli {
    /// TOML configuration file; the cache directory can also be set with QUINTIC_CACHE_DIR.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Resolved point count over F_q.
    Count {
        #[arg(long)]
        q: u64,
        /// Cross-check the node count by a full scan.
        #[arg(long)]
        verify_nodes: bool,
    },
    /// Frobenius traces a_{p^k} for k = 1..powers.
    Trace {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        powers: u32,
        /// Count over F_{p⁴} for the small primes regardless of cost.
        #[arg(long)]
        slow: bool,
    },
    /// Local factor at p and its splitting over Q(√5).
    Lfactor {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        slow: bool,
    },
    /// Functional-equation test values, or a ranking of bad-factor guesses.
    Lseries {
        #[arg(long)]
        nmax: Option<u64>,
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Comma-separated t values.
        #[arg(long)]
        t: Option<String>,
        #[arg(long, value_enum, default_value_t = GuessMode::Default)]
        guess: GuessMode,
        #[arg(long)]
        slow: bool,
    },
    /// Theta coefficients of the ideal classes or their right orders, as CSV.
    Theta {
        #[arg(long, value_enum)]
        what: ThetaWhat,
        /// Comma-separated totally positive ξ such as 1,5,11+w.
        #[arg(long)]
        xis: Option<String>,
    },
    /// Discriminants, Eichler invariant, mass, class and type number.
    OrderInvariants,
    /// Brandt matrix B(ξ) and optionally its eigenvalue on the eigenvector.
    Brandt {
        #[arg(long)]
        xi: String,
        #[arg(long)]
        eigen: bool,
    },
    /// Isotypic decompositions, defect and Hodge numbers.
    Hodge,
    /// Run the verification checks.
    Verify {
        #[arg(long, value_enum)]
        level: Option<verify::Level>,
        /// Comma-separated good primes whose eigenvalues are matched with the traces.
        #[arg(long)]
        frobenius: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Write tables to a directory.
    Export {
        #[arg(long, value_enum)]
        kind: export::Kind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Throughput of the F_q² scan.
    Bench {
        /// Comma-separated prime powers.
        #[arg(long)]
        q: Option<String>,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<Output> {
    let cfg = Config::load(cli.config.as_deref()).map_err(|e| quintic_cli::usage(format!("{e:#}")))?;
    match cli.cmd {
        Cmd::Count { q, verify_nodes } => commands::count(&cfg, q, verify_nodes),
        Cmd::Trace { p, powers, slow } => commands::trace(&cfg, p, powers, slow),
        Cmd::Lfactor { p, slow } => commands::lfactor(&cfg, p, slow),
        Cmd::Lseries { nmax, m, t, guess, slow } => {
            let ts = t.as_deref().map(commands::parse_f64_list).transpose()?;
            commands::lseries(&cfg, nmax, m, ts, guess, slow)
        }
        Cmd::Theta { what, xis } => commands::theta(&cfg, what, xis.as_deref()),
        Cmd::OrderInvariants => commands::order_invariants(&cfg),
        Cmd::Brandt { xi, eigen } => commands::brandt(&cfg, &xi, eigen),
        Cmd::Hodge => commands::hodge(&cfg),
        Cmd::Verify { level, frobenius, json } => {
            let ps = frobenius.as_deref().map(commands::parse_u64_list).transpose()?;
            let level = if ps.is_some() { level } else { Some(level.unwrap_or(verify::Level::Quick)) };
            verify::verify(&cfg, level, ps.as_deref(), json)
        }
        Cmd::Export { kind, out } => export::export(&cfg, kind, &out),
        Cmd::Bench { q } => {
            let qs = match q {
                Some(s) => commands::parse_u64_list(&s)?,
                None => bench::DEFAULT_QS.to_vec(),
            };
            bench::bench(&cfg, &qs)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.ok { 0 } else { quintic_cli::EXIT_CHECK as u8 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(quintic_cli::exit_code(&e) as u8)
        }
    }
}
