//! Command implementations behind the `quintic` binary. Each command is a function of
//! the configuration, the cache directory and its flags, and returns the text to print
//! together with whether every check it ran passed.

pub mod bench;
pub mod commands;
pub mod config;
pub mod export;
pub mod verify;

use quintic_core::error::CoreError;
use serde::Serialize;

pub use config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Rejected input that clap cannot see, e.g. a malformed ξ or a bad config file.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Printed output of a command and whether its checks passed.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub ok: bool,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Output { text, ok: true }
    }
}

/// JSON wrapper shared by every JSON-producing command.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub config_hash: String,
    pub command: &'a str,
    pub result: T,
}

pub fn envelope<T: Serialize>(cfg: &Config, command: &str, result: T) -> anyhow::Result<String> {
    let e = Envelope { config_hash: cfg.hash(), command, result };
    Ok(serde_json::to_string_pretty(&e)? + "\n")
}

/// CSV text with a leading `# config <hash>` comment line.
pub fn csv_text(cfg: &Config, header: &[String], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    Ok(format!("# config {}\n{body}", cfg.hash()))
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if e.downcast_ref::<config::CacheMismatch>().is_some() {
        return EXIT_CHECK;
    }
    match e.downcast_ref::<CoreError>() {
        Some(
            CoreError::BadReduction(_)
            | CoreError::NotPrime(_)
            | CoreError::NotPrimePower(_)
            | CoreError::Invalid(_)
            | CoreError::Unsupported(_),
        ) => EXIT_USAGE,
        Some(CoreError::CacheCorrupt { .. }) => EXIT_CHECK,
        _ => EXIT_INTERNAL,
    }
}

pub(crate) fn parse_xi(s: &str) -> anyhow::Result<quintic_core::Zw> {
    s.parse().map_err(|e| usage(format!("cannot parse ξ {s:?}: {e}")))
}
