use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use quintic_core::brandt::EmbeddingChoice;
use quintic_core::lfunction::{BadFactorGuess, SmallPrimeOptions, DEFAULT_T_GRID};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CONFIG_VERSION: u32 = 1;

/// Overrides `cache_dir` when set.
pub const CACHE_ENV: &str = "QUINTIC_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Precision {
    /// Dirichlet coefficients used by the functional-equation test.
    pub fe_n_max: u64,
    /// Coefficients used when ranking bad-factor guesses.
    pub guess_n_max: u64,
    pub t_grid: Vec<f64>,
    /// Count over F_{p⁴} for small p only while p⁴ stays below this.
    pub p4_limit: u64,
    /// Minimum point evaluations per second for `bench` to report success.
    pub bench_min_rate: f64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            fe_n_max: 3000,
            guess_n_max: 1000,
            t_grid: vec![1.0, 1.4, 1.6, 2.0, 2.5],
            p4_limit: SmallPrimeOptions::default().p4_limit,
            bench_min_rate: 1e6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub cache_dir: PathBuf,
    /// Largest field for which Zech-logarithm tables are built.
    pub table_budget: u64,
    pub precision: Precision,
    pub embedding_choice: EmbeddingChoice,
    /// Replaces the accepted conductor, sign and bad factors when set.
    pub bad_factor: Option<BadFactorGuess>,
    /// t-grid used by the guess search.
    pub search_t_grid: Vec<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            version: CONFIG_VERSION,
            cache_dir: PathBuf::from("quintic-cache"),
            table_budget: quintic_core::arith::finite::DEFAULT_TABLE_BUDGET,
            precision: Precision::default(),
            embedding_choice: EmbeddingChoice::default(),
            bad_factor: None,
            search_t_grid: DEFAULT_T_GRID.to_vec(),
        }
    }
}

impl Config {
    /// Reads a TOML file (or the defaults) and applies the cache-dir environment variable.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Config> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str::<Config>(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => Config::default(),
        };
        if cfg.version != CONFIG_VERSION {
            bail!("config version {} is not supported (expected {CONFIG_VERSION})", cfg.version);
        }
        if let Some(dir) = std::env::var_os(CACHE_ENV) {
            cfg.cache_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON form, without the cache location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.cache_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn guess(&self) -> BadFactorGuess {
        self.bad_factor.unwrap_or_else(BadFactorGuess::accepted)
    }

    pub fn small_prime_options(&self, slow: bool) -> SmallPrimeOptions {
        if slow {
            SmallPrimeOptions::slow()
        } else {
            SmallPrimeOptions { p4_limit: self.precision.p4_limit }
        }
    }

    pub fn trace_cache(&self) -> PathBuf {
        self.cache_dir.join("traces.csv")
    }

    pub fn count_cache(&self) -> PathBuf {
        self.cache_dir.join("counts.csv")
    }

    fn manifest(&self) -> PathBuf {
        self.cache_dir.join("manifest.json")
    }

    /// Binds the cache directory to this config. A cache written under a different
    /// config hash is refused.
    pub fn check_cache(&self) -> anyhow::Result<()> {
        let path = self.manifest();
        if path.exists() {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let m: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let found = m.get("config_hash").and_then(|v| v.as_str()).unwrap_or("");
            if found != self.hash() {
                return Err(CacheMismatch { path, found: found.to_string(), expected: self.hash() }.into());
            }
            return Ok(());
        }
        std::fs::create_dir_all(&self.cache_dir)
            .with_context(|| format!("creating {}", self.cache_dir.display()))?;
        let m = serde_json::json!({ "config_hash": self.hash(), "config": self });
        std::fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cache at {path} was written under config {found}, current config is {expected}")]
pub struct CacheMismatch {
    pub path: PathBuf,
    pub found: String,
    pub expected: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_hash() {
        let c = Config::default();
        let text = toml::to_string(&c).unwrap();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut d = c.clone();
        d.cache_dir = PathBuf::from("/elsewhere");
        assert_eq!(d.hash(), c.hash());
        d.precision.fe_n_max = 1000;
        assert_ne!(d.hash(), c.hash());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c: Config = toml::from_str("embedding_choice = \"Conjugate\"\n[precision]\nfe_n_max = 500\n").unwrap();
        assert_eq!(c.embedding_choice, EmbeddingChoice::Conjugate);
        assert_eq!(c.precision.fe_n_max, 500);
        assert_eq!(c.precision.guess_n_max, 1000);
        assert!(toml::from_str::<Config>("unknown = 1\n").is_err());
    }

    #[test]
    fn cache_manifest_binds_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = Config { cache_dir: dir.path().to_path_buf(), ..Config::default() };
        c.check_cache().unwrap();
        c.check_cache().unwrap();
        c.precision.fe_n_max = 10;
        let e = c.check_cache().unwrap_err();
        assert!(e.downcast_ref::<CacheMismatch>().is_some());
    }
}
