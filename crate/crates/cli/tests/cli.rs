use std::path::Path;
use std::process::{Command, Output};

fn quintic(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quintic"))
        .args(args)
        .env("QUINTIC_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn quick_verify_then_corrupted_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = quintic(dir.path(), &["verify", "--level", "quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all 7 checks passed"));

    let path = dir.path().join("traces.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\n11,-116,1444\n"));
    std::fs::write(&path, text.replace("\n11,-116,", "\n11,-117,")).unwrap();
    let o = quintic(dir.path(), &["verify", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["failures"], serde_json::json!(["trace-table"]));
    let check = v["result"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "trace-table").unwrap();
    assert_eq!(check["offending"], serde_json::json!([11]));

    // a wrong value that passes the row validation is caught by the comparison
    std::fs::write(&path, text.replace("\n11,-116,", "\n11,-118,")).unwrap();
    let o = quintic(dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL trace-table: p=11"), "{}", stdout(&o));
}

#[test]
fn config_hash_mismatch_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[precision]\nfe_n_max = 100\n").unwrap();
    let cache = dir.path().join("cache");
    let o = quintic(&cache, &["count", "--q", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let o = quintic(&cache, &["--config", cfg.to_str().unwrap(), "count", "--q", "7"]);
    assert_eq!(o.status.code(), Some(1));
    let o = quintic(&cache, &["--config", cfg.to_str().unwrap(), "verify", "--frobenius", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL cache-manifest"));
}

#[test]
fn outputs_embed_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let o = quintic(dir.path(), &["count", "--q", "13"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let hash = v["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 16);
    assert_eq!(v["result"]["resolved_total"], 13u64.pow(3) + 169 + 13 + 1);
    let o = quintic(dir.path(), &["theta", "--what", "ideals", "--xis", "1,5"]);
    assert!(stdout(&o).starts_with(&format!("# config {hash}\nideal,1,5\nI1,2,10\n")));
    let o = quintic(dir.path(), &["order-invariants"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config_hash"], hash.as_str());
    assert_eq!(v["result"]["t"], 3);
}

#[test]
fn export_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["traces", "hodge"] {
        let (a, b) = (dir.path().join(format!("a-{kind}")), dir.path().join(format!("b-{kind}")));
        // separate caches, so the second run does not just copy the first
        let o = quintic(&dir.path().join("c1"), &["export", "--kind", kind, "--out", a.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let o = quintic(&dir.path().join("c2"), &["export", "--kind", kind, "--out", b.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        for f in std::fs::read_dir(&a).unwrap() {
            let f = f.unwrap().path();
            let name = f.file_name().unwrap();
            assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(b.join(name)).unwrap(), "{kind}");
        }
    }
    let traces = std::fs::read_to_string(dir.path().join("a-traces/traces.csv")).unwrap();
    assert!(traces.contains("\np,a_p,a_p2\n7,0,-140\n11,-116,1444\n"));
    assert!(traces.contains("\n41,-316,-51516\n"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = quintic(dir.path(), &["bench", "--q", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad reduction"));
    assert_eq!(quintic(dir.path(), &["count", "--q", "10"]).status.code(), Some(2));
    assert_eq!(quintic(dir.path(), &["brandt", "--xi", "3+"]).status.code(), Some(2));
    assert_eq!(quintic(dir.path(), &["brandt", "--xi", "-1+2w"]).status.code(), Some(2));
    assert_eq!(quintic(dir.path(), &["lfactor"]).status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 7\n").unwrap();
    assert_eq!(quintic(dir.path(), &["--config", bad.to_str().unwrap(), "hodge"]).status.code(), Some(2));
}

#[test]
fn bench_reports_speedup() {
    let dir = tempfile::tempdir().unwrap();
    let o = quintic(dir.path(), &["bench", "--q", "101"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v["result"]["rows"][0];
    assert_eq!(row["q"], 101);
    assert_eq!(row["points"], 10201);
    assert!(row["speedup"].as_f64().unwrap() > 0.0);
    assert!(v["result"]["threads"].as_u64().unwrap() >= 1);
}
