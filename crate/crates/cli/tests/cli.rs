use std::path::Path;
use std::process::{Command, Output};

fn sqrtsieve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqrtsieve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = sqrtsieve(&["farey-count", "--seed", "5", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        let line = String::from_utf8(o.stdout).unwrap();
        assert!(
            line.starts_with("farey-count: ") && line.contains("0 failures"),
            "{line}"
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = sqrtsieve(&["farey-count", "--seed", "6"]);
    assert_ne!(other.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn gauss_verify_small_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.toml",
        "command = \"gauss-verify\"\nseed = 3\n\n[grid]\nc_max = 99\n",
    );
    let o = sqrtsieve(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# schema=1\n# command=gauss-verify seed=3\n"));
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 50);
}

#[test]
fn thm3_sweep_default_has_ratio_column() {
    let o = sqrtsieve(&["thm3-sweep"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let header = text.lines().nth(2).unwrap();
    assert!(header.split(',').any(|c| c == "ratio"), "{header}");
    assert!(String::from_utf8(o.stderr).unwrap().contains("max_ratio="));
}

#[test]
fn json_report_parses() {
    let o = sqrtsieve(&["sieve-sweep", "--format", "json", "--seed", "2"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "sieve-sweep");
    assert_eq!(doc["summary"]["failures"], 0);
    assert!(doc["rows"].as_array().unwrap().len() > 30);
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let syntax = write(
        dir.path(),
        "s.toml",
        "command = \"sqrt-verify\"\n[grid]\nr_max = \"many\"\n",
    );
    let o = sqrtsieve(&["--config", &syntax]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("r_max"), "{err}");

    let semantic = write(
        dir.path(),
        "v.toml",
        "command = \"gauss-verify\"\n\n[grid]\nc_min = 5\nc_max = 3\n",
    );
    let o = sqrtsieve(&["--config", &semantic]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(
        err.contains("v.toml:5") && err.contains("grid.c_max"),
        "{err}"
    );

    let unknown = write(
        dir.path(),
        "u.toml",
        "command = \"farey-count\"\n[grid]\nq_maximum = 4\n",
    );
    assert_eq!(sqrtsieve(&["--config", &unknown]).status.code(), Some(2));
    assert_eq!(sqrtsieve(&[]).status.code(), Some(2));
}

#[test]
fn io_and_size_errors_have_their_own_codes() {
    let o = sqrtsieve(&["--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(3));
    let o = sqrtsieve(&["sqrt-verify", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let big = write(
        dir.path(),
        "big.toml",
        "command = \"sieve-sweep\"\n[grid]\nsquare = [[200, 100000]]\n",
    );
    let o = sqrtsieve(&["--config", &big]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8(o.stderr).unwrap().contains("shrink"));
}
