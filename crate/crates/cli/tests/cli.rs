use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cubelab_cli::{parse_config, run, Kind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cubelab"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_bin(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cubelab")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
kind = "converge2"
grid = [8, 16, 32]
seeds = [1, 2, 3]

[[system]]
type = "bernoulli"
probs = ["1/2", "1/2"]

[[observable]]
type = "symbol"
set = [0]

[[observable]]
type = "symbol"
set = [0]

[[observable]]
type = "symbol"
set = [1]
"#;

/// Record text without the wall-time line.
fn strip_time(s: &str) -> String {
    s.lines()
        .filter(|l| !l.contains("wall_time"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn same_config_same_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let cfg = cfg.to_str().unwrap();
    let a = run_bin(&["run", cfg]);
    let b = run_bin(&["run", cfg, "--threads", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(
        strip_time(&String::from_utf8_lossy(&a.stdout)),
        strip_time(&String::from_utf8_lossy(&b.stdout))
    );
}

#[test]
fn thread_count_does_not_change_rows() {
    let loaded =
        parse_config(&std::fs::read_to_string(configs().join("lemma1.toml")).unwrap()).unwrap();
    let mut small = loaded.clone();
    small.config.trials = Some(12);
    let one = run(&small, 1).unwrap();
    let four = run(&small, 4).unwrap();
    assert_eq!(one.table, four.table);
    assert_eq!(one.config_hash, four.config_hash);
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("r.json");
    let o = run_bin(&[
        "run",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["kind"], "converge2");
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn hash_ignores_key_order_and_comments() {
    let a = parse_config("kind = \"lemma1\"\ngrid = [8]\nseeds = [1]\ntrials = 2\n").unwrap();
    let b =
        parse_config("# x\ntrials = 2\nseeds = [1]\n\ngrid = [8]\nkind = \"lemma1\"\n").unwrap();
    let c = parse_config("kind = \"lemma1\"\ngrid = [8]\nseeds = [1]\ntrials = 3\n").unwrap();
    assert_eq!(a.hash, b.hash);
    assert_ne!(a.hash, c.hash);
}

#[test]
fn failed_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{SMALL}\n[assert]\nfinal_abs = 1e-9\n"),
    );
    let o = run_bin(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL final_modulus"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("kind = \"bogus\"\n", "lemma1"),
        (
            "kind = \"lemma1\"\ngrid = [8]\nseeds = [1]\ntrials = 1\nextra = 3\n",
            "extra",
        ),
        (
            "kind = \"lemma1\"\ngrid = [16, 8]\nseeds = [1]\ntrials = 1\n",
            "grid",
        ),
        ("kind = \"lemma1\"\ngrid = [8]\nseeds = [1]\n", "trials"),
        (
            "kind = \"lemma1\"\ngrid = [99999]\nseeds = [1]\ntrials = 1\n",
            "limit",
        ),
        ("kind = \"converge2\"\ngrid = [8]\nseeds = [1]\n", "system"),
        ("kind = \"lemma1\"\ngrid = [8\n", "line"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.toml"), text);
        let o = run_bin(&["run", cfg.to_str().unwrap()]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(2), "{text}: {err}");
        assert!(err.contains(needle), "{text}: {err}");
    }
    let o = run_bin(&["run", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_kind_lists_all_kinds() {
    let err = parse_config("kind = \"nope\"\n").unwrap_err().to_string();
    for kind in Kind::ALL {
        assert!(err.contains(kind.name()), "{err}");
    }
}

#[test]
fn invalid_system_reports_field() {
    let text = SMALL.replace("probs = [\"1/2\", \"1/2\"]", "probs = [\"1/2\", \"1/3\"]");
    let err = parse_config(&text).unwrap_err().to_string();
    assert!(err.contains("system[0]"), "{err}");
    let text = SMALL.replace("set = [1]", "set = [5]");
    let err = parse_config(&text).unwrap_err().to_string();
    assert!(err.contains("observable[2]"), "{err}");
}

#[test]
fn list_is_stable() {
    let a = run_bin(&["list"]);
    let b = run_bin(&["list"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let names: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(names, Kind::ALL.map(|k| k.name()));
}

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        cubelab_cli::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn finite_cor1_example() {
    let text = "kind = \"cor1\"\ngrid = [100]\n[finite]\npi1 = [1, 2, 3, 0]\npi2 = [1, 0, 3, 2]\nset = [0]\n";
    let rec = run(&parse_config(text).unwrap(), 1).unwrap();
    assert_eq!(rec.table.cell(0, "exact").as_text(), Some("1/32"));
    assert!(rec.passed());
}
