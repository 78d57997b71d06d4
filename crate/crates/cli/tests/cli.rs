use std::fs;
use std::process::Command;

fn hetnet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hetnet"))
}

const SMALL: &str = "\
[network]
seed = 3
superframe_len = 20

[simulation]
superframes = 2
";

#[test]
fn run_writes_metrics_users_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(&config, SMALL).unwrap();
    let out = dir.path().join("out");
    let status = hetnet()
        .args(["run", "--algorithm", "baseline1", "--trace", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let metrics = fs::read_to_string(out.join("metrics.jsonl")).unwrap();
    assert!(metrics.lines().next().unwrap().contains("\"record\":\"header\""));
    assert!(fs::read_to_string(out.join("users.tsv")).unwrap().starts_with("user\t"));
    assert!(fs::read_to_string(out.join("trace.tsv")).unwrap().starts_with("subframe\t"));
}

#[test]
fn missing_config_is_reported() {
    let out = hetnet().args(["run"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[simulation]\nsuperframez = 3\n").unwrap();
    let out = hetnet().arg("run").arg("--config").arg(&config).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn fixtures_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let status = hetnet().arg("fixtures").arg("--out").arg(dir.path()).status().unwrap();
    assert!(status.success());
    assert!(fs::read_to_string(dir.path().join("fig2.topo")).unwrap().contains("bs 3 pico"));
    assert!(dir.path().join("fig4.topo").exists());
}

#[test]
fn compare_prints_one_row_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out = hetnet()
        .args(["compare", "--seed", "7", "--subframes", "400", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = table.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names, ["proposed", "baseline1", "baseline2"]);
    assert!(dir.path().join("compare.tsv").exists());
    assert!(dir.path().join("baseline2_metrics.jsonl").exists());
}

#[test]
fn bundled_configs_load() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["default.toml", "poisson.toml"] {
        let dir = tempfile::tempdir().unwrap();
        let out = hetnet()
            .args(["run", "--algorithm", "baseline1", "--subframes", "200", "--config"])
            .arg(root.join(name))
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
