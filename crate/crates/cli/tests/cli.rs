use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ddrab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddrab"))
        .args(args)
        .current_dir(dir)
        .env_remove("RAB_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn written(o: &Output, what: &str) -> PathBuf {
    let s = stdout(o);
    let line = s
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{what}: ")))
        .unwrap_or_else(|| panic!("no {what} line in {s}"));
    PathBuf::from(line)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn dynamics_reaches_the_double_excitation() {
    let dir = tempfile::tempdir().unwrap();
    let o = ddrab(
        &["dynamics", "--preset", "forster-ravets", "--out", "a"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv_path = dir.path().join(written(&o, "csv"));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let peak = column(&csv, "P_double").into_iter().fold(0.0, f64::max);
    assert!(peak >= 0.95, "{peak}");
    assert!(csv.starts_with("t,P_00,P_01,"));
    assert!(!csv.contains('\r'));

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join(written(&o, "metadata"))).unwrap(),
    )
    .unwrap();
    let described: Vec<&str> = meta["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            assert!(c["unit"].is_string());
            c["name"].as_str().unwrap()
        })
        .collect();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(described, header);

    let again = ddrab(
        &[
            "dynamics",
            "--preset",
            "forster-ravets",
            "--out",
            "b",
            "--workers",
            "1",
        ],
        dir.path(),
    );
    let csv2 = std::fs::read(dir.path().join(written(&again, "csv"))).unwrap();
    assert_eq!(csv.as_bytes(), &csv2[..]);
    assert_eq!(csv_path.file_name(), written(&again, "csv").file_name());
}

#[test]
fn effective_check_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = ddrab(
        &[
            "effective-check",
            "--preset",
            "spin-exchange-barredo",
            "--out",
            ".",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let s = stdout(&o);
    let line = s.lines().find(|l| l.starts_with("max deviation:")).unwrap();
    let abs: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(abs < 1e-10, "{line}");
}

#[test]
fn malformed_unit_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "preset = \"forster-ravets\"\n\n[interaction]\ndistance = \"3 parsecs\"\n",
    )
    .unwrap();
    let o = ddrab(&["dynamics", "-c", "run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.toml:4:12:"), "{err}");
    assert!(!dir.path().join("out").exists());

    std::fs::write(dir.path().join("k.toml"), "[gate]\nthetaa = \"1 pi\"\n").unwrap();
    assert_eq!(
        ddrab(&["gate", "-c", "k.toml"], dir.path()).status.code(),
        Some(2)
    );
    std::fs::write(dir.path().join("n.toml"), "[drive]\nrabi = 5.0\n").unwrap();
    assert_eq!(
        ddrab(&["gate", "-c", "n.toml"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn violated_tolerance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("t.toml"),
        "[tolerances]\nclosed_form = 1e-30\n",
    )
    .unwrap();
    let o = ddrab(
        &["effective-check", "-c", "t.toml", "--out", "."],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(dir.path().join(written(&o, "csv")).exists());
}

#[test]
fn preset_dump_is_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = ddrab(&["preset", "show", "collective-gorniaczyk"], dir.path());
    std::fs::write(dir.path().join("p.toml"), &o.stdout).unwrap();
    let chk = ddrab(&["effective-check", "-c", "p.toml"], dir.path());
    assert!(
        chk.status.success(),
        "{}",
        String::from_utf8_lossy(&chk.stderr)
    );
    assert_eq!(
        ddrab(&["preset", "show", "nope"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ddrab"))
        .args(["crossover", "--plot"])
        .current_dir(dir.path())
        .env("RAB_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = written(&o, "csv");
    assert!(csv.starts_with("from-env"));
    assert!(dir.path().join(written(&o, "plot script")).exists());
    let r = column(
        &std::fs::read_to_string(dir.path().join(csv)).unwrap(),
        "r_c",
    );
    assert!(r.windows(2).all(|w| w[1] < w[0]));
}
