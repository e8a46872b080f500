use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn pinobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinobs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn check_reports_p1_and_unobservable_oracle() {
    let o = pinobs(&["check", fixture("tlgl.bn").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(
        out.contains("P1 violated at") && out.contains("X8"),
        "{out}"
    );
    assert!(out.contains("oracle: unobservable"), "{out}");
}

#[test]
fn chain_decomposes_and_is_observable() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "chain.bn",
        "X1 = X3\nX2 = X1\nX3 = !X2\noutput Y = X2\n",
    );
    let o = pinobs(&["check", &f]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("decomposes") && out.contains("oracle: observable"),
        "{out}"
    );
}

#[test]
fn large_network_skips_oracle_explicitly() {
    let o = pinobs(&["check", fixture("tcell.bn").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("oracle: skipped (2^37 states"));
}

#[test]
fn pinned_output_reparses_and_decomposes() {
    let dir = tempfile::tempdir().unwrap();
    for planner in ["greedy", "cover"] {
        for net in ["tlgl.bn", "tcell.bn"] {
            let out = dir.path().join(format!("{planner}-{net}"));
            let o = pinobs(&[
                "pin",
                fixture(net).to_str().unwrap(),
                "--planner",
                planner,
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&o.stderr)
            );
            let c = pinobs(&["check", "--format", "json", out.to_str().unwrap()]);
            let v: serde_json::Value = serde_json::from_slice(&c.stdout).unwrap();
            assert_eq!(v["decomposes"], true, "{planner} {net}");
            assert_ne!(c.status.code(), Some(2));
        }
    }
}

#[test]
fn pin_json_report_is_deterministic() {
    let f = fixture("tcell.bn");
    let args = ["pin", f.to_str().unwrap(), "--format", "json"];
    let a = pinobs(&args);
    let b = pinobs(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["plan"]["pins"].as_array().unwrap().len(), 13);
    assert_eq!(v["network"]["max_in_degree"], 5);
    assert!(v.get("timings_ms").is_none());
    let t = pinobs(&["pin", f.to_str().unwrap(), "--format", "json", "--timings"]);
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert!(v["timings_ms"]["plan"].is_number());
}

#[test]
fn decomposable_input_needs_no_pins() {
    let dir = tempfile::tempdir().unwrap();
    let text = "X1 = X3\nX2 = X1\nX3 = 1\noutput Y = X2\n";
    let f = write(&dir, "ok.bn", text);
    let out = dir.path().join("pinned.bn");
    let o = pinobs(&["pin", &f, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("network is observable; no pins required"));
    assert_eq!(std::fs::read_to_string(out).unwrap(), text);
}

#[test]
fn graph_is_deterministic_and_overlays_plan() {
    let f = fixture("tlgl.bn");
    let plain = stdout(&pinobs(&["graph", f.to_str().unwrap()]));
    assert_eq!(plain, stdout(&pinobs(&["graph", f.to_str().unwrap()])));
    assert!(plain.starts_with("digraph"));
    assert!(!plain.contains("type 2"));
    let overlay = stdout(&pinobs(&["graph", f.to_str().unwrap(), "--plan", "greedy"]));
    assert!(overlay.contains("type 2") && overlay.contains("type 1"));
}

#[test]
fn oracle_honours_inputs_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "u.bn",
        "input U\nX1 = U & X2\nX2 = X2\noutput Y = X1\n",
    );
    assert_eq!(
        pinobs(&["oracle", &f, "--inputs", "U=0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pinobs(&["oracle", &f, "--inputs", "1"]).status.code(),
        Some(0)
    );
    assert_eq!(
        pinobs(&["oracle", &f, "--oracle-cap", "1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        pinobs(&["oracle", &f, "--inputs", "V=1"]).status.code(),
        Some(1)
    );
}

#[test]
fn parse_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir, "bad.bn", "X1 = X2 &\noutput Y = X1\n");
    let o = pinobs(&["check", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn augment_mode_adds_virtual_copies() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir, "s.bn", "X1 = X2\nX2 = X1 & X2\noutput Y = X1 | X2\n");
    let out = dir.path().join("p.bn");
    let o = pinobs(&[
        "pin",
        &f,
        "--augment",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["network"]["virtual_variables"][0], "Y_v");
    let c = pinobs(&["check", out.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
}

#[test]
fn bench_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinobs(&["bench", dir.path().to_str().unwrap(), "--repeats", "1"]);
    assert_eq!(stdout(&o), "network,n,p,omega,exec,pipeline_ms,oracle_ms\n");
    let o = pinobs(&["bench", "--sizes", "6..7", "--repeats", "1"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5, "{out}");
    assert!(out.contains("synthetic-6,6,2,") && out.contains(",parallel,"));
}
