use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphmom"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn graphmom")
}

fn moment(v: &Value, exp: &[u64]) -> Option<f64> {
    v["moments"]
        .as_array()?
        .iter()
        .find(|e| e["exp"] == serde_json::json!(exp))
        .and_then(|e| e["value"].as_f64())
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn step_moments_file() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = specs().join("step.json");
    let o = run(&["moments", "--spec", spec.to_str().unwrap()], tmp.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("moments.json")).unwrap())
            .unwrap();
    assert!((moment(&v, &[0, 1]).unwrap() - 0.5).abs() < 1e-12);
    // cap defaults to twice the top order of the spec
    assert_eq!(v["degree_cap"].as_u64(), Some(16));
}

#[test]
fn empty_indicator_is_all_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        "empty.json",
        r#"{"schema":1,"moments":{"indicator":{"intervals":[],"degree_cap":4}}}"#,
    );
    let o = run(&["moments", "--spec", spec.to_str().unwrap()], tmp.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("moments.json")).unwrap())
            .unwrap();
    let entries = v["moments"].as_array().unwrap();
    // graph-linear support: d_y <= 1, total degree <= 4
    assert_eq!(entries.len(), 9);
    for e in entries {
        let dx = e["exp"][0].as_u64().unwrap();
        let dy = e["exp"][1].as_u64().unwrap();
        let want = if dy == 0 {
            1.0 / (dx as f64 + 1.0)
        } else {
            0.0
        };
        assert!((e["value"].as_f64().unwrap() - want).abs() < 1e-12, "{e}");
    }
}

#[test]
fn convex_transport_marginal_and_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = specs().join("convex_ot.json");
    let o = run(
        &[
            "moments",
            "--spec",
            spec.to_str().unwrap(),
            "--order",
            "1..2",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("moments.json")).unwrap())
            .unwrap();
    // normalized u = (x + 1) / 2, so E[x] = -1/3 becomes E[u] = 1/3
    let mean_u = moment(&v, &[1, 0]).unwrap();
    assert!((mean_u - 1.0 / 3.0).abs() < 1e-12);
    assert!((2.0 * mean_u - 1.0 + 1.0 / 3.0).abs() < 1e-12);

    let o = run(
        &[
            "transport",
            "--spec",
            spec.to_str().unwrap(),
            "--order",
            "1..3",
        ],
        tmp.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(tmp.path().join("bounds.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "r,lower_bound");
    assert_eq!(lines.len(), 4);
    let b1: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((b1 - 0.22222).abs() < 5e-4);
}

#[test]
fn single_order_range_gives_one_record() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = specs().join("step.json");
    let o = run(
        &[
            "complete",
            "--spec",
            spec.to_str().unwrap(),
            "--order",
            "3..3",
        ],
        tmp.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("hierarchy.json")).unwrap())
            .unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["r"].as_u64(), Some(3));
    let csv = std::fs::read_to_string(tmp.path().join("hierarchy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn complete_then_reconstruct() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = specs().join("step.json");
    let s = spec.to_str().unwrap();
    assert_eq!(
        run(&["complete", "--spec", s, "--order", "4..6"], tmp.path())
            .status
            .code(),
        Some(0)
    );
    let o = run(&["reconstruct", "--spec", s, "--order", "4..6"], tmp.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(tmp.path().join("graph.csv")).unwrap();
    assert!(csv.starts_with("x,f_r\n"));
    assert_eq!(csv.lines().count(), 502);
    assert!(tmp.path().join("graph.svg").exists());
    assert!(tmp.path().join("graph_levelset.csv").exists());
    // order 7 was never completed
    let o = run(&["reconstruct", "--spec", s, "--order", "7"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exact_constant_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = specs().join("constant_exact.json");
    let o = run(
        &["reconstruct", "--spec", spec.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("graph.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let y: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((y - 0.5).abs() <= 2e-3, "{line}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["demo", "bogus"], tmp.path()).status.code(), Some(2));
    assert_eq!(
        run(
            &["complete", "--spec", "/definitely/missing.json"],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
    let bad = write_spec(
        tmp.path(),
        "bad.json",
        r#"{"schema":7,"moments":{"function":{"builtin":"step"}}}"#,
    );
    assert_eq!(
        run(
            &[
                "complete",
                "--spec",
                bad.to_str().unwrap(),
                "--order",
                "2..3"
            ],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
    let unknown = write_spec(
        tmp.path(),
        "u.json",
        r#"{"schema":1,"moments":{"function":{"builtin":"step"}},"bogus":1}"#,
    );
    assert_eq!(
        run(
            &["moments", "--spec", unknown.to_str().unwrap()],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
    let s = specs().join("step.json");
    assert_eq!(
        run(
            &["complete", "--spec", s.to_str().unwrap(), "--order", "5..2"],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
    // no order range anywhere
    let noorder = write_spec(
        tmp.path(),
        "n.json",
        r#"{"schema":1,"moments":{"function":{"builtin":"step"}}}"#,
    );
    assert_eq!(
        run(
            &["complete", "--spec", noorder.to_str().unwrap()],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn unreachable_tolerance_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let s = specs().join("x_squared.json");
    let o = run(
        &[
            "complete",
            "--spec",
            s.to_str().unwrap(),
            "--order",
            "3",
            "--tol",
            "1e-30",
        ],
        tmp.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    // results are still written
    assert!(tmp.path().join("hierarchy.json").exists());
}

fn demo_bytes(name: &str, files: &[&str]) -> Vec<Vec<u8>> {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["demo", name], tmp.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let dir = tmp.path().join(name);
    assert!(dir.join("timing.json").exists());
    files
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn convex_demo_is_deterministic() {
    let files = ["bounds.csv", "graph_r2.csv", "summary.json"];
    assert_eq!(
        demo_bytes("convex-ot", &files),
        demo_bytes("convex-ot", &files)
    );
}

#[test]
fn lmoment_demo_is_deterministic() {
    let files = ["graph_r10.csv", "slices_q10.csv", "summary.json"];
    assert_eq!(demo_bytes("lmoment", &files), demo_bytes("lmoment", &files));
}

#[test]
fn negative_function_is_shifted_and_mapped_back() {
    let tmp = tempfile::tempdir().unwrap();
    // f(x) = x - 1/2 takes negative values
    let spec = write_spec(
        tmp.path(),
        "neg.json",
        r#"{"schema":1,
            "moments":{"function":{"piecewise":{"breakpoints":[0.0,1.0],
                "pieces":[{"kind":"polynomial","coeffs":[-0.5,1.0]}],"gamma":1.0},
                "shift_negative":true}},
            "cd":{"order":8,"exact":true,"x_points":101}}"#,
    );
    let o = run(
        &["reconstruct", "--spec", spec.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(tmp.path().join("graph.csv")).unwrap();
    let mut worst: f64 = 0.0;
    for line in csv.lines().skip(1) {
        let mut it = line.split(',').map(|t| t.parse::<f64>().unwrap());
        let (x, y) = (it.next().unwrap(), it.next().unwrap());
        worst = worst.max((y - (x - 0.5)).abs());
    }
    assert!(worst < 0.02, "{worst}");

    let unshifted = write_spec(
        tmp.path(),
        "neg2.json",
        r#"{"schema":1,
            "moments":{"function":{"piecewise":{"breakpoints":[0.0,1.0],
                "pieces":[{"kind":"polynomial","coeffs":[-0.5,1.0]}],"gamma":1.0}}},
            "cd":{"order":4,"exact":true}}"#,
    );
    let o = run(
        &["reconstruct", "--spec", unshifted.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degree_cap_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = specs().join("step.json");
    let o = run(
        &[
            "moments",
            "--spec",
            spec.to_str().unwrap(),
            "--degree-cap",
            "6",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("moments.json")).unwrap())
            .unwrap();
    assert_eq!(v["degree_cap"].as_u64(), Some(6));
    // d_y <= 1 up to total degree 6: 7 + 6 entries
    assert_eq!(v["moments"].as_array().unwrap().len(), 13);
}
