use std::fs;
use std::path::Path;
use std::process::Command;

fn g2l(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_g2l"))
        .args(args)
        .env_remove("G2L_THREADS")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_small_sources(dir: &Path) {
    fs::write(dir.join("a.csv"), "id,x,y\na1,0,0\na2,0.2,0\n").unwrap();
    fs::write(dir.join("b.csv"), "id,x,y\nb1,5,0\nb2,5,0.2\n").unwrap();
    fs::write(dir.join("c.csv"), "id,x,y\nc1,0,5\nc2,0.2,5\n").unwrap();
    fs::write(
        dir.join("targets.csv"),
        "id,x,y\nt1,0.1,0.1\nt2,4.9,0.3\nt3,0.2,4.8\n",
    )
    .unwrap();
}

fn aggregate(dir: &Path) {
    let out = g2l(&[
        "aggregate",
        "--source",
        &format!("a={}", s(&dir.join("a.csv"))),
        "--source",
        &format!("b={}", s(&dir.join("b.csv"))),
        "--source",
        &format!("c={}", s(&dir.join("c.csv"))),
        "-o",
        s(&dir.join("anchors.json")),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn label_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    write_small_sources(dir.path());
    aggregate(dir.path());
    assert!(dir.path().join("anchors.json.config.json").exists());

    let out_path = dir.path().join("labels.jsonl");
    let out = g2l(&[
        "label",
        "--anchors",
        s(&dir.path().join("anchors.json")),
        "--targets",
        s(&dir.path().join("targets.csv")),
        "--policy",
        "c",
        "-o",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = fs::read_to_string(&out_path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let nearest: Vec<&str> = lines
        .iter()
        .map(|l| l["names"][0].as_str().unwrap())
        .collect();
    assert_eq!(nearest, ["a", "b", "c"]);
    assert_eq!(lines[1]["id"], "t2");
    assert_eq!(lines[1]["policy"], "c");

    let config: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("labels.jsonl.config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(config["command"]["subcommand"], "label");
    assert_eq!(config["command"]["policy"], "c");
}

#[test]
fn usage_errors_exit_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    write_small_sources(dir.path());
    aggregate(dir.path());
    let out_path = dir.path().join("labels.jsonl");
    let out = g2l(&[
        "label",
        "--anchors",
        s(&dir.path().join("anchors.json")),
        "--targets",
        s(&dir.path().join("targets.csv")),
        "--policy",
        "cx",
        "-o",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 2"));
    assert!(!out_path.exists());

    let dup = g2l(&[
        "aggregate",
        "--source",
        &format!("a={}", s(&dir.path().join("a.csv"))),
        "--source",
        &format!("a={}", s(&dir.path().join("b.csv"))),
        "-o",
        s(&dir.path().join("dup.json")),
    ]);
    assert_eq!(dup.status.code(), Some(1));
    assert!(!dir.path().join("dup.json").exists());

    assert_eq!(g2l(&["count", "--bogus"]).status.code(), Some(1));
    assert_eq!(g2l(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_small_sources(dir.path());
    aggregate(dir.path());
    fs::write(dir.path().join("ragged.csv"), "id,x,y\nr1,1,2\nr2,1\n").unwrap();
    let out_path = dir.path().join("labels.jsonl");
    let out = g2l(&[
        "label",
        "--anchors",
        s(&dir.path().join("anchors.json")),
        "--targets",
        s(&dir.path().join("ragged.csv")),
        "--policy",
        "c",
        "-o",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
    assert!(!out_path.exists());

    // three anchors cannot fill a length-4 label
    let out = g2l(&[
        "label",
        "--anchors",
        s(&dir.path().join("anchors.json")),
        "--targets",
        s(&dir.path().join("targets.csv")),
        "--policy",
        "CC",
        "-o",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
}

#[test]
fn item_failures_exit_3_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    write_small_sources(dir.path());
    fs::write(
        dir.path().join("anchors.json"),
        r#"{"metric":"sqrt_js","representatives":[
            {"source":"a","rep_index":0,"qualified_name":"a","v":[1.0,0.0]},
            {"source":"b","rep_index":0,"qualified_name":"b","v":[0.0,1.0]}]}"#,
    )
    .unwrap();
    fs::write(dir.path().join("t.csv"), "id,x,y\nok,1,1\nbad,0,0\n").unwrap();
    let out_path = dir.path().join("labels.jsonl");
    let out = g2l(&[
        "label",
        "--anchors",
        s(&dir.path().join("anchors.json")),
        "--targets",
        s(&dir.path().join("t.csv")),
        "--policy",
        "f",
        "-o",
        s(&out_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(fs::read_to_string(&out_path).unwrap().lines().count(), 1);
    let errors = fs::read_to_string(dir.path().join("labels.jsonl.errors.jsonl")).unwrap();
    let err: serde_json::Value = serde_json::from_str(errors.lines().next().unwrap()).unwrap();
    assert_eq!(err["id"], "bad");
    assert_eq!(err["index"], 1);
}

#[test]
fn sweep_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    write_small_sources(dir.path());
    aggregate(dir.path());
    let prefix = dir.path().join("sw");
    let out = Command::new(env!("CARGO_BIN_EXE_g2l"))
        .args([
            "sweep",
            "--anchors",
            s(&dir.path().join("anchors.json")),
            "--targets",
            s(&dir.path().join("targets.csv")),
            "--d",
            "1",
            "-o",
            s(&prefix),
        ])
        .env("G2L_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for ext in ["csv", "policies.csv", "pgm", "counts.csv", "config.json"] {
        assert!(dir.path().join(format!("sw.{ext}")).exists(), "{ext}");
    }
    let grid = fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    assert_eq!(grid.lines().count(), 2);
    let config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sw.config.json")).unwrap())
            .unwrap();
    assert_eq!(config["threads"], 2);
}

#[test]
fn count_prints_table() {
    let out = g2l(&["count", "--dmax", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("d,length,count\n"));
    assert!(text.contains("2,3,8\n"));
    assert!(text.contains("2,total,16\n"));
}

#[test]
fn divergence_of_a_file_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_small_sources(dir.path());
    fs::write(dir.path().join("p.csv"), "id,x,y\np1,1,2\np2,3,1\n").unwrap();
    let p = dir.path().join("p.csv");
    let out = g2l(&["divergence", s(&p), s(&p)]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["divergence"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn synth_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"[{"name":"p","center":[5,5,5],"sigma":1,"count":4},
            {"name":"q","center":[9,9,9],"sigma":1,"count":3}]"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = g2l(&[
        "synth",
        "--spec",
        s(&spec),
        "--dim",
        "3",
        "--format",
        "jsonl",
        "--out-dir",
        s(&out_dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let combined = fs::read_to_string(out_dir.join("combined.jsonl")).unwrap();
    assert_eq!(combined.lines().count(), 7);
    assert!(out_dir.join("p.jsonl").exists());
    assert!(out_dir.join("synth.config.json").exists());
}

#[test]
fn divergence_units() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.csv"), "id,x,y\np1,3,1\n").unwrap();
    fs::write(dir.path().join("q.csv"), "id,x,y\nq1,1,1\n").unwrap();
    let (p, q) = (dir.path().join("p.csv"), dir.path().join("q.csv"));
    let value = |unit: &str| {
        let out = g2l(&["divergence", s(&p), s(&q), "--unit", unit]);
        assert!(out.status.success());
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        report["divergence"].as_f64().unwrap()
    };
    // KL((3/4, 1/4) || (1/2, 1/2)) = 3/4 log2 3 - 1 bits
    let bits = value("bits");
    assert!((bits - (0.75 * 3f64.log2() - 1.0)).abs() < 1e-9, "{bits}");
    assert!((value("nats") - bits * std::f64::consts::LN_2).abs() < 1e-12);
}
