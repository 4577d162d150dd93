//! End-to-end CLI tests: subcommands, exit-code discipline (0 success,
//! 2 input error, 3 no solution, 4 relator gate, 5 check failure), and
//! byte-identical output under a fixed seed.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fig8.trig.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repvol"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("repvol-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn info_text_summary() {
    let out = run(&["info", fixture().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "tets=2 edges=2 cusps=1 generators=3 relators=2"
    );
}

#[test]
fn info_json_carries_hash_and_counts() {
    let out = run(&["info", fixture().to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["tets"], 2);
    assert_eq!(v["edges"], 2);
    assert_eq!(v["cusps"], 1);
    assert_eq!(v["generators"], 3);
    assert_eq!(v["relators"], 2);
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn malformed_inputs_exit_2_with_named_errors() {
    let good = std::fs::read_to_string(fixture()).unwrap();

    let cases: Vec<(&str, String, &str)> = vec![
        ("syntax", "{ not json".to_string(), "MalformedInput"),
        (
            "zero-tets",
            r#"{"tet_count":0,"cusp_count":1,"gluings":[]}"#.to_string(),
            "MalformedInput",
        ),
        (
            "unglued",
            good.replace(
                r#"{ "tet": 0, "face": 3, "to_tet": 1, "to_face": 2, "perm": [1, 3, 0, 2] }"#,
                "",
            )
            .replace("},\n\n  ]", "}\n  ]")
            .replace("] },\n\n", "] }\n"),
            "", // exact message differs between unglued and malformed list
        ),
        (
            "non-torus-link",
            good.replace("[0, 2, 1, 3]", "[0, 1, 3, 2]"),
            "NonTorusLink",
        ),
        (
            "cusp-count",
            good.replace(r#""cusp_count": 1"#, r#""cusp_count": 2"#)
                .replace(
                    r#""vertex_cusp": [
    [0, 0, 0, 0],
    [0, 0, 0, 0]
  ],"#,
                    "",
                ),
            "CuspCountMismatch",
        ),
        (
            "non-coprime-filling",
            good.replace(r#""filling": [null]"#, r#""filling": [[2, 4]]"#),
            "NonCoprimeFilling",
        ),
    ];
    for (name, contents, needle) in cases {
        let path = write_temp(&format!("{name}.trig.json"), &contents);
        let out = run(&["info", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", stderr(&out));
        if !needle.is_empty() {
            assert!(
                stderr(&out).contains(needle),
                "{name}: stderr was {}",
                stderr(&out)
            );
        }
    }
}

#[test]
fn solve_complete_volume() {
    let out = run(&["solve", fixture().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("volume=2.0298832128"));
}

#[test]
fn solve_filled_volume_in_range() {
    let out = run(&["solve", fixture().to_str().unwrap(), "--fill", "0:5,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("volume=0.9813688289"));
}

#[test]
fn solve_exceptional_slope_exits_3() {
    let out = run(&["solve", fixture().to_str().unwrap(), "--fill", "0:1,0"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn solve_zero_volume_advisory() {
    // the (1,1) filling admits only flat solutions
    let out = run(&[
        "solve",
        fixture().to_str().unwrap(),
        "--fill",
        "0:1,1",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_zero_volume"], true);
}

#[test]
fn scan_output_is_byte_stable() {
    let path = fixture();
    let args = [
        "solve",
        path.to_str().unwrap(),
        "--scan",
        "--restarts",
        "20",
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "scan output must be deterministic");
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let sols = v["solutions"].as_array().unwrap();
    assert!(sols.len() >= 2, "expected complete solution and its mirror");
    // the first (max-volume) entry is the complete structure, the mirror
    // appears with negated volume
    let vols: Vec<f64> = sols.iter().map(|s| s["volume"].as_f64().unwrap()).collect();
    assert!((vols[0] - 2.0298832128).abs() < 1e-8);
    assert!(vols.iter().any(|v| (v + 2.0298832128).abs() < 1e-8));
}

#[test]
fn volume_from_shapes_file() {
    let shapes = write_temp(
        "complete-shapes.json",
        r#"{"shapes": [[0.5, 0.8660254037844387], [0.5, 0.8660254037844387]]}"#,
    );
    let out = run(&[
        "volume",
        fixture().to_str().unwrap(),
        "--shapes",
        shapes.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("total 2.0298832128"));

    let short = write_temp("short-shapes.json", r#"{"shapes": [[0.5, 0.866]]}"#);
    let out = run(&[
        "volume",
        fixture().to_str().unwrap(),
        "--shapes",
        short.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn volume_from_representation_files() {
    // trivial representation: all generators the identity
    let trivial = write_temp(
        "trivial-rep.json",
        r#"{"generators": [
            {"a":[1,0],"b":[0,0],"c":[0,0],"d":[1,0]},
            {"a":[1,0],"b":[0,0],"c":[0,0],"d":[1,0]},
            {"a":[1,0],"b":[0,0],"c":[0,0],"d":[1,0]}]}"#,
    );
    let out = run(&[
        "volume",
        fixture().to_str().unwrap(),
        "--rep",
        trivial.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("total 0.0000000000"));
    assert!(stdout(&out).contains("degenerate"));

    // garbage generators break the relators: relator gate, exit 4
    let broken = write_temp(
        "broken-rep.json",
        r#"{"generators": [
            {"a":[1.3,0.1],"b":[0.2,0],"c":[0,0.5],"d":[1,0]},
            {"a":[1,0],"b":[0.7,0],"c":[0.1,0],"d":[1,0]},
            {"a":[2,0],"b":[0,0],"c":[0,0],"d":[0.5,0]}]}"#,
    );
    let out = run(&[
        "volume",
        fixture().to_str().unwrap(),
        "--rep",
        broken.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("RelatorResidualTooLarge"));
}

#[test]
fn check_battery_passes_and_is_deterministic() {
    let path = fixture();
    let args = [
        "check",
        path.to_str().unwrap(),
        "--fill",
        "0:5,1",
        "--seed",
        "3",
        "--format",
        "json",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "check output must be deterministic");
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "edge-combinatorics",
        "complete-solution-certificate",
        "straightening-round-trip",
        "conjugation-invariance",
        "mirror-antisymmetry",
        "volume-bound",
        "rigidity-certificate",
        "filled-round-trip",
        "fixed-point-independence",
    ] {
        assert!(names.contains(&expected), "missing check {expected}");
    }
}

#[test]
fn check_with_corrupted_representation_exits_5() {
    let broken = write_temp(
        "corrupt-rep.json",
        r#"{"generators": [
            {"a":[1.1,0.2],"b":[0.4,0],"c":[0,0.3],"d":[1,0]},
            {"a":[1,0.1],"b":[0.2,0],"c":[0.3,0],"d":[1,0]},
            {"a":[1.5,0],"b":[0.1,0],"c":[0,0],"d":[0.7,0]}]}"#,
    );
    let out = run(&[
        "check",
        fixture().to_str().unwrap(),
        "--rep",
        broken.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("FAIL rep-relator-gate"), "{text}");
    assert!(text.contains("FAIL rep-rigidity"), "{text}");
}

#[test]
fn missing_file_exits_2() {
    let out = run(&["info", "/nonexistent/path.trig.json"]);
    assert_eq!(out.status.code(), Some(2));
}
