//! End-to-end tests of the binary: document parsing, exit codes, output
//! plumbing, and point-evaluation mode.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freebias"))
}

fn work_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("freebias-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_doc(name: &str, contents: &str) -> PathBuf {
    let path = work_dir().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Parse the point-mode output line "RE{+-}IMi" (both parts in {:e} form).
fn parse_point(line: &str) -> (f64, f64) {
    let s = line.trim().strip_suffix('i').unwrap();
    let bytes = s.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'e' {
            split = Some(i);
            break;
        }
    }
    let i = split.unwrap();
    (s[..i].parse().unwrap(), s[i..].parse().unwrap())
}

#[test]
fn density_writes_csv_and_json_deterministically() {
    let doc = write_doc("sc.json", r#"{"type":"semicircle","mean":0.0,"variance":1.0}"#);
    let base = work_dir().join("sc_out");
    let run = || {
        let out = bin()
            .args(["density"])
            .arg(&doc)
            .args(["--grid", "257", "--eps", "1e-2,5e-3", "--out"])
            .arg(&base)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(base.with_extension("csv")).unwrap()
    };
    let csv1 = run();
    let csv2 = run();
    assert_eq!(csv1, csv2, "CSV output must be byte-stable across runs");
    let text = String::from_utf8(csv1).unwrap();
    assert!(text.starts_with("x,rho,eps\n"));
    assert_eq!(text.lines().count(), 258);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
            .unwrap();
    let mass = report["summary"]["mass"].as_f64().unwrap();
    assert!((mass - 1.0).abs() < 1e-2, "semicircle mass came out {mass}");
}

#[test]
fn malformed_document_exits_2() {
    let doc = write_doc("broken.json", "{ not json");
    let out = bin().args(["density"]).arg(&doc).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_field_exits_2() {
    let doc = write_doc(
        "extra.json",
        r#"{"type":"semicircle","mean":0.0,"variance":1.0,"skew":3.0}"#,
    );
    let out = bin().args(["density"]).arg(&doc).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    let out = bin().args(["density", "/no/such/doc.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn transform_chain_echoes_atoms() {
    let doc = write_doc("rad.json", r#"{"type":"atomic","atoms":[[-1.0,0.5],[1.0,0.5]]}"#);
    let out = bin()
        .args(["transform"])
        .arg(&doc)
        .args(["square_bias", "--format", "json", "--grid", "129", "--eps", "1e-2,5e-3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["steps"], serde_json::json!(["square_bias"]));
    // square bias fixes the Rademacher law, so the atoms echo unchanged
    let atoms = report["output"]["measure"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    assert_eq!(atoms[0][0].as_f64().unwrap(), -1.0);
    assert_eq!(atoms[0][1].as_f64().unwrap(), 0.5);
}

#[test]
fn el_gordo_of_point_mass_evaluates_to_reciprocal() {
    // delta_0 is fixed by el gordo, so the value at z is just 1/z
    let doc = write_doc("delta.json", r#"{"type":"atomic","atoms":[[0.0,1.0]]}"#);
    let out = bin()
        .args(["transform"])
        .arg(&doc)
        .args(["el_gordo", "--z", "0+2i"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (re, im) = parse_point(&stdout_of(&out));
    assert!(re.abs() < 1e-12 && (im + 0.5).abs() < 1e-12, "got {re}+{im}i");
}

#[test]
fn infdiv_point_mode_matches_semicircle() {
    // triple (0, 1, delta_0) is the standard semicircle
    let doc = write_doc(
        "triple.json",
        r#"{"mean":0.0,"variance":1.0,"levy":{"type":"atomic","atoms":[[0.0,1.0]]}}"#,
    );
    let out = bin()
        .args(["infdiv"])
        .arg(&doc)
        .args(["--z", "0+2i"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (re, im) = parse_point(&stdout_of(&out));
    let want = 1.0 - 2.0_f64.sqrt(); // (z - sqrt(z^2-4))/2 at z = 2i
    assert!(re.abs() < 1e-9 && (im - want).abs() < 1e-9, "got {re}+{im}i");
}

#[test]
fn zero_variance_free_zero_bias_exits_4() {
    let doc = write_doc("delta1.json", r#"{"type":"atomic","atoms":[[1.0,1.0]]}"#);
    let out = bin()
        .args(["transform"])
        .arg(&doc)
        .args(["free_zero_bias"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_fixed_point_suite_passes() {
    let out = bin().args(["verify", "fixed_point"]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["suite"], "fixed_point");
    assert_eq!(report["pass"], true);
}

#[test]
fn verify_unknown_suite_exits_2() {
    let out = bin().args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
