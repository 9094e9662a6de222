use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn pstar(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pstar"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut full = vec!["--report", "json"];
    full.extend_from_slice(args);
    let (code, out, err) = pstar(&full);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    (code, v)
}

fn check<'a>(report: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name} in {report}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_fixtures_and_mutants() {
    for name in ["FIX-M2.json", "FIX-Q2.json", "FIX-D2.json"] {
        let (code, r) = json(&["validate", p(&fixture(name))]);
        assert_eq!(code, 0, "{r}");
        assert_eq!(r["status"], "pass");
    }
    let (code, r) = json(&["validate", p(&fixture("mutant-q2-associativity.json"))]);
    assert_eq!(code, 1);
    let w = check(&r, "semi_associativity")["witness"].as_str().unwrap().to_string();
    assert!(w.contains("(E12, E22, E22)"), "{w}");
    let (code, _) = json(&["validate", p(&fixture("mutant-d2-wrong-unit.json"))]);
    assert_eq!(code, 1);
}

#[test]
fn cp_check_reports_min_eig() {
    let (code, r) = json(&["cp-check", p(&fixture("identity-lift-M2.json"))]);
    assert_eq!(code, 0);
    assert!(r["values"]["min_eig"].as_f64().unwrap() >= -1e-10);
    let (code, r) = json(&["cp-check", p(&fixture("transpose-lift-M2.json"))]);
    assert_eq!(code, 1);
    assert_eq!(check(&r, "positive")["status"], "pass");
    assert_eq!(check(&r, "completely_positive")["status"], "fail");
    assert!((r["values"]["min_eig"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn dilate_verify_equiv_largest_core() {
    let dir = tempfile::tempdir().unwrap();
    let map = fixture("identity-lift-M2.json");
    let out = dir.path().join("d.json");
    let (code, r) = json(&["dilate", p(&map), "-o", p(&out), "--mode", "full"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["values"]["h_dim"], 2);

    let (code, r) = json(&["verify", p(&map), p(&out)]);
    assert_eq!(code, 0, "{r}");

    let (code, r) = json(&["equiv", p(&out), p(&out), p(&map)]);
    assert_eq!(code, 0, "{r}");

    let dep = fixture("depolarizing-lift-M2.json");
    let dep_out = dir.path().join("dep.json");
    assert_eq!(pstar(&["dilate", p(&dep), "-o", p(&dep_out)]).0, 0);
    let (code, r) = json(&["equiv", p(&out), p(&dep_out)]);
    assert_eq!(code, 1);
    assert!(check(&r, "precondition")["witness"].as_str().unwrap().contains("not unitarily equivalent"));

    let (code, r) = json(&["largest-core", p(&map), p(&out)]);
    assert_eq!(code, 0, "{r}");
}

#[test]
fn dilate_rejects_non_cp_and_thin_core() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let (code, r) = json(&["dilate", p(&fixture("transpose-lift-M2.json")), "-o", p(&out)]);
    assert_eq!(code, 1);
    assert!(check(&r, "precondition")["witness"].as_str().unwrap().contains("not completely positive"));
    assert!(!out.exists());

    let (code, _) = json(&["dilate", p(&fixture("FIX-Q2-phi-id-thin-core.json")), "-o", p(&out)]);
    assert_eq!(code, 1);
}

#[test]
fn core_check_modes() {
    let (code, r) = json(&["core-check", p(&fixture("FIX-Q2-phi-id.json"))]);
    assert_eq!(code, 0, "{r}");
    let (code, r) = json(&["core-check", "--mode", "full", p(&fixture("identity-lift-M2.json"))]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(check(&r, "I3_prime")["status"], "pass");
    let (code, r) = json(&["core-check", p(&fixture("FIX-Q2-phi-id-thin-core.json"))]);
    assert_eq!(code, 1);
    assert_eq!(check(&r, "I4_exact")["status"], "fail");
}

#[test]
fn cone_check_fixtures() {
    let (code, r) = json(&[
        "cone-check",
        p(&fixture("generators-pair.json")),
        p(&fixture("polymatrices-sos-pair.json")),
    ]);
    assert_eq!(code, 0, "{r}");
    let (code, r) = json(&[
        "cone-check",
        p(&fixture("generators-diag.json")),
        p(&fixture("polymatrices-shifted.json")),
    ]);
    assert_eq!(code, 1);
    assert_eq!(check(&r, "falsifier[0]")["status"], "fail");
    let (code, r) = json(&[
        "cone-check",
        p(&fixture("generators-pair.json")),
        p(&fixture("polymatrices-sos.json")),
    ]);
    assert_eq!(code, 2, "{r}");
    assert_eq!(r["status"], "error");
}

#[test]
fn input_errors_exit_two() {
    let (code, r) = json(&["validate", "/nonexistent/algebra.json"]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("i/o"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"labels\": [\"a\"]}").unwrap();
    let (code, r) = json(&["validate", p(&bad)]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("malformed"));

    // a map file passed where an algebra is expected
    let (code, _) = json(&["validate", p(&fixture("identity-lift-M2.json"))]);
    assert_eq!(code, 2);

    let (code, _, _) = pstar(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, _) = pstar(&["--tol-psd", "-1", "validate", p(&fixture("FIX-M2.json"))]);
    assert_eq!(code, 2);
}

#[test]
fn demo_regenerates_the_shipped_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["FIX-M2", "FIX-Q2", "FIX-D2", "CONE"] {
        let (code, r) = json(&["demo", name, "-o", p(dir.path())]);
        assert_eq!(code, 0, "{r}");
        for file in r["values"]["files"].as_array().unwrap() {
            let file = file.as_str().unwrap();
            let fresh = std::fs::read_to_string(dir.path().join(file)).unwrap();
            let shipped = std::fs::read_to_string(fixture(file)).unwrap();
            assert_eq!(fresh, shipped, "{file}");
        }
    }
    assert_eq!(json(&["demo", "NOPE"]).0, 2);
}

#[test]
fn text_and_json_reports_agree_on_status() {
    let map = fixture("transpose-lift-M2.json");
    let (code, text, _) = pstar(&["cp-check", p(&map)]);
    assert_eq!(code, 1);
    assert!(text.contains("FAIL  completely_positive"));
    assert!(text.trim_end().ends_with("status: fail"));
    let (jcode, r) = json(&["cp-check", p(&map)]);
    assert_eq!(jcode, code);
    assert_eq!(r["status"], "fail");
}

#[test]
fn seed_changes_sampled_checks_only() {
    let map = fixture("identity-lift-M2.json");
    let (_, a) = json(&["--seed", "1", "core-check", "--mode", "full", p(&map)]);
    let (_, b) = json(&["--seed", "2", "core-check", "--mode", "full", p(&map)]);
    assert_eq!(a["status"], b["status"]);
    assert_eq!(check(&a, "I4_exact"), check(&b, "I4_exact"));
    assert_eq!(a["policy"]["seed"], 1);
}
