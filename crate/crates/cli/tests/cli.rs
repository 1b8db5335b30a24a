use std::path::PathBuf;
use std::process::{Command, Output};

fn pachner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pachner")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON report")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{}-{name}", std::process::id()))
}

#[test]
fn verify_33_at_random_points() {
    let o = pachner(&["verify", "--move", "3-3", "--random", "20", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["passed"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 20);
}

#[test]
fn verify_24_with_random_alpha() {
    let o = pachner(&["verify", "--move", "2-4", "--zeta", "0,1,3,8,17,21", "--alpha-random"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(report(&o)["passed"], true);
}

#[test]
fn verify_3d_moves() {
    for args in [
        &["verify", "--move", "2-3", "--random", "3", "--alpha-random"][..],
        &["verify", "--move", "1-4", "--random", "3", "--seed", "4", "--alpha-random"],
        &["verify", "--move", "2-3-deg4", "--zeta", "1,2,3,5,8"],
        &["verify", "--move", "2-3", "--random", "2", "--alpha", "1234=3,1235=-1/2"],
    ] {
        let o = pachner(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn duplicate_zeta_is_a_usage_error() {
    let o = pachner(&["verify", "--move", "2-3", "--zeta", "1,2,3,3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("same zeta"));
}

#[test]
fn malformed_flags_are_usage_errors() {
    for args in [
        &["verify", "--move", "5-5"][..],
        &["verify", "--move", "2-3", "--zeta", "1,2,3,4"],
        &["verify", "--move", "2-3", "--zeta", "1,2,x,4,5"],
        &["verify", "--move", "2-3-deg4", "--alpha-random"],
        &["verify", "--move", "2-3", "--alpha", "9999=1"],
        &["verify", "--move", "2-3", "--alpha", "1234=1", "--alpha-random"],
        &["lens", "--p", "6", "--q", "3", "--n", "1"],
        &["lens", "--p", "7", "--q", "1", "--n", "7"],
        &["export", "--sample", "klein-bottle"],
    ] {
        assert_eq!(pachner(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn inconsistent_alpha_is_rejected() {
    let o = pachner(&["verify", "--move", "2-3", "--zeta", "1,2,3,4,5", "--alpha", "1245=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not consistent"));
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--move", "1-4", "--random", "2", "--seed", "11", "--alpha-random"];
    assert_eq!(pachner(&args).stdout, pachner(&args).stdout);
}

#[test]
fn lens_values() {
    for (p, q, zeta, expected) in [("7", "1", "1,2,3,4", "153"), ("7", "2", "1,2,3,4", "12"), ("7", "3", "1,2,4,3", "108")] {
        let o = pachner(&["lens", "--p", p, "--q", q, "--n", "1", "--zeta", zeta]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), expected);
    }
}

#[test]
fn tables_csv() {
    let o = pachner(&["tables"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "p,q,n,zeta,value");
    assert_eq!(lines.len(), 19);
    assert!(lines.contains(&"7,1,1,1:2:3:4,153"));
    assert!(lines.contains(&"7,3,3,1:2:4:3,12"));
}

#[test]
fn check_complex_on_lens_file() {
    let path = scratch("lens.json");
    let o = pachner(&["export", "--sample", "lens-7-2", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = pachner(&["check-complex", "--input", path.to_str().unwrap(), "--zeta", "1,2,3,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["inputs"]["cells"], 28);
    assert_eq!(r["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn check_complex_on_4d_cluster() {
    for sample in ["3-3-left", "3-3-right", "2-4-left", "2-4-right"] {
        let path = scratch(&format!("{sample}.json"));
        pachner(&["export", "--sample", sample, "--output", path.to_str().unwrap()]);
        let o = pachner(&["check-complex", "--input", path.to_str().unwrap(), "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{sample}: {}", stderr(&o));
        assert_eq!(report(&o)["inputs"]["dimension"], 4);
    }
}

#[test]
fn broken_gluing_names_the_slot() {
    let text = stdout(&pachner(&["export", "--sample", "lens-7-1-minus-1"]));
    let mut file: serde_json::Value = serde_json::from_str(&text).unwrap();
    let slot = &mut file["gluings"][0][1][1];
    *slot = ((slot.as_u64().unwrap() + 1) % 4).into();
    let path = scratch("broken.json");
    std::fs::write(&path, file.to_string()).unwrap();
    let o = pachner(&["check-complex", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("slot"), "{}", stderr(&o));
}

#[test]
fn unreadable_input_fails() {
    let o = pachner(&["check-complex", "--input", "/nonexistent/tri.json"]);
    assert_eq!(o.status.code(), Some(1));
    let path = scratch("garbage.json");
    std::fs::write(&path, "{\"dimension\": 3").unwrap();
    assert_eq!(pachner(&["check-complex", "--input", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn export_round_trips() {
    let text = stdout(&pachner(&["export", "--sample", "double-cone"]));
    let t = pachner_core::Triangulation::from_json(&text).unwrap();
    assert_eq!(t.to_json().trim(), text.trim());
}
