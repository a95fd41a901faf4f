use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const FIG8: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";
const HOPF: &str = "X(1,3,2,4) X(3,1,4,2)";

fn knotcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotcert")).args(args).output().expect("binary runs")
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let fig8 = file(&dir, "fig8.pd", FIG8);
    let out = knotcert(&["certify", s(&fig8)]);
    assert_eq!(out.status.code(), Some(0));
    let cert = stdout_json(&out);
    assert_eq!(cert["verdict"], "certified_hyperbolic");
    assert!(String::from_utf8_lossy(&out.stderr).contains("2.0298832128"));

    let hopf = file(&dir, "hopf.pd", HOPF);
    let out = knotcert(&["certify", s(&hopf)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonGeometric"));

    let bad = file(&dir, "bad.json", "{ not json");
    assert_eq!(knotcert(&["certify", s(&bad)]).status.code(), Some(1));
    assert_eq!(knotcert(&["certify", "/nonexistent/input"]).status.code(), Some(1));
}

#[test]
fn certify_then_reverify() {
    let dir = TempDir::new().unwrap();
    let fig8 = file(&dir, "fig8.pd", FIG8);
    let cert = dir.path().join("cert.json");
    let system = dir.path().join("system.json");
    let out = knotcert(&["certify", s(&fig8), "--out", s(&cert), "--system", s(&system), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(knotcert(&["reverify", s(&cert), s(&system)]).status.code(), Some(0));

    // a different system no longer matches the boxes
    let mut g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&system).unwrap()).unwrap();
    let c = g["rows"][0]["c"].as_i64().unwrap();
    g["rows"][0]["c"] = (c + 2).into();
    let tampered = file(&dir, "tampered.json", &g.to_string());
    assert_eq!(knotcert(&["reverify", s(&cert), s(&tampered)]).status.code(), Some(2));
}

#[test]
fn parse_mirror_homology() {
    let dir = TempDir::new().unwrap();
    let fig8 = file(&dir, "fig8.pd", FIG8);
    let out = knotcert(&["parse", s(&fig8)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["roles"], serde_json::json!([{"kind": "cusp"}]));

    let filled = file(
        &dir,
        "filled.json",
        &serde_json::json!({
            "pd": [[4,2,5,1],[8,6,1,5],[6,3,7,4],[2,7,3,8]],
            "roles": [{"kind": "filled", "slope": [5, 1]}]
        })
        .to_string(),
    );
    let out = knotcert(&["homology", s(&filled)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["order"], 5);

    let mirrored = dir.path().join("mirror.json");
    assert_eq!(knotcert(&["mirror", s(&filled), "--out", s(&mirrored)]).status.code(), Some(0));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&mirrored).unwrap()).unwrap();
    assert_eq!(m["roles"][0]["slope"], serde_json::json!([-5, 1]));
}

#[test]
fn tangle_commands() {
    let dir = TempDir::new().unwrap();
    let out = knotcert(&["tangle", "rational", "-3", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let t = file(&dir, "t.json", &String::from_utf8(out.stdout).unwrap());
    let out = knotcert(&["tangle", "fraction", s(&t)]);
    assert_eq!(stdout_json(&out), serde_json::json!({ "p": -3, "q": 2 }));
    let out = knotcert(&["tangle", "closure", s(&t)]);
    assert_eq!(out.status.code(), Some(0));
    let out = knotcert(&["tangle", "caps", s(&t), "0,2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn double_of_capped_arcs() {
    let dir = TempDir::new().unwrap();
    // two parallel arcs, each capped against its neighbour by a co-core
    let t = serde_json::json!({
        "pd": [],
        "endpoints": [1, 2, 2, 1],
        "arc_roles": {"1": {"kind": "marked"}}
    });
    let t = file(&dir, "t.json", &t.to_string());
    let capped = dir.path().join("capped.json");
    assert_eq!(knotcert(&["tangle", "caps", s(&t), "0,1", "2,3", "--out", s(&capped)]).status.code(), Some(0));
    let out = knotcert(&["double", s(&capped)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let roles = stdout_json(&out)["roles"].clone();
    let zero = serde_json::json!({"kind": "filled", "slope": [0, 1]});
    assert_eq!(roles.as_array().unwrap().iter().filter(|r| **r == zero).count(), 2);
}

#[test]
fn cover_commands() {
    let dir = TempDir::new().unwrap();
    let circle = |slope: [i64; 2]| {
        serde_json::json!({
            "endpoints": [1, 1],
            "arc_roles": {"1": {"kind": "filled", "slope": slope}},
            "matching": [[1, 1]]
        })
        .to_string()
    };
    let a = file(&dir, "a.json", &circle([1, 2]));
    let out = knotcert(&["cover", s(&a), "--cover"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["roles"], serde_json::json!([{"kind": "filled", "slope": [1, 1]}]));

    let out = knotcert(&["cover", s(&a), "--base"]);
    assert_eq!(stdout_json(&out)["roles"].as_array().unwrap().len(), 2);

    let bad = file(&dir, "bad.json", &circle([2, 3]));
    let out = knotcert(&["cover", s(&bad), "--cover"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("label 1"));

    let twist = serde_json::json!({
        "endpoints": [1, 1],
        "arc_roles": {"1": {"kind": "twist", "slope": [1, -4]}},
        "matching": [[1, 1]],
        "twist_circles": [{"component": 1, "slope": [1, -4]}]
    });
    let t = file(&dir, "twist.json", &twist.to_string());
    let out = knotcert(&["cover", s(&t), "--crosscheck"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["consistent"], true);
}

#[test]
fn triangulate_writes_text() {
    let dir = TempDir::new().unwrap();
    let fig8 = file(&dir, "fig8.pd", FIG8);
    let out = knotcert(&["triangulate", s(&fig8)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("knotcert-triangulation 1"));
}

#[test]
fn grid_command() {
    let dir = TempDir::new().unwrap();
    let spec = |lo: i64, hi: i64| {
        serde_json::json!({
            "link": { "pd": [[4,2,5,1],[8,6,1,5],[6,3,7,4],[2,7,3,8]], "roles": [{"kind": "cusp"}] },
            "slots": [1],
            "slope_form": "integral",
            "n": [lo, hi]
        })
        .to_string()
    };
    let ok = file(&dir, "ok.json", &spec(5, 7));
    let out = knotcert(&["grid", s(&ok), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["certified"], 3);
    let ns: Vec<i64> = report["cells"].as_array().unwrap().iter().map(|c| c["n"].as_i64().unwrap()).collect();
    assert_eq!(ns, vec![5, 6, 7]);

    let mixed = file(&dir, "mixed.json", &spec(3, 5));
    assert_eq!(knotcert(&["grid", s(&mixed)]).status.code(), Some(2));
    let empty = file(&dir, "empty.json", &spec(1, 0));
    assert_eq!(knotcert(&["grid", s(&empty)]).status.code(), Some(1));
}
