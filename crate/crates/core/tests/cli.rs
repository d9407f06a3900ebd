use std::fs;
use std::path::Path;

use hmn::cli::run;

fn hmn(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["hmn"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_builtin_nonseparated() {
    let (code, out, _) = hmn(&["check", "builtin:ex32"]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict: nonseparated"), "{out}");
}

#[test]
fn check_separated_and_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let sep = write(
        dir.path(),
        "sep.toml",
        "shape = { m = 1, n = 1 }\n[[sets.S]]\na = \"2\"\nb = [\"0\"]\n[[sets.S]]\na = \"3\"\nb = [\"1\"]\n",
    );
    let (code, out, _) = hmn(&["check", &sep]);
    assert_eq!(code, 2);
    assert!(out.contains("witness: type-i"), "{out}");

    let bad = write(dir.path(), "bad.toml", "shape = { m = 1, n = 1 }\n[[sets.S]]\na = \"1//2\"\nb = [\"0\"]\n");
    let (code, _, err) = hmn(&["check", &bad]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");

    let (code, _, _) = hmn(&["check", "/nonexistent/file.toml"]);
    assert_eq!(code, 1);
    let (code, _, _) = hmn(&["check"]);
    assert_eq!(code, 1);
}

#[test]
fn structured_check() {
    let (code, out, _) = hmn(&["--format", "structured", "check", "builtin:ex33"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "check");
    assert_eq!(v["verdict"], "nonseparated");
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["hull_weights"]["type_ii"].as_array().unwrap().len(), 4);
}

#[test]
fn limit_trace() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "lim.toml",
        "shape = { m = 1, n = 1 }\n[elements.z0]\na = \"1/2\"\nb = [\"1\"]\n[elements.z]\na = \"2\"\nb = [\"1\"]\n",
    );
    let trace = dir.path().join("trace.csv").to_string_lossy().into_owned();
    let (code, out, _) = hmn(&["limit", &doc, "--z0", "z0", "--z", "z", "--tol", "1e-6", "--out", &trace]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("target: (1; [3])"), "{out}");
    let achieved: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("achieved distance: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(achieved <= 1e-6);
    let csv = fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("t,a_mult,b1,distance\n"));
    assert!(csv.lines().count() > 2);

    let (code, _, err) = hmn(&["limit", &doc, "--z0", "z", "--z", "z0"]);
    assert_eq!(code, 1);
    assert!(err.contains("z0 requires a_mult < 1"), "{err}");
}

#[test]
fn limit_with_separated_projection() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "lim.toml",
        "shape = { m = 2, n = 1 }\n[elements.z0]\nv = [\"1\"]\na = \"1/2\"\nb = [\"1\"]\n[elements.z]\nv = [\"1\"]\na = \"2\"\nb = [\"1\"]\n",
    );
    let (code, _, err) = hmn(&["limit", &doc, "--z0", "z0", "--z", "z"]);
    assert_eq!(code, 1);
    assert!(err.contains("separated"), "{err}");
}

#[test]
fn kronecker_values() {
    let (code, out, _) = hmn(&["kronecker", "--values", "1,sqrt2", "--max-t", "10000"]);
    assert_eq!(code, 0);
    assert!(out.contains("dense: true"), "{out}");
    let (code, out, _) = hmn(&["kronecker", "--values", "2/3", "--max-t", "1000"]);
    assert_eq!(code, 2);
    assert!(out.contains("dense: false"), "{out}");
}

#[test]
fn kronecker_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "v.toml",
        "shape = { m = 1, n = 1 }\n[vectors]\nT = [[\"1\", \"0\"], [\"0\", \"1\"], [\"-sqrt2\", \"-sqrt3\"]]\n",
    );
    let (code, out, _) = hmn(&["kronecker", &doc]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("dense: true"));
}

#[test]
fn generators_round_trip_through_documents() {
    let (code, out, _) = hmn(&["generators", "--group", "gn", "--n", "2", "--mode", "semigroup"]);
    assert_eq!(code, 0);
    assert!(out.contains("minimal count: 4"), "{out}");
    assert!(out.contains("verified: nonseparated"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.toml").to_string_lossy().into_owned();
    let (code, _, _) = hmn(&["generators", "--group", "hmn", "--m", "3", "--n", "2", "--mode", "group", "--out", &path]);
    assert_eq!(code, 0);
    let (code, out, _) = hmn(&["check", &path, "--set", "S_with_inverses"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn examples_report() {
    let (code, out, _) = hmn(&["examples", "ex33", "--max-length", "8"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("result: pass"));
    assert!(out.contains("predicate fails (not in S)"));
    let (code, _, _) = hmn(&["examples", "ex99"]);
    assert_eq!(code, 1);
    let (code, _, _) = hmn(&["examples", "ex32", "--max-length", "13"]);
    assert_eq!(code, 1);
}

#[test]
fn explore_orbit_and_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv").to_string_lossy().into_owned();
    let (code, out, _) = hmn(&["explore", "builtin:ex32", "--max-length", "4", "--out", &cloud]);
    assert_eq!(code, 0);
    assert!(out.contains("total: 92"), "{out}");
    let csv = fs::read_to_string(&cloud).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,tag,word"));
    assert_eq!(csv.lines().count(), 93);

    let (code, out, _) = hmn(&["explore", "builtin:ex33", "--quadrants", "5"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("not found"));

    let curves = dir.path().join("b.csv").to_string_lossy().into_owned();
    let (code, _, _) = hmn(&["explore", "--boundary=-2,0,1.5", "--x-max", "0.9", "--out", &curves]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(&curves).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 400);
    let last_slope_row = csv.lines().rfind(|l| l.ends_with("slope=1.5")).unwrap();
    let xy: Vec<f64> = last_slope_row.split(',').take(2).map(|s| s.parse().unwrap()).collect();
    assert!((xy[0] - 0.9).abs() < 1e-12);
    assert!((xy[1] - 1.5 * 0.9f64.exp_m1()).abs() < 1e-12);
}

#[test]
fn densify_commands() {
    let (code, out, _) = hmn(&["densify", "builtin:ex32", "--epsilon", "0.01"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verified: true"));
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "v.toml",
        "shape = { m = 1, n = 1 }\n[vectors]\nT = [[\"1\"], [\"-1/2\"], [\"3/7\"]]\n",
    );
    let (code, out, _) = hmn(&["--format", "structured", "densify", &doc, "--vectors", "T", "--epsilon", "0.01"]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["kind"], "kronecker-euclidean");
    assert_eq!(v["verified"], true);
}
