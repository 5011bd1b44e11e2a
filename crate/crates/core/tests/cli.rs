use std::path::Path;
use std::process::Command;

fn tight(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tight")).current_dir(dir).args(args).env_remove("TIGHT_SEED").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn scratch(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("tight-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

const STAR: &str = r#"{"m":2,"vertices":["a","b","c","x"],"edges":[["a","x",1],["b","x",1],["c","x",1]],
"boundary":{"a":[1,0],"b":[-1,0],"c":[-1,0.2]}}"#;

#[test]
fn solve_writes_the_star_hub() {
    let d = scratch("solve");
    std::fs::write(d.join("star.json"), STAR).unwrap();
    let (code, _) = tight(&d, &["solve", "--graph", "star.json", "--mode", "peel", "--out", "U.json", "--cert", "cert.json"]);
    assert_eq!(code, 0);
    let g = tight::io::read_graph(&d.join("star.json")).unwrap();
    let u = tight::io::read_extension(&g, &d.join("U.json")).unwrap();
    let x = u.value(&g, "x").unwrap();
    assert!(x[0].abs() < 1e-6 && (x[1] - 0.1).abs() < 1e-6);
    let cert: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("cert.json")).unwrap()).unwrap();
    assert_eq!(cert["certificate"]["holds"], true);
}

#[test]
fn radial_reports_glue1() {
    let d = scratch("radial");
    let (code, out) =
        tight(&d, &["radial", "--alpha", "1", "--r1", "1", "--m1", "2", "--r2", "4", "--m2", "2", "--out", "phi.csv"]);
    assert_eq!(code, 0);
    assert!(out.contains("Glue1") && out.contains("splice radius 2"), "{out}");
    let csv = std::fs::read_to_string(d.join("phi.csv")).unwrap();
    assert!(csv.starts_with("# case Glue1\nr,phi,dphi,lu\n"));
    assert_eq!(csv.lines().count(), 2 + 101);
}

#[test]
fn gadget_report_lists_monotone_levels() {
    let d = scratch("gadget");
    let (code, _) =
        tight(&d, &["gadget", "--n", "4", "--out", "chain.json", "--u", "u.json", "--v", "v.json", "--report", "r.json"]);
    assert_eq!(code, 0);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["monotone_u"], true);
    assert_eq!(r["result"]["su_u"].as_array().unwrap().len(), 4);
    assert!(d.join("u.json").exists() && d.join("v.json").exists());
}

#[test]
fn exit_codes() {
    let d = scratch("codes");
    assert_eq!(tight(&d, &["solve", "--graph", "missing.json"]).0, 1);
    assert_eq!(tight(&d, &["no-such-command"]).0, 1);
    assert_eq!(tight(&d, &["radial", "--alpha", "-1", "--r1", "1", "--m1", "1", "--r2", "2", "--m2", "1"]).0, 1);
    std::fs::write(d.join("f.csv"), "x,y,u1,u2\n0,0,0,0\n1,0,2,0\n0,1,0,3\n1,1,2,3\n").unwrap();
    assert_eq!(tight(&d, &["verify-pde", "--field", "f.csv", "--kind", "principal"]).0, 2);
}

#[test]
fn reruns_are_bit_identical() {
    let d = scratch("rerun");
    std::fs::write(d.join("star.json"), STAR).unwrap();
    let args = ["--threads", "1", "solve", "--graph", "star.json", "--mode", "plimit", "--out", "U.json"];
    tight(&d, &args);
    let a = std::fs::read(d.join("U.json")).unwrap();
    tight(&d, &args);
    assert_eq!(a, std::fs::read(d.join("U.json")).unwrap());
}
