//! Golden outputs of the command-line front end. Set `UPDATE_GOLDEN=1` to rewrite.

use std::path::PathBuf;
use std::process::Command;

const Z3: &str = "mixed(k=1,eis=\"z^3-2\")";

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_wildtate")).args(args).output().expect("binary runs");
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap_or(-1))
}

fn golden(name: &str, args: &[&str], code: i32) {
    let (stdout, got) = run(args);
    assert_eq!(got, code, "{name}: exit code; stdout:\n{stdout}");
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &stdout).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    assert_eq!(stdout, want, "{name}");
}

#[test]
fn predict() {
    golden("predict_vj12_s7", &["predict", "vj=12", "s=7"], 0);
    golden("predict_j0_s1", &["predict", "vj=inf", "s=1"], 0);
    golden("predict_case_b", &["predict", "24", "3"], 0);
}

#[test]
fn catalog() {
    golden("catalog_cubic_pair", &["catalog", "cubic-tower-2-isogeny"], 0);
    golden("catalog_all", &["catalog", "--format", "jsonl"], 0);
}

#[test]
fn tate_with_trace() {
    golden("tate_istar12_trace", &["--field", Z3, "tate", "[0,0,0,-15*pi^2,22*pi^3]", "--trace"], 0);
    golden("tate_equichar_csv", &["--field", "equichar(k=1)", "--format", "csv", "tate", "[0,0,1,0,pi^-3]"], 0);
}

#[test]
fn extensions_and_twists() {
    golden("slk_sqrt_pi", &["--field", Z3, "slk", "sqrt(pi)"], 0);
    golden("twist_equichar", &["--field", "equichar(k=1)", "twist", "[0,0,1,0,0]", "as(D=pi^-3)"], 0);
}

#[test]
fn verify() {
    golden("verify_istar0", &["--field", "equichar(k=1)", "verify", "[0,0,1,0,pi^-3]", "as(D=pi^-3)"], 0);
    golden("verify_not_applicable", &["--field", Z3, "verify", "[0,0,0,0,pi]", "sqrt(pi)"], 1);
}

#[test]
fn isogenies() {
    golden("isogeny2_cubic", &["--field", Z3, "isogeny2", "[0,0,0,0,pi^3]", "--", "-pi"], 0);
    golden("phi2_t1", &["phi2", "--t", "1"], 0);
    golden("phi2_value", &["phi2", "0", "54000"], 0);
}

#[test]
fn scan_mixed_csv() {
    golden("scan_mixed_csv", &["--format", "csv", "scan", "mixed", "eis=z^2-2"], 0);
}

#[test]
fn scan_equichar_all_match() {
    let (out, code) = run(&["--format", "jsonl", "scan", "equichar", "s=1..11:odd", "u=1..6"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3 * 6 * 6);
    for l in lines {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["match"], true, "{l}");
        for key in ["field", "ext", "s", "vj", "predicted", "computed"] {
            assert!(v.get(key).is_some(), "{key} missing in {l}");
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["tate", "[1,2"]).1, 2);
    assert_eq!(run(&["lmfdb", "9.9.9.9-1.1-a1"]).1, 2);
    assert_eq!(run(&["predict", "vj=13", "s=7"]).1, 2);
    assert_eq!(run(&["frobnicate"]).1, 2);
    assert_eq!(run(&["--field", "equichar(k=1)", "isogeny2", "[0,0,1,0,0]", "0"]).1, 2);
}

#[test]
fn lmfdb_vendored_offline() {
    let (out, code) = run(&["lmfdb", "2.0.4.1-4096.1-a2"]);
    assert_eq!(code, 0);
    assert!(out.contains("I*2"), "{out}");
}
