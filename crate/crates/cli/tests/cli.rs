use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqsl2")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("uqsl2-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn verify_hopf_passes() {
    let out = run(&["verify", "--p", "2", "--suite", "hopf"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("hopf    PASS"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["verify", "--p", "2", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--p", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--genus", "3"]).status.code(), Some(2));
    assert_eq!(run(&["wilson", "--p", "2", "--word", "c1"]).status.code(), Some(2));
    // not a named loop and no explicit assertion of simplicity
    assert_eq!(run(&["wilson", "--p", "2", "--word", "a1 b1"]).status.code(), Some(2));
    assert_eq!(run(&["wilson", "--p", "2", "--word", "a1 b1", "--assert-simple"]).status.code(), Some(0));
}

#[test]
fn wilson_of_binv_a_is_multiplication_by_chi2() {
    let dir = scratch("wilson");
    let path = dir.join("w.json");
    let out = run(&["wilson", "--p", "2", "--word", "b1^-1 a1", "--export", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("acts as multiplication by (1)·chi+2"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let phi = v["multiplication_by"].as_array().unwrap();
    // unit vector at χ⁺₂, each entry a list of [num, den] pairs
    for (i, c) in phi.iter().enumerate() {
        let nonzero = c.as_array().unwrap().iter().any(|pair| pair[0] != 0);
        assert_eq!(nonzero, i == 1, "entry {i}");
    }
}

#[test]
fn sl2z_export_has_v_inverse_diagonal() {
    let dir = scratch("sl2z");
    let path = dir.join("m.json");
    let out = run(&["sl2z", "--p", "3", "--export", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["p"], 3);
    assert_eq!(v["tau_a"]["rows"], 8);
    assert_eq!(v["basis"][0], "chi+1");
}

#[test]
fn exports_are_byte_identical() {
    let (a, b) = (scratch("export-a"), scratch("export-b"));
    for d in [&a, &b] {
        assert_eq!(run(&["export", "--p", "2", "--export", d.to_str().unwrap()]).status.code(), Some(0));
    }
    for f in ["gta_table_p2.csv", "central_basis_p2.json", "theta1_p2.json", "skein_p2.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty(), "{f}");
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("gta_table_p2.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "left,right,chi+1,chi+2,chi-1,chi-2,G1");
    // (χ⁻₁, G₁) → −G₁ at p = 2
    assert!(csv.lines().any(|l| l == "chi-1,G1,0,0,0,0,-1"));
}
