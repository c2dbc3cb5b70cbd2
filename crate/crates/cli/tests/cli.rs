use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slelab"));
    c.env_remove("SLELAB_SEED");
    c
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("slelab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn sample_lerw_writes_json_svg_and_config() {
    let out = tmp("lerw");
    let o = run(&["sample", "lerw", "--radius", "40", "--seed", "1", "--deterministic"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j: serde_json::Value = serde_json::from_str(&read(out.join("lerw.json"))).unwrap();
    assert_eq!(j["radius"], 40.0);
    assert!(j["path"]["vertices"].as_array().unwrap().len() > 1);
    assert!(read(out.join("lerw.svg")).starts_with("<svg"));
    let c: serde_json::Value = serde_json::from_str(&read(out.join("experiment.json"))).unwrap();
    assert_eq!(c["seed"], 1);
    assert_eq!(c["experiment"], "sample lerw");

    // Rerunning from the persisted config reproduces every output byte.
    let again = tmp("lerw-again");
    let o = run(&["sample", "lerw", "--config", out.join("experiment.json").to_str().unwrap()], &again);
    assert!(o.status.success());
    for f in ["lerw.json", "lerw.svg"] {
        assert_eq!(read(out.join(f)), read(again.join(f)), "{f}");
    }
}

#[test]
fn seed_precedence() {
    let a = tmp("seed-a");
    let o = bin().args(["sample", "sle", "--kappa", "2", "--T", "0.1", "--dt", "0.01"]).arg("--out").arg(&a).env("SLELAB_SEED", "5").output().unwrap();
    assert!(o.status.success());
    let c: serde_json::Value = serde_json::from_str(&read(a.join("experiment.json"))).unwrap();
    assert_eq!(c["seed"], 5);
    let b = tmp("seed-b");
    let o = bin().args(["sample", "sle", "--kappa", "2", "--T", "0.1", "--dt", "0.01", "--seed", "6"]).arg("--out").arg(&b).env("SLELAB_SEED", "5").output().unwrap();
    assert!(o.status.success());
    let c: serde_json::Value = serde_json::from_str(&read(b.join("experiment.json"))).unwrap();
    assert_eq!(c["seed"], 6);
    assert_ne!(read(a.join("driving.csv")), read(b.join("driving.csv")));
}

#[test]
fn sample_sle_radial() {
    let out = tmp("sle");
    let o = run(&["sample", "sle", "--kappa", "2", "--mode", "radial", "--T", "0.3", "--dt", "0.003"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let driving = read(out.join("driving.csv"));
    assert_eq!(driving.lines().count(), 101 + 1);
    assert_eq!(read(out.join("trace.csv")).lines().count(), 101 + 1);
    assert!(read(out.join("sle.svg")).contains("<metadata>"));
}

#[test]
fn sample_peano_and_ust() {
    let out = tmp("peano");
    let o = run(&["sample", "peano", "--width", "16", "--height", "8", "--deterministic"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["peano_config.json", "tree.json", "dual_tree.json", "peano.json", "peano.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let tree: serde_json::Value = serde_json::from_str(&read(out.join("tree.json"))).unwrap();
    let dual: serde_json::Value = serde_json::from_str(&read(out.join("dual_tree.json"))).unwrap();
    let path: serde_json::Value = serde_json::from_str(&read(out.join("peano.json"))).unwrap();
    assert_eq!(tree["kind"], "primal");
    assert_eq!(dual["kind"], "dual");
    assert!(path["vertices"].as_array().unwrap().len() > 16 * 8);

    let out = tmp("ust");
    let o = run(&["sample", "ust", "--width", "10", "--height", "6"], &out);
    assert!(o.status.success());
    let j: serde_json::Value = serde_json::from_str(&read(out.join("ust.json"))).unwrap();
    assert_eq!(j["edges"].as_array().unwrap().len(), 11 * 7 - 1);
}

#[test]
fn verify_bijection_and_exit_codes() {
    let out = tmp("verify");
    let o = run(&["verify", "bijection", "--max-trees", "200"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value = serde_json::from_str(&read(out.join("report.json"))).unwrap();
    assert!(r["entries"].as_array().unwrap().iter().all(|e| e["verdict"] == "pass"));

    // Fewer allowed trees than the configuration has is an input error.
    let o = run(&["verify", "bijection", "--max-trees", "10"], &out);
    assert_eq!(o.status.code(), Some(64));
    let o = run(&["verify", "nonsense"], &out);
    assert_eq!(o.status.code(), Some(64));
    let o = run(&["sample", "lerw", "--radius", "0.5"], &out);
    assert_eq!(o.status.code(), Some(64));
    let o = bin().args(["sample", "walrus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn verify_potential_small() {
    let out = tmp("potential");
    let o = run(&["verify", "potential", "--budget", "small", "--threads", "1"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
