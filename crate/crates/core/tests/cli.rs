//! The `vdl` runner end to end: exit codes, output files and reproducibility.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use sha2::{Digest, Sha256};
use tempfile::TempDir;
use vdl_core::cli::main_with_args;

const SMALL: [&str; 8] = [
    "--set",
    "grid.n_v=128",
    "--set",
    "run.horizon=2",
    "--set",
    "newton.horizon=1",
    "--set",
    "echo.kernel_samples=200",
];

fn vdl(sub: &str, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["vdl".to_string(), sub.to_string(), "--out".into(), out.display().to_string()];
    args.extend(SMALL.iter().map(|s| s.to_string()));
    args.extend(extra.iter().map(|s| s.to_string()));
    main_with_args(args)
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn metrics(dir: &Path) -> BTreeMap<String, f64> {
    let mut r = csv::Reader::from_path(dir.join("metrics.csv")).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn every_subcommand_runs_and_writes_a_manifest() {
    let tmp = TempDir::new().unwrap();
    for sub in ["stability", "volterra", "simulate", "echo", "newton", "norms", "characteristics"] {
        let dir = tmp.path().join(sub);
        let extra = ["--set", "echo.time2=0.5", "--set", "characteristics.gap=0.5"];
        assert_eq!(vdl(sub, &dir, &extra), 0, "{sub}");
        let files = read_dir(&dir);
        assert!(files.contains_key("resolved_config") && files.contains_key("metrics.csv"), "{sub}");
        let manifest = String::from_utf8(files["manifest"].clone()).unwrap();
        let listed: Vec<&str> = manifest.lines().map(|l| l.split_once("  ").unwrap().1).collect();
        let mut sorted = listed.clone();
        sorted.sort();
        assert_eq!(listed, sorted);
        assert_eq!(listed.len(), files.len() - 1, "{sub}: every other file is listed");
        for line in manifest.lines() {
            let (hash, name) = line.split_once("  ").unwrap();
            assert_eq!(hash, hex::encode(Sha256::digest(&files[name])), "{sub}/{name}");
        }
    }
}

#[test]
fn stability_benchmark_passes_its_checks() {
    let tmp = TempDir::new().unwrap();
    let code = vdl(
        "stability",
        tmp.path(),
        &["--assert", "kappa>=0.5", "--assert", "condition_a==1", "--assert", "condition_b<0.32"],
    );
    assert_eq!(code, 0);
    let m = metrics(tmp.path());
    assert!((m["condition_b"] - 1.0 / std::f64::consts::PI).abs() < 1e-8);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(main_with_args(["vdl", "frobnicate"]), 1);
    assert_eq!(main_with_args(["vdl"]), 1);
    assert_eq!(vdl("simulate", &d.join("a"), &["--set", "run.dt=-0.1"]), 1);
    assert_eq!(vdl("simulate", &d.join("b"), &["--set", "grid.nv=64"]), 1);
    assert_eq!(vdl("simulate", &d.join("c"), &["--set", "grid.n_v=100"]), 1);
    assert_eq!(vdl("norms", &d.join("d"), &["--assert", "algebra_violations"]), 1);
    assert_eq!(vdl("norms", &d.join("e"), &["--assert", "no_such_metric<1"]), 1);
    assert_eq!(vdl("norms", &d.join("f"), &["--assert", "algebra_violations>0"]), 3);
    assert_eq!(vdl("norms", &d.join("g"), &["--config", "/nonexistent/vdl.conf"]), 1);
    assert_eq!(vdl("simulate", &d.join("h"), &["--set", "run.horizon=40"]), 1);
}

#[test]
fn numerical_failure_keeps_the_partial_trajectory() {
    let tmp = TempDir::new().unwrap();
    let code = vdl("simulate", tmp.path(), &["--set", "run.dt=0.5", "--set", "perturbation.amplitude=0.5"]);
    assert_eq!(code, 2);
    let traj = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(traj.lines().count() >= 2);
    assert!(tmp.path().join("manifest").exists());
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    for sub in ["simulate", "echo", "norms"] {
        let a = tmp.path().join(format!("{sub}-1"));
        let b = tmp.path().join(format!("{sub}-4"));
        let c = tmp.path().join(format!("{sub}-again"));
        let extra = ["--set", "echo.time2=0.5"];
        assert_eq!(vdl(sub, &a, &[&extra[..], &["--threads", "1"]].concat()), 0);
        assert_eq!(vdl(sub, &b, &[&extra[..], &["--threads", "4"]].concat()), 0);
        assert_eq!(vdl(sub, &c, &[&extra[..], &["--threads", "1"]].concat()), 0);
        assert_eq!(read_dir(&a), read_dir(&b), "{sub}");
        assert_eq!(read_dir(&a), read_dir(&c), "{sub}");
    }
}

#[test]
fn config_file_and_flags_give_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let conf = tmp.path().join("run.conf");
    fs::write(
        &conf,
        "# small benchmark\nsubcommand = simulate\nperturbation.amplitude = 1e-2\nrun.stride = 4   # coarser output\n",
    )
    .unwrap();
    let a = tmp.path().join("file");
    let b = tmp.path().join("flags");
    assert_eq!(vdl("simulate", &a, &["--config", conf.to_str().unwrap()]), 0);
    assert_eq!(vdl("simulate", &b, &["--set", "perturbation.amplitude=0.01", "--set", "run.stride=4"]), 0);
    assert_eq!(read_dir(&a), read_dir(&b));

    // A resolved configuration reproduces its run.
    let c = tmp.path().join("replay");
    let resolved = a.join("resolved_config");
    assert_eq!(main_with_args(["vdl", "simulate", "--config", resolved.to_str().unwrap(), "--out", c.to_str().unwrap()]), 0);
    assert_eq!(read_dir(&a), read_dir(&c));

    fs::write(&conf, "subcommand = newton\n").unwrap();
    assert_eq!(vdl("simulate", &tmp.path().join("x"), &["--config", conf.to_str().unwrap()]), 1);
}

#[test]
fn output_directory_falls_back_to_environment() {
    let tmp = TempDir::new().unwrap();
    let target = tmp.path().join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_vdl"))
        .args(["norms", "--set", "norms.pairs=10"])
        .env("VDL_OUT", &target)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(target.join("norms.csv").exists());

    let status = Command::new(env!("CARGO_BIN_EXE_vdl"))
        .args(["norms", "--set", "norms.pairs=10"])
        .env_remove("VDL_OUT")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(tmp.path().join("vdl-out/norms/norms.csv").exists());
}
