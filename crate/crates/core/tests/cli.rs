use shapeopt::cli::Manifest;
use std::path::Path;
use std::process::{Command, Output};

fn shapeopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapeopt")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_disk_writes_spectrum_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "disk.cfg", "shape=disk r=1 M=3\n[domain]\nn=128\n");
    let out = dir.path().join("out");
    let o = shapeopt(&["solve", "--config", &cfg, "--out", s(&out), "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let l1: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((l1 - 5.7832).abs() <= 0.01 * 5.7832, "{l1}");
    let m = Manifest::read(&out).unwrap();
    assert_eq!(m.seed, 4);
    assert_eq!(m.version, "v0.1.0");
    assert_eq!(m.config["run.seed"], "4");
    assert!(m.wall_time_s >= 0.0);
    for f in ["phi.dump", "boundary.csv", "spectrum.csv", "mode_1.dump", "torsion.dump"] {
        assert!(m.artifacts.contains_key(f), "{f}");
    }
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("nope.cfg");
    let o = shapeopt(&["solve", "--config", s(&missing), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope.cfg"));

    let cfg = write(dir.path(), "file.cfg", "[domain]\nshape=file file=absent.dump\n");
    let o = shapeopt(&["solve", "--config", &cfg, "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.dump"), "{}", stderr(&o));

    let cfg = write(dir.path(), "m0.cfg", "shape=disk r=1 M=0\n");
    assert_eq!(code(&shapeopt(&["solve", "--config", &cfg, "--out", s(&out)])), 2);

    let cfg = write(dir.path(), "fam.cfg", "[objective]\nfamily=lambda_banana\n");
    assert_eq!(code(&shapeopt(&["optimize", "--config", &cfg, "--out", s(&out)])), 2);

    assert_eq!(code(&shapeopt(&["polish", "--config", &cfg])), 2);
    assert_eq!(code(&shapeopt(&["solve"])), 2);
}

const SMALL_OPT: &str = "[domain]\nn=64\n[optimizer]\np=16 max_steps=15\n";

#[test]
fn optimize_is_deterministic_and_checkable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "opt.cfg", SMALL_OPT);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = shapeopt(&["optimize", "--config", &cfg, "--out", s(out), "--seed", "9"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(a.join("trace.csv")).unwrap(), std::fs::read(b.join("trace.csv")).unwrap());
    assert!(!std::fs::read(a.join("trace.csv")).unwrap().is_empty());

    let o = shapeopt(&["optimize", "--config", &cfg, "--out", s(&a), "--check"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!a.join(".check").exists());

    std::fs::write(a.join("xi.csv"), "tampered\n").unwrap();
    let o = shapeopt(&["optimize", "--config", &cfg, "--out", s(&a), "--check"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("xi.csv"));
}

#[test]
fn default_optimize_reaches_the_ball_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fk.cfg", "[domain]\nn=96\n");
    let out = dir.path().join("out");
    let o = shapeopt(&["optimize", "--config", &cfg, "--out", s(&out), "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = Manifest::read(&out).unwrap();
    assert_eq!(m.converged, Some(true));
    let f = m.summary["objective"].as_f64().unwrap();
    assert!((f - 8.5250).abs() <= 0.02 * 8.5250, "{f}");
}

#[test]
fn diagnose_on_optimal_ball_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let r = (2.404825557695773f64.powi(2) / std::f64::consts::PI).powf(0.25);
    let cfg = write(dir.path(), "ball.cfg", &format!("[domain]\nshape=disk r={r} lo=-2 hi=2 n=160\n[spectrum]\nM=1\n"));
    let solved = dir.path().join("solved");
    assert_eq!(code(&shapeopt(&["solve", "--config", &cfg, "--out", s(&solved)])), 0);
    let dcfg = write(
        dir.path(),
        "diag.cfg",
        &format!("[diagnose]\ndomain={} spectrum={}\n", s(&solved.join("phi.dump")), s(&solved)),
    );
    let out = dir.path().join("diag");
    let o = shapeopt(&["diagnose", "--config", &dcfg, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    let med = rep["el_median_abs"].as_f64().unwrap();
    assert!(med <= 0.1, "{med}");
    assert!(out.join("weiss.csv").exists());
}

#[test]
fn diagnose_rejects_mismatched_grids() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let ca = write(dir.path(), "a.cfg", "shape=disk r=1 M=1\n[domain]\nn=64\n");
    let cb = write(dir.path(), "b.cfg", "shape=disk r=1 M=1\n[domain]\nn=80\n");
    assert_eq!(code(&shapeopt(&["solve", "--config", &ca, "--out", s(&a)])), 0);
    assert_eq!(code(&shapeopt(&["solve", "--config", &cb, "--out", s(&b)])), 0);
    let d = write(dir.path(), "d.cfg", &format!("[diagnose]\ndomain={} spectrum={}\n", s(&a.join("phi.dump")), s(&b)));
    let o = shapeopt(&["diagnose", "--config", &d, "--out", s(&dir.path().join("out"))]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn diagnose_empty_boundary_reports_zero_points() {
    let dir = tempfile::tempdir().unwrap();
    // a rectangle covering the whole box leaves no interface inside the grid
    let cfg = write(dir.path(), "full.cfg", "[domain]\nshape=rectangle rect=-3,3,-3,3 lo=-1 hi=1 n=32\n[spectrum]\nM=1\n");
    let solved = dir.path().join("solved");
    let o = shapeopt(&["solve", "--config", &cfg, "--out", s(&solved)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = write(
        dir.path(),
        "d.cfg",
        &format!("[diagnose]\ndomain={} spectrum={}\n", s(&solved.join("phi.dump")), s(&solved)),
    );
    let out = dir.path().join("out");
    let o = shapeopt(&["diagnose", "--config", &d, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(rep["points"], 0);
}

#[test]
fn jobs_fan_out_into_named_directories() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.cfg", "run.name=first\n[domain]\nshape=disk r=1 n=48\n[spectrum]\nM=1\n");
    let b = write(dir.path(), "b.cfg", "[domain]\nshape=disk r=0.8 n=48\n[spectrum]\nM=1\n");
    let out = dir.path().join("out");
    let o = shapeopt(&["solve", "--config", &a, "--config", &b, "--jobs", "2", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(Manifest::read(&out.join("first")).unwrap().name, "first");
    assert_eq!(Manifest::read(&out.join("b")).unwrap().name, "b");
}

#[test]
fn sweep_p_writes_one_row_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.cfg", "[domain]\nn=64\n[optimizer]\nschedule=8,16 max_steps=10\n");
    let out = dir.path().join("out");
    let o = shapeopt(&["sweep-p", "--config", &cfg, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = sweep.lines().collect();
    assert!(rows[0].starts_with("p,objective,plain_objective,volume"));
    assert_eq!(rows.len(), 3);
    assert!(out.join("trace_p8.csv").exists() && out.join("trace_p16.csv").exists());
}
