use reactor_cli::config::{ChiInput, Mode, RunConfig, Scenario};
use reactor_cli::sweep::run_sweep;
use reactor_cli::{execute, Outcome};
use reactor_design::io::read_vtk_field;
use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::Command;

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn solve_cfg(dir: &Path, scenario: Scenario, n: usize, chi: f64) -> RunConfig {
    RunConfig { mode: Mode::Solve, scenario, n, chi: Some(ChiInput::Constant(chi)), output: dir.to_path_buf(), ..RunConfig::default() }
}

/// A small optimization that finishes in well under a second.
fn quick_optimize(dir: &Path) -> RunConfig {
    RunConfig {
        mode: Mode::Optimize,
        n: 20,
        k12: 1e-2,
        k21: 1e-2,
        alpha: 0.1,
        beta: 2e-4,
        max_steps: 15,
        snapshot_interval: 5,
        output: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

#[test]
fn solve_with_empty_design_has_no_flux() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(execute(&solve_cfg(dir.path(), Scenario::Square, 16, 0.0)).unwrap(), Outcome { converged: true });
    let r = read_json(&dir.path().join("report.json"));
    for key in ["j1_in", "j2_out", "total_reaction", "objective"] {
        assert!(r[key].as_f64().unwrap().abs() <= 1e-12, "{key}");
    }
    assert!(dir.path().join("state.vtk").exists());
}

#[test]
fn solve_half_design_conserves_species() {
    let dir = tempfile::tempdir().unwrap();
    execute(&solve_cfg(dir.path(), Scenario::Square, 32, 0.5)).unwrap();
    let r = read_json(&dir.path().join("report.json"));
    let j1 = r["j1_in"].as_f64().unwrap();
    let j2 = r["j2_out"].as_f64().unwrap();
    let total = r["total_reaction"].as_f64().unwrap();
    assert!(total > 0.0);
    assert!((j1 - j2).abs() <= 0.02 * total);
    assert!((j1 - total).abs() <= 0.02 * total);
}

#[test]
fn annulus_solution_is_rotationally_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = solve_cfg(dir.path(), Scenario::Annulus, 8, 0.5);
    execute(&cfg).unwrap();
    let mesh = cfg.build_mesh().unwrap();
    let coords = mesh.dof_coordinates();
    for field in ["u1", "u2"] {
        let u = read_vtk_field::<f64>(&dir.path().join("state.vtk"), &mesh, field).unwrap();
        let mut rings: std::collections::BTreeMap<i64, Vec<f64>> = Default::default();
        for (p, v) in coords.iter().zip(&u) {
            rings.entry((p[0].hypot(p[1]) * 1e6).round() as i64).or_default().push(*v);
        }
        for ring in rings.values() {
            let mean = ring.iter().sum::<f64>() / ring.len() as f64;
            let var = ring.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / ring.len() as f64;
            assert!(var <= 1e-8, "{field} angular variance {var}");
        }
    }
}

#[test]
fn solve_reads_designs_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("design.csv");
    fs::write(&grid, "1,1,0,0\n1,1,0,0\n").unwrap();
    let mut cfg = solve_cfg(&dir.path().join("a"), Scenario::Square, 16, 0.0);
    cfg.chi = Some(ChiInput::File(grid));
    execute(&cfg).unwrap();
    let vtk = dir.path().join("a/state.vtk");
    let mut again = solve_cfg(&dir.path().join("b"), Scenario::Square, 16, 0.0);
    again.chi = Some(ChiInput::File(vtk));
    execute(&again).unwrap();
    let a = fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/report.json")).unwrap();
    assert_eq!(a, b);

    cfg.chi = Some(ChiInput::File(dir.path().join("missing.csv")));
    let err = execute(&cfg).unwrap_err();
    assert!(format!("{err:#}").contains("missing.csv"));
}

#[test]
fn optimize_writes_artifacts_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let a = quick_optimize(&dir.path().join("a"));
    let b = quick_optimize(&dir.path().join("b"));
    // 15 steps cannot reach tol 1e-6
    assert_eq!(execute(&a).unwrap(), Outcome { converged: false });
    execute(&b).unwrap();
    for f in ["report.json", "history.csv", "final.vtk", "snapshots/chi_000005.vtk", "snapshots/chi_000015.vtk"] {
        let x = fs::read(dir.path().join("a").join(f)).unwrap();
        let y = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between identical runs");
    }
    let r = read_json(&dir.path().join("a/report.json"));
    assert_eq!(r["converged"], Value::Bool(false));
    assert_eq!(r["steps"].as_u64(), Some(15));
    assert!((r["mean_chi"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!(r["left_right_contrast"].is_number());
    let history = fs::read_to_string(dir.path().join("a/history.csv")).unwrap();
    assert_eq!(history.lines().next(), Some("step,kind,residual,functional,lambda,dt"));
    assert_eq!(history.lines().count(), 16);
}

#[test]
fn relaxed_map_writes_four_grids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { mode: Mode::RelaxedMap, map_grid: 21, output: dir.path().to_path_buf(), ..RunConfig::default() };
    execute(&cfg).unwrap();
    for case in ["a", "b", "c", "d"] {
        let text = fs::read_to_string(dir.path().join(format!("relaxed_map_{case}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 1 + 21 * 21);
    }
    let ids = read_json(&dir.path().join("relaxed_identities.json"));
    let ids = ids.as_array().unwrap();
    assert_eq!(ids.len(), 4);
    for s in ids {
        assert!(s["star_minus_zero"].as_f64().unwrap() <= 1e-12);
        assert!(s["star_minus_one"].as_f64().unwrap() <= 1e-12);
        assert!(s["one_minus_zero"].as_f64().unwrap() <= 1e-12);
    }
    // set (a) has a mixed band; set (c) contains ξ = 0 in R0
    assert!(ids[0]["region_r"].as_u64().unwrap() > 0);
    let c = fs::read_to_string(dir.path().join("relaxed_map_c.csv")).unwrap();
    assert!(c.lines().nth(1).unwrap().ends_with(",R0"));
}

#[test]
fn validate1d_passes_its_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { mode: Mode::Validate1d, output: dir.path().to_path_buf(), ..RunConfig::default() };
    assert_eq!(execute(&cfg).unwrap(), Outcome { converged: true });
    let summary = read_json(&dir.path().join("validate1d_summary.json"));
    assert_eq!(summary["pass"], Value::Bool(true));
    let table = fs::read_to_string(dir.path().join("validate1d.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("case,w,n,k_s,kappa_eff,J,residual"));
    assert!(table.lines().any(|l| l.starts_with("step,")));
    assert_eq!(table.lines().filter(|l| l.starts_with("width,")).count(), 3);
}

#[test]
fn sweep_uses_disjoint_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { max_steps: 3, snapshot_interval: 0, ..quick_optimize(dir.path()) };
    let reports = run_sweep(&cfg, &[0.5, 2.0], 1e-3, 2).unwrap();
    assert_eq!(reports.len(), 4);
    assert_eq!((reports[1].k11, reports[1].k22), (0.5, 2.0));
    for r in &reports {
        let sub = dir.path().join(format!("k11_{}_k22_{}", r.k11, r.k22));
        assert!(sub.join("report.json").exists());
    }
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
}

fn reactor() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reactor"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"k_11": 1.0}"#).unwrap();
    let out = reactor().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    let cfg = quick_optimize(&dir.path().join("run"));
    let path = dir.path().join("opt.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = reactor().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("run/final.vtk").exists());

    let solve = dir.path().join("solve.json");
    fs::write(&solve, format!(r#"{{"mode": "solve", "n": 8, "chi": 1.0, "output": {:?}}}"#, dir.path().join("s"))).unwrap();
    assert_eq!(reactor().arg("run").arg(&solve).status().unwrap().code(), Some(0));

    let mesh = dir.path().join("mesh.vtk");
    assert_eq!(reactor().arg("mesh").arg(&solve).arg("--output").arg(&mesh).status().unwrap().code(), Some(0));
    assert!(fs::read_to_string(&mesh).unwrap().contains("SCALARS tag"));

    let out = reactor().arg("defaults").output().unwrap();
    let defaults: RunConfig = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(defaults, RunConfig::default());
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        cfg.build_mesh().unwrap();
        count += 1;
    }
    assert!(count >= 7);
}
