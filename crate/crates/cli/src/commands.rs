//! The four run modes. Each writes its artifacts under `config.output`.

use crate::config::{ChiInput, Mode, RunConfig, Scenario};
use anyhow::{bail, Context, Result};
use reactor_design::fem::check_design;
use reactor_design::io::{read_grid_csv, read_vtk_field, sample_grid, write_csv, write_vtk};
use reactor_design::optimizer::{
    interface_position, left_right_contrast, mixed_area, run_observed, StepKind, StepRecord,
};
use reactor_design::relaxed::{reference_map_cases, verify_identities, wbar_map, RelaxedPoint};
use reactor_design::state::{reaction_density, solve_state, CoupledSystem};
use reactor_design::validation1d::{diffuse_flux_1d, flux_condition_residual, Profile1D};
use reactor_design::{EnergyReport64, Mesh64, ModelParams64, StateField64};
use serde::Serialize;
use std::fs;
use std::path::Path;

/// What a finished command reports back to the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// Converged (optimize) or all checks passed (validate1d).
    pub converged: bool,
}

impl Outcome {
    const DONE: Outcome = Outcome { converged: true };

    /// 0 converged, 2 not converged.
    pub fn exit_code(self) -> u8 {
        if self.converged {
            0
        } else {
            2
        }
    }
}

/// Runs the mode selected in `cfg`.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output).with_context(|| format!("cannot create {}", cfg.output.display()))?;
    match cfg.mode {
        Mode::Solve => cmd_solve(cfg),
        Mode::Optimize => cmd_optimize(cfg).map(|r| Outcome { converged: r.converged }),
        Mode::RelaxedMap => cmd_relaxed_map(cfg),
        Mode::Validate1d => cmd_validate1d(cfg),
    }
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Reads the design named by `input` onto `mesh`.
pub fn load_chi(mesh: &Mesh64, input: &ChiInput) -> Result<Vec<f64>> {
    let chi = match input {
        ChiInput::Constant(c) => vec![*c; mesh.num_dofs()],
        ChiInput::File(path) => {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
            match ext.as_str() {
                "csv" => {
                    let grid = read_grid_csv(path).with_context(|| format!("cannot read design {}", path.display()))?;
                    sample_grid(mesh, &grid)
                }
                "vtk" => read_vtk_field(path, mesh, "chi")
                    .with_context(|| format!("cannot read field chi from {}", path.display()))?,
                _ => bail!("design file {} must end in .csv or .vtk", path.display()),
            }
        }
    };
    check_design(mesh, &chi).context("design values must lie in [0, 1]")?;
    Ok(chi)
}

fn write_fields(path: &Path, mesh: &Mesh64, title: &str, chi: &[f64], state: &StateField64, params: &ModelParams64) -> Result<()> {
    let reaction = reaction_density(chi, state, params.k_s);
    write_vtk(path, mesh, title, &[("chi", chi), ("u1", &state.u1), ("u2", &state.u2), ("reaction", &reaction)])
        .with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Serialize)]
struct SolveReport {
    scenario: Scenario,
    n: usize,
    #[serde(flatten)]
    energies: EnergyReport64,
}

/// Solves the state for a fixed design: `state.vtk` and `report.json`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let Some(input) = &cfg.chi else {
        bail!("solve needs a design: set \"chi\" to a number or a .csv/.vtk path");
    };
    let mesh = cfg.build_mesh()?;
    let params = cfg.model_params();
    let chi = load_chi(&mesh, input)?;
    let state = solve_state(&mesh, &chi, &params)?;
    let energies = CoupledSystem::assemble(&mesh, &chi, &params)?.report(&mesh, &chi, &state, &params, cfg.alpha, cfg.beta)?;
    write_fields(&cfg.output.join("state.vtk"), &mesh, "state", &chi, &state, &params)?;
    write_json(&cfg.output.join("report.json"), &SolveReport { scenario: cfg.scenario, n: cfg.n, energies })?;
    Ok(Outcome::DONE)
}

/// Summary of an optimization run.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizeReport {
    pub scenario: Scenario,
    pub n: usize,
    pub k11: f64,
    pub k22: f64,
    pub v: f64,
    pub converged: bool,
    pub steps: usize,
    pub newton_steps: usize,
    pub rejected_steps: usize,
    pub final_residual: f64,
    pub functional: f64,
    /// Lumped-mass mean of the final design.
    pub mean_chi: f64,
    /// Area with `0.05 < χ < 0.95`.
    pub mixed_area: f64,
    /// Square only: where the column mean of `χ` crosses `½`.
    pub interface_position: Option<f64>,
    /// Square only: mean `χ` left of `x = ½` minus mean `χ` right of it.
    pub left_right_contrast: Option<f64>,
    #[serde(flatten)]
    pub energies: EnergyReport64,
}

fn kind_name(kind: StepKind) -> &'static str {
    match kind {
        StepKind::Flow => "flow",
        StepKind::Newton => "newton",
    }
}

fn history_row(r: &StepRecord<f64>) -> Vec<String> {
    vec![
        r.step.to_string(),
        kind_name(r.kind).to_string(),
        r.residual.to_string(),
        r.functional.to_string(),
        r.lambda.to_string(),
        r.dt.to_string(),
    ]
}

/// Runs the design flow: optional snapshots, `final.vtk`, `history.csv`
/// and `report.json`. Artifacts are written whether or not the run
/// converged.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<OptimizeReport> {
    let mesh = cfg.build_mesh()?;
    let params = cfg.model_params();
    let pf = cfg.phase_field_params();
    let mut opts = cfg.run_options();
    if let Some(input) = &cfg.chi {
        opts.initial = Some(load_chi(&mesh, input)?);
    }
    let snapshots = cfg.output.join("snapshots");
    if cfg.snapshot_interval > 0 {
        fs::create_dir_all(&snapshots)?;
    }
    let mut snapshot_error = None;
    let result = run_observed(&mesh, &params, &pf, &opts, |rec, chi, state| {
        if cfg.snapshot_interval > 0 && rec.step % cfg.snapshot_interval == 0 && snapshot_error.is_none() {
            let path = snapshots.join(format!("chi_{:06}.vtk", rec.step));
            if let Err(e) = write_fields(&path, &mesh, &format!("step {}", rec.step), chi, state, &params) {
                snapshot_error = Some(e);
            }
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }

    write_fields(&cfg.output.join("final.vtk"), &mesh, "final design", &result.chi, &result.state, &params)?;
    write_csv(
        &cfg.output.join("history.csv"),
        &["step", "kind", "residual", "functional", "lambda", "dt"],
        result.history.iter().map(history_row),
    )?;

    let mass = mesh.lumped_mass();
    let mean_chi = mass.iter().zip(&result.chi).map(|(m, c)| m * c).sum::<f64>() / mesh.total_area();
    let square = cfg.scenario == Scenario::Square;
    let last = result.history.last();
    let report = OptimizeReport {
        scenario: cfg.scenario,
        n: cfg.n,
        k11: cfg.k11,
        k22: cfg.k22,
        v: cfg.v,
        converged: result.converged,
        steps: result.history.len(),
        newton_steps: result.history.iter().filter(|r| r.kind == StepKind::Newton).count(),
        rejected_steps: result.rejected_steps,
        final_residual: last.map_or(f64::NAN, |r| r.residual),
        functional: last.map_or(f64::NAN, |r| r.functional),
        mean_chi,
        mixed_area: mixed_area(&mesh, &result.chi, 0.05, 0.95),
        interface_position: if square { interface_position(&mesh, &result.chi) } else { None },
        left_right_contrast: square.then(|| left_right_contrast(&mesh, &result.chi)),
        energies: result.report,
    };
    write_json(&cfg.output.join("report.json"), &report)?;
    Ok(report)
}

#[derive(Serialize)]
struct IdentitySummary {
    case: &'static str,
    samples: usize,
    /// Largest `|W(χ*) − W(0) − (k_v/2)χ*²| / scale`.
    star_minus_zero: f64,
    /// Largest `|W(χ*) − W(1) − (k_v/2)(χ*−1)²| / scale`.
    star_minus_one: f64,
    /// The same comparison with coefficient `¼`; nonzero unless `k_v = ½`.
    star_minus_one_quarter: f64,
    /// Largest `|W(1) − W(0) − ½(S − 2λ)| / scale`.
    one_minus_zero: f64,
    region_r0: usize,
    region_r: usize,
    region_r1: usize,
}

/// Relaxed-density maps of the four reference parameter sets
/// (`relaxed_map_<case>.csv`) and `relaxed_identities.json`.
pub fn cmd_relaxed_map(cfg: &RunConfig) -> Result<Outcome> {
    let mut summaries = Vec::new();
    for case in reference_map_cases::<f64>() {
        let samples = wbar_map(&case.params, case.v, case.lambda, cfg.map_grid, cfg.map_xi_max)?;
        write_csv(
            &cfg.output.join(format!("relaxed_map_{}.csv", case.name)),
            &["xi1", "xi2", "wbar", "region"],
            samples.iter().map(|s| vec![s.xi1.to_string(), s.xi2.to_string(), s.wbar.to_string(), s.region.to_string()]),
        )?;
        let mut sum = IdentitySummary {
            case: case.name,
            samples: samples.len(),
            star_minus_zero: 0.0,
            star_minus_one: 0.0,
            star_minus_one_quarter: 0.0,
            one_minus_zero: 0.0,
            region_r0: 0,
            region_r: 0,
            region_r1: 0,
        };
        for s in &samples {
            let p = RelaxedPoint { params: case.params, v: case.v, xi: [[s.xi1, 0.0], [0.0, s.xi2]], lambda: case.lambda };
            let r = verify_identities(&p)?;
            let scale = p.scale();
            sum.star_minus_zero = sum.star_minus_zero.max(r.star_minus_zero.abs() / scale);
            sum.star_minus_one = sum.star_minus_one.max(r.star_minus_one.abs() / scale);
            sum.star_minus_one_quarter = sum.star_minus_one_quarter.max(r.star_minus_one_quarter.abs() / scale);
            sum.one_minus_zero = sum.one_minus_zero.max(r.one_minus_zero.abs() / scale);
            match s.region {
                reactor_design::Region::R0 => sum.region_r0 += 1,
                reactor_design::Region::R => sum.region_r += 1,
                reactor_design::Region::R1 => sum.region_r1 += 1,
            }
        }
        summaries.push(sum);
    }
    write_json(&cfg.output.join("relaxed_identities.json"), &summaries)?;
    Ok(Outcome::DONE)
}

/// One row of the 1D convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct Row1D {
    pub case: String,
    pub w: f64,
    pub n: usize,
    pub k_s: f64,
    pub kappa_eff: f64,
    pub j: f64,
    pub residual: Option<f64>,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

const WIDTHS: [f64; 3] = [0.08, 0.04, 0.02];

/// 1D interface checks: `validate1d.csv` (case, w, n, k_s, kappa_eff, J,
/// residual) and `validate1d_summary.json`. Not converged means a check
/// failed.
pub fn cmd_validate1d(cfg: &RunConfig) -> Result<Outcome> {
    let base = cfg.model_params();
    let n = cfg.nodes_1d;
    let s = 0.5;
    let mut rows = Vec::new();

    let step = Profile1D::step(n, s, base)?;
    let f = diffuse_flux_1d(&step)?;
    rows.push(Row1D { case: "step".into(), w: 0.0, n, k_s: base.k_s, kappa_eff: 0.0, j: f.j, residual: None });

    for w in WIDTHS {
        let p = Profile1D::ramp_with_conductance(n, s, w, 1.0, base)?;
        let f = diffuse_flux_1d(&p)?;
        rows.push(Row1D {
            case: "width".into(),
            w,
            n,
            k_s: p.params.k_s,
            kappa_eff: p.kappa_eff(),
            j: f.j,
            residual: Some(flux_condition_residual(&p)?),
        });
    }

    let conductance = ModelParams64 { k_s: 300.0, ..base };
    let p = Profile1D::ramp(n, s, 0.02, conductance)?;
    let f = diffuse_flux_1d(&p)?;
    rows.push(Row1D {
        case: "conductance".into(),
        w: 0.02,
        n,
        k_s: 300.0,
        kappa_eff: p.kappa_eff(),
        j: f.j,
        residual: Some(flux_condition_residual(&p)?),
    });

    for kappa in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let p = Profile1D::ramp_with_conductance(n, s, 0.02, kappa, base)?;
        let f = diffuse_flux_1d(&p)?;
        rows.push(Row1D {
            case: "kappa".into(),
            w: 0.02,
            n,
            k_s: p.params.k_s,
            kappa_eff: kappa,
            j: f.j,
            residual: Some(flux_condition_residual(&p)?),
        });
    }

    write_csv(
        &cfg.output.join("validate1d.csv"),
        &["case", "w", "n", "k_s", "kappa_eff", "J", "residual"],
        rows.iter().map(|r| {
            vec![
                r.case.clone(),
                r.w.to_string(),
                r.n.to_string(),
                r.k_s.to_string(),
                r.kappa_eff.to_string(),
                r.j.to_string(),
                r.residual.map_or_else(String::new, |x| x.to_string()),
            ]
        }),
    )?;

    let widths: Vec<f64> = rows.iter().filter(|r| r.case == "width").filter_map(|r| r.residual).collect();
    let worst_ratio = widths.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let j_cond = rows.iter().find(|r| r.case == "conductance").map_or(f64::NAN, |r| r.j);
    let kappa_j: Vec<f64> = rows.iter().filter(|r| r.case == "kappa").map(|r| r.j).collect();
    let kappa_monotone = kappa_j.windows(2).all(|w| w[1] > w[0]);
    let checks = vec![
        Check { name: "step_flux", value: rows[0].j.abs(), threshold: 1e-10, pass: rows[0].j.abs() <= 1e-10 },
        Check {
            name: "residual_ratio_as_width_halves",
            value: worst_ratio,
            threshold: 1.0,
            pass: worst_ratio < 1.0,
        },
        Check {
            name: "conductance_flux_relative_error",
            value: (j_cond - 0.5).abs() / 0.5,
            threshold: 0.05,
            pass: (j_cond - 0.5).abs() / 0.5 <= 0.05,
        },
        Check {
            name: "flux_increases_with_kappa",
            value: if kappa_monotone { 1.0 } else { 0.0 },
            threshold: 1.0,
            pass: kappa_monotone,
        },
    ];
    let pass = checks.iter().all(|c| c.pass);
    write_json(&cfg.output.join("validate1d_summary.json"), &serde_json::json!({ "pass": pass, "checks": checks }))?;
    Ok(Outcome { converged: pass })
}

/// Shorthand used by the sweep driver.
pub fn run_optimize(cfg: &RunConfig, out: &Path) -> Result<OptimizeReport> {
    let cfg = RunConfig { output: out.to_path_buf(), mode: Mode::Optimize, ..cfg.clone() };
    cfg.validate()?;
    fs::create_dir_all(out)?;
    cmd_optimize(&cfg)
}

/// Mesh with per-dof boundary tags (0 interior or insulated, 1 source,
/// 2 sink) as VTK.
pub fn write_mesh(cfg: &RunConfig, path: &Path) -> Result<()> {
    use reactor_design::BoundaryTag;
    let mesh = cfg.build_mesh()?;
    let mut tag = vec![0.0; mesh.num_dofs()];
    for d in mesh.tagged_dofs(BoundaryTag::Source1) {
        tag[d] = 1.0;
    }
    for d in mesh.tagged_dofs(BoundaryTag::Sink2) {
        tag[d] = 2.0;
    }
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_vtk(path, &mesh, "mesh", &[("tag", &tag)]).with_context(|| format!("cannot write {}", path.display()))
}
