//! Diffusivity sweep: one optimization per `(k11, k22)` cell.

use crate::commands::{run_optimize, OptimizeReport};
use crate::config::RunConfig;
use anyhow::{anyhow, Result};
use reactor_design::io::write_csv;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const SWEEP_VALUES: [f64; 3] = [0.1, 1.0, 10.0];
/// Off-phase diffusivity as a fraction of the on-phase one.
pub const SWEEP_RATIO: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct SweepCell {
    pub k11: f64,
    pub k22: f64,
    pub dir: PathBuf,
}

/// The `values × values` grid with `k12 = ratio k11`, `k21 = ratio k22`.
/// Each cell gets its own directory `k11_<a>_k22_<b>` under `cfg.output`.
pub fn sweep_cells(cfg: &RunConfig, values: &[f64]) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &k11 in values {
        for &k22 in values {
            cells.push(SweepCell { k11, k22, dir: cfg.output.join(format!("k11_{k11}_k22_{k22}")) });
        }
    }
    cells
}

/// Runs every cell on up to `jobs` threads and writes `sweep.csv`.
/// Returns the reports in cell order.
pub fn run_sweep(cfg: &RunConfig, values: &[f64], ratio: f64, jobs: usize) -> Result<Vec<OptimizeReport>> {
    let cells = sweep_cells(cfg, values);
    let results: Mutex<Vec<Option<Result<OptimizeReport>>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, cells.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                let params = cfg.model_params().with_diffusivities(cell.k11, cell.k22, ratio);
                let cell_cfg = RunConfig { k11: params.k11, k12: params.k12, k21: params.k21, k22: params.k22, ..cfg.clone() };
                let r = run_optimize(&cell_cfg, &cell.dir);
                results.lock().expect("sweep result lock")[i] = Some(r);
            });
        }
    });
    let reports = results
        .into_inner()
        .expect("sweep result lock")
        .into_iter()
        .zip(&cells)
        .map(|(r, c)| {
            r.unwrap_or_else(|| Err(anyhow!("cell did not run")))
                .map_err(|e| e.context(format!("sweep cell k11={} k22={}", c.k11, c.k22)))
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(
        &cfg.output.join("sweep.csv"),
        &["k11", "k22", "converged", "steps", "J1_in", "J2_out", "total_reaction", "objective", "interface_position"],
        reports.iter().map(|r| {
            vec![
                r.k11.to_string(),
                r.k22.to_string(),
                r.converged.to_string(),
                r.steps.to_string(),
                r.energies.j1_in.to_string(),
                r.energies.j2_out.to_string(),
                r.energies.total_reaction.to_string(),
                r.energies.objective.to_string(),
                r.interface_position.map_or_else(String::new, |x| x.to_string()),
            ]
        }),
    )?;
    Ok(reports)
}
