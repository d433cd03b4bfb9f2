//! JSON run configuration.

use anyhow::{bail, Context, Result};
use reactor_design::mesh::{build_annulus, build_periodic_cell, build_rectangle};
use reactor_design::optimizer::{RunOptions, StateMode};
use reactor_design::{Mesh64, ModelParams64, PhaseFieldParams64};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    #[default]
    Optimize,
    RelaxedMap,
    Validate1d,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    Square,
    Annulus,
    Periodic,
}

/// Design input: a constant, or a file (`.csv` grid or `.vtk` field `chi`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChiInput {
    Constant(f64),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StateModeConfig {
    #[default]
    Segregated,
    Coupled,
}

/// One run. Every model symbol has a key of the same name; unknown keys
/// are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    pub scenario: Scenario,
    /// Cells per side (square, periodic) or radial cells (annulus).
    pub n: usize,
    /// Angular cells of the annulus; defaults to `8 n`.
    pub n_theta: Option<usize>,
    pub r_in: Option<f64>,
    pub r_out: Option<f64>,
    pub r_source: Option<f64>,
    pub r_sink: Option<f64>,

    pub k11: f64,
    pub k12: f64,
    pub k21: f64,
    pub k22: f64,
    pub k_s: f64,
    pub u1_star: f64,
    pub u2_star: f64,

    pub alpha: f64,
    pub beta: f64,
    pub d_chi: f64,
    pub d_u: f64,
    pub dt: f64,
    pub v: f64,
    pub tol: f64,
    pub max_steps: usize,

    pub seed: u64,
    pub perturbation: f64,
    pub state_mode: StateModeConfig,
    pub newton: bool,
    /// Design for `solve`, optional initial design for `optimize`.
    pub chi: Option<ChiInput>,
    pub output: PathBuf,
    /// Write a design snapshot every this many accepted steps (0: never).
    pub snapshot_interval: usize,

    /// Lattice size and extent of `relaxed-map` grids.
    pub map_grid: usize,
    pub map_xi_max: f64,
    /// Finest 1D grid of `validate1d`.
    pub nodes_1d: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = ModelParams64::reference();
        let pf = PhaseFieldParams64::reference();
        let opts = RunOptions::<f64>::default();
        RunConfig {
            mode: Mode::default(),
            scenario: Scenario::default(),
            n: 64,
            n_theta: None,
            r_in: None,
            r_out: None,
            r_source: None,
            r_sink: None,
            k11: p.k11,
            k12: p.k12,
            k21: p.k21,
            k22: p.k22,
            k_s: p.k_s,
            u1_star: p.u1_star,
            u2_star: p.u2_star,
            alpha: pf.alpha,
            beta: pf.beta,
            d_chi: pf.d_chi,
            d_u: pf.d_u,
            dt: pf.dt,
            v: pf.v,
            tol: pf.tol,
            max_steps: pf.max_steps,
            seed: opts.seed,
            perturbation: opts.perturbation,
            state_mode: StateModeConfig::default(),
            newton: opts.newton,
            chi: None,
            output: PathBuf::from("out"),
            snapshot_interval: 0,
            map_grid: 121,
            map_xi_max: 3.0,
            nodes_1d: 1024,
        }
    }
}

pub const DEFAULT_R_IN: f64 = 0.2;
pub const DEFAULT_R_OUT: f64 = 1.0;
pub const DEFAULT_R_DISK: f64 = 0.15;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn model_params(&self) -> ModelParams64 {
        ModelParams64 {
            k11: self.k11,
            k12: self.k12,
            k21: self.k21,
            k22: self.k22,
            k_s: self.k_s,
            u1_star: self.u1_star,
            u2_star: self.u2_star,
            lambda: 0.0,
        }
    }

    pub fn phase_field_params(&self) -> PhaseFieldParams64 {
        PhaseFieldParams64 {
            alpha: self.alpha,
            beta: self.beta,
            d_chi: self.d_chi,
            d_u: self.d_u,
            dt: self.dt,
            v: self.v,
            tol: self.tol,
            max_steps: self.max_steps,
        }
    }

    pub fn run_options(&self) -> RunOptions<f64> {
        RunOptions {
            seed: self.seed,
            perturbation: self.perturbation,
            mode: match self.state_mode {
                StateModeConfig::Segregated => StateMode::Segregated,
                StateModeConfig::Coupled => StateMode::Coupled,
            },
            newton: self.newton,
            ..RunOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params().validate()?;
        if matches!(self.mode, Mode::Solve | Mode::Optimize) {
            self.phase_field_params().validate()?;
            if self.n == 0 {
                bail!("n must be positive");
            }
        }
        if !(self.perturbation >= 0.0) {
            bail!("perturbation must be non-negative (got {})", self.perturbation);
        }
        let only = |name: &str, value: Option<f64>, scenario: Scenario| -> Result<()> {
            if value.is_some() && self.scenario != scenario {
                bail!("{name} applies only to the {scenario:?} scenario");
            }
            Ok(())
        };
        only("r_in", self.r_in, Scenario::Annulus)?;
        only("r_out", self.r_out, Scenario::Annulus)?;
        only("r_source", self.r_source, Scenario::Periodic)?;
        only("r_sink", self.r_sink, Scenario::Periodic)?;
        if self.n_theta.is_some() && self.scenario != Scenario::Annulus {
            bail!("n_theta applies only to the Annulus scenario");
        }
        if self.mode == Mode::RelaxedMap && (self.map_grid < 2 || !(self.map_xi_max > 0.0)) {
            bail!("relaxed-map needs map_grid >= 2 and map_xi_max > 0");
        }
        if self.mode == Mode::Validate1d && self.nodes_1d < 64 {
            bail!("nodes_1d must be at least 64");
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh64> {
        Ok(match self.scenario {
            Scenario::Square => build_rectangle(self.n, self.n)?,
            Scenario::Annulus => build_annulus(
                self.n,
                self.n_theta.unwrap_or(8 * self.n),
                self.r_in.unwrap_or(DEFAULT_R_IN),
                self.r_out.unwrap_or(DEFAULT_R_OUT),
            )?,
            Scenario::Periodic => build_periodic_cell(
                self.n,
                self.r_source.unwrap_or(DEFAULT_R_DISK),
                self.r_sink.unwrap_or(DEFAULT_R_DISK),
            )?,
        })
    }
}
