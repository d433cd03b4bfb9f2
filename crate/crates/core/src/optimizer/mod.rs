//! Phase-field gradient flow for the design.

mod metrics;
mod newton;
mod run;
mod step;

pub use metrics::{column_means, interface_position, left_right_contrast, mixed_area};
pub use newton::ReducedHessian;
pub use run::{initial_design, run, run_observed, DesignResult, RunOptions, StateMode, StepKind, StepRecord};
pub use step::{curvature_shift, design_step, driving_force, project_volume, project_volume_along, reduced_functional, StepOperator};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Double-well potential `χ²(1−χ)²`.
pub fn double_well<T: Real>(chi: T) -> T {
    let s = chi * (T::one() - chi);
    s * s
}

/// `W'(χ) = 2χ(1−χ)(1−2χ)`.
pub fn double_well_derivative<T: Real>(chi: T) -> T {
    let two = T::lit(2.0);
    two * chi * (T::one() - chi) * (T::one() - two * chi)
}

/// Weights, mobilities and stopping rule of the design flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFieldParams<T> {
    pub alpha: T,
    pub beta: T,
    pub d_chi: T,
    pub d_u: T,
    pub dt: T,
    /// Target volume fraction of material 1.
    pub v: T,
    /// Threshold on `‖∂χ/∂t‖` in `L²`.
    pub tol: T,
    pub max_steps: usize,
}

impl<T: Real> PhaseFieldParams<T> {
    /// `α = 1`, `β = 2e-5`, `d_χ = 2e-2`, `d_u = 2e-3`, `v = 0.5`.
    pub fn reference() -> Self {
        PhaseFieldParams {
            alpha: T::one(),
            beta: T::lit(2e-5),
            d_chi: T::lit(2e-2),
            d_u: T::lit(2e-3),
            dt: T::lit(1e-3),
            v: T::lit(0.5),
            tol: T::lit(1e-6),
            max_steps: 20_000,
        }
    }

    /// 10–90 % width `2 ln 9 √(β/α)` of the planar transition layer.
    pub fn interface_width(&self) -> T {
        T::lit(2.0 * 9f64.ln()) * (self.beta / self.alpha).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("d_chi", self.d_chi),
            ("d_u", self.d_u),
            ("dt", self.dt),
            ("tol", self.tol),
        ] {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive (got {x})")));
            }
        }
        if !(self.v > T::zero() && self.v < T::one()) {
            return Err(Error::InvalidParameter(format!("volume fraction must lie in (0, 1) (got {})", self.v)));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus a check that the transition layer
    /// spans at least one mesh cell.
    pub fn validate_for(&self, mesh: &Mesh<T>) -> Result<()> {
        self.validate()?;
        let h = cell_size(mesh);
        if self.interface_width() < h {
            return Err(Error::InvalidParameter(format!(
                "interface width {} is below the mesh cell size {h}; refine the mesh or raise beta/alpha",
                self.interface_width()
            )));
        }
        Ok(())
    }
}

/// Side of the square with the same area as two average triangles.
pub fn cell_size<T: Real>(mesh: &Mesh<T>) -> T {
    (T::lit(2.0) * mesh.total_area() / T::of_usize(mesh.num_elements())).sqrt()
}
