//! Steady two-species transport for a fixed design.

mod report;
mod solve;

pub use report::{energy_report, reaction_density, EnergyReport};
pub use solve::{relax_state, solve_state, solve_state_with, CoupledSystem};

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Material and boundary parameters of the transport problem.
///
/// Species 1 diffuses with `k11` in material 1 (`chi = 1`) and `k12` in
/// material 2; species 2 with `k21` and `k22` respectively.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub k11: T,
    pub k12: T,
    pub k21: T,
    pub k22: T,
    pub k_s: T,
    pub u1_star: T,
    pub u2_star: T,
    /// Volume multiplier. Only reported in constrained runs.
    pub lambda: T,
}

impl<T: Real> ModelParams<T> {
    /// Square-reactor reference set: `k11 = k22 = 1`, `k12 = k21 = 1e-6`,
    /// `k_s = 100`, `u1* = 1`, `u2* = 0`.
    pub fn reference() -> Self {
        ModelParams {
            k11: T::one(),
            k12: T::lit(1e-6),
            k21: T::lit(1e-6),
            k22: T::one(),
            k_s: T::lit(100.0),
            u1_star: T::one(),
            u2_star: T::zero(),
            lambda: T::zero(),
        }
    }

    /// Diffusivities `k11 = a`, `k22 = b` with off-phase values a fixed
    /// fraction of the on-phase ones (`k12 = ratio * k11`, `k21 = ratio * k22`).
    pub fn with_diffusivities(self, k11: T, k22: T, ratio: T) -> Self {
        ModelParams { k11, k22, k12: ratio * k11, k21: ratio * k22, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k11", self.k11),
            ("k12", self.k12),
            ("k21", self.k21),
            ("k22", self.k22),
            ("k_s", self.k_s),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive (got {v})")));
            }
        }
        if !self.u1_star.is_finite() || !self.u2_star.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("boundary values must be finite".into()));
        }
        Ok(())
    }

    /// `Δk_1 = k11 - k12`.
    pub fn dk1(&self) -> T {
        self.k11 - self.k12
    }

    /// `Δk_2 = k21 - k22`.
    pub fn dk2(&self) -> T {
        self.k21 - self.k22
    }
}

/// Nodal concentrations of both species, one value per dof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateField<T> {
    pub u1: Vec<T>,
    pub u2: Vec<T>,
}

impl<T: Real> StateField<T> {
    pub fn constant(n: usize, u1: T, u2: T) -> Self {
        StateField { u1: vec![u1; n], u2: vec![u2; n] }
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    /// `[u1, u2]` stacked into one vector.
    pub fn stacked(&self) -> Vec<T> {
        self.u1.iter().chain(&self.u2).copied().collect()
    }

    pub fn from_stacked(v: &[T]) -> Self {
        let n = v.len() / 2;
        StateField { u1: v[..n].to_vec(), u2: v[n..].to_vec() }
    }

    /// Largest entrywise difference over both species.
    pub fn max_diff(&self, other: &Self) -> T {
        self.u1
            .iter()
            .zip(&other.u1)
            .chain(self.u2.iter().zip(&other.u2))
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}
