//! Finite-element design of two-species reaction-diffusion reactors.
//!
//! The crate solves the steady coupled transport problem
//! `div(k_i grad u_i) = f_i`, `f_1 = -f_2 = chi (1 - chi) k_s (u_1 - u_2)`
//! on P1 triangles for a given material arrangement `chi`, and evolves `chi`
//! by a phase-field gradient flow to maximize the flux through the reactor.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are the double-precision instantiations used by the CLI.

pub mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod optimizer;
pub mod relaxed;
pub mod scalar;
pub mod state;
pub mod validation1d;

pub use error::{Error, Result};
pub use mesh::{BoundaryTag, Mesh};
pub use scalar::Real;
pub use optimizer::{DesignResult, PhaseFieldParams, RunOptions, StepRecord};
pub use relaxed::{RelaxedPoint, Region};
pub use state::{EnergyReport, ModelParams, StateField};

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
pub type StateField64 = StateField<f64>;
pub type StateField32 = StateField<f32>;
pub type EnergyReport64 = EnergyReport<f64>;
pub type RelaxedPoint64 = RelaxedPoint<f64>;
pub type PhaseFieldParams64 = PhaseFieldParams<f64>;
pub type DesignResult64 = DesignResult<f64>;
