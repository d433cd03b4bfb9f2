use super::{CoupledSystem, ModelParams, StateField};
use crate::error::{Error, Result};
use crate::fem::{assemble_stiffness, boundary_flux, midpoint_integral, CoefficientField};
use crate::mesh::{BoundaryTag, Mesh};
use crate::optimizer::double_well;
use crate::scalar::Real;
use serde::Serialize;

/// Energies and boundary fluxes of a solved state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport<T> {
    /// `½∫ k1|∇u1|² + k2|∇u2|²`.
    pub transport_energy: T,
    /// `½∫ χ(1−χ) k_s (u1 − u2)²`.
    pub reaction_energy: T,
    /// `phase_field_well + phase_field_gradient`.
    pub phase_field_energy: T,
    /// `α∫ W(χ)`.
    pub phase_field_well: T,
    /// `β∫ |∇χ|²`.
    pub phase_field_gradient: T,
    /// Species 1 entering through the source.
    pub j1_in: T,
    /// Species 2 leaving through the sink.
    pub j2_out: T,
    /// `∫ χ(1−χ) k_s (u1 − u2)`.
    pub total_reaction: T,
    /// `u1* J1_in + u2* J2_out`.
    pub objective: T,
}

/// Evaluates the [`EnergyReport`] of `state` for design `chi`.
pub fn energy_report<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    state: &StateField<T>,
    params: &ModelParams<T>,
    alpha: T,
    beta: T,
) -> Result<EnergyReport<T>> {
    let sys = CoupledSystem::assemble(mesh, chi, params)?;
    sys.report(mesh, chi, state, params, alpha, beta)
}

impl<T: Real> CoupledSystem<T> {
    /// [`energy_report`] reusing already assembled operators.
    pub fn report(
        &self,
        mesh: &Mesh<T>,
        chi: &[T],
        state: &StateField<T>,
        params: &ModelParams<T>,
        alpha: T,
        beta: T,
    ) -> Result<EnergyReport<T>> {
        let n = mesh.num_dofs();
        if state.u1.len() != n || state.u2.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: state.u1.len().min(state.u2.len()) });
        }
        let half = T::lit(0.5);
        let d: Vec<T> = state.u1.iter().zip(&state.u2).map(|(a, b)| *a - *b).collect();
        let cd = self.c.apply(&d);
        let transport_energy =
            half * (self.k1.bilinear(&state.u1, &state.u1) + self.k2.bilinear(&state.u2, &state.u2));
        let reaction_energy = half * d.iter().zip(&cd).map(|(a, b)| *a * *b).sum::<T>();
        let total_reaction: T = cd.iter().copied().sum();

        let u = state.stacked();
        let zero = vec![T::zero(); 2 * n];
        let j1_in = boundary_flux(mesh, &u, &self.full, &zero, BoundaryTag::Source1)?;
        let j2_out = -boundary_flux(mesh, &u, &self.full, &zero, BoundaryTag::Sink2)?;

        let phase_field_well = alpha * midpoint_integral(mesh, chi, double_well);
        let lap = assemble_stiffness(mesh, &CoefficientField::constant(mesh, T::one()))?;
        let phase_field_gradient = beta * lap.bilinear(chi, chi);

        Ok(EnergyReport {
            transport_energy,
            reaction_energy,
            phase_field_energy: phase_field_well + phase_field_gradient,
            phase_field_well,
            phase_field_gradient,
            j1_in,
            j2_out,
            total_reaction,
            objective: params.u1_star * j1_in + params.u2_star * j2_out,
        })
    }
}

/// Nodal reaction rate `k_s χ(1−χ)(u1 − u2)`.
pub fn reaction_density<T: Real>(chi: &[T], state: &StateField<T>, k_s: T) -> Vec<T> {
    chi.iter()
        .zip(state.u1.iter().zip(&state.u2))
        .map(|(&c, (&a, &b))| k_s * c * (T::one() - c) * (a - b))
        .collect()
}
