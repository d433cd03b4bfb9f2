//! P1 finite-element operators and linear solvers.

mod assembly;
mod constrained;
mod solver;
mod sparse;

pub use assembly::{
    assemble_reaction, assemble_stiffness, check_design, lumped_mass_operator, midpoint_integral, CoefficientField,
    CHI_SLACK,
};
pub(crate) use assembly::MIDPOINT_EDGES;
pub use constrained::{boundary_flux, DirichletSystem};
pub use solver::{solve_spd, solve_spd_with, CgOptions, CgSolution};
pub use sparse::SparseOperator;
