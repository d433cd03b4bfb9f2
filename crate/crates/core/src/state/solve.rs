use super::{ModelParams, StateField};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_reaction, assemble_stiffness, check_design, CgOptions, CoefficientField,
    DirichletSystem, SparseOperator,
};
use crate::mesh::{BoundaryTag, Mesh};
use crate::scalar::Real;

/// Assembled operators of the coupled transport problem for one design.
///
/// `full` is the block operator `[[K1 + C, -C], [-C, K2 + C]]` acting on
/// `[u1, u2]`, i.e. the matrix form of `χ(1-χ) A u` with
/// `A = k_s [[1, -1], [-1, 1]]`.
#[derive(Clone, Debug)]
pub struct CoupledSystem<T> {
    pub k1: SparseOperator<T>,
    pub k2: SparseOperator<T>,
    pub c: SparseOperator<T>,
    pub full: SparseOperator<T>,
}

impl<T: Real> CoupledSystem<T> {
    pub fn assemble(mesh: &Mesh<T>, chi: &[T], params: &ModelParams<T>) -> Result<Self> {
        params.validate()?;
        check_design(mesh, chi)?;
        let k1 = assemble_stiffness(mesh, &CoefficientField::from_design(mesh, chi, params.k11, params.k12))?;
        let k2 = assemble_stiffness(mesh, &CoefficientField::from_design(mesh, chi, params.k21, params.k22))?;
        let c = assemble_reaction(mesh, chi, params.k_s)?;
        let neg_c = c.scaled(-T::one());
        let full = SparseOperator::block2x2(&k1.plus(&c), &neg_c, &neg_c, &k2.plus(&c), true);
        Ok(CoupledSystem { k1, k2, c, full })
    }

    /// Dirichlet data of the stacked unknown: species 1 on the source,
    /// species 2 on the sink.
    pub fn dirichlet(mesh: &Mesh<T>, params: &ModelParams<T>) -> Result<Vec<(usize, T)>> {
        let n = mesh.num_dofs();
        let src = mesh.tagged_dofs(BoundaryTag::Source1);
        let snk = mesh.tagged_dofs(BoundaryTag::Sink2);
        if src.is_empty() {
            return Err(Error::NoDirichletNodes(BoundaryTag::Source1.to_string()));
        }
        if snk.is_empty() {
            return Err(Error::NoDirichletNodes(BoundaryTag::Sink2.to_string()));
        }
        Ok(src
            .into_iter()
            .map(|d| (d, params.u1_star))
            .chain(snk.into_iter().map(|d| (d + n, params.u2_star)))
            .collect())
    }

    pub fn solve(
        &self,
        mesh: &Mesh<T>,
        params: &ModelParams<T>,
        initial: Option<&StateField<T>>,
        cg: &CgOptions<T>,
    ) -> Result<StateField<T>> {
        let fixed = Self::dirichlet(mesh, params)?;
        let zero = vec![T::zero(); self.full.dim()];
        let sys = DirichletSystem::new(&self.full, &zero, &fixed)?;
        let guess = initial.map(|s| s.stacked());
        let u = sys.solve(guess.as_deref(), cg)?;
        Ok(StateField::from_stacked(&u))
    }
}

/// Solves the steady coupled problem for design `chi`.
pub fn solve_state<T: Real>(mesh: &Mesh<T>, chi: &[T], params: &ModelParams<T>) -> Result<StateField<T>> {
    solve_state_with(mesh, chi, params, None, &CgOptions::default())
}

/// [`solve_state`] with an initial guess and explicit solver tolerance.
pub fn solve_state_with<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    params: &ModelParams<T>,
    initial: Option<&StateField<T>>,
    cg: &CgOptions<T>,
) -> Result<StateField<T>> {
    CoupledSystem::assemble(mesh, chi, params)?.solve(mesh, params, initial, cg)
}

/// Pseudo-time relaxation `d_u ∂u_i/∂t = ∇·k_i∇u_i − χ(1−χ)(A u)_i`.
///
/// Diffusion is implicit (lumped mass), the reaction coupling explicit.
/// Each species keeps its own Dirichlet values fixed.
pub fn relax_state<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    params: &ModelParams<T>,
    state0: &StateField<T>,
    dt: T,
    d_u: T,
    n_steps: usize,
) -> Result<StateField<T>> {
    if !(dt > T::zero()) || !(d_u > T::zero()) {
        return Err(Error::InvalidParameter("dt and d_u must be positive".into()));
    }
    let n = mesh.num_dofs();
    if state0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: state0.len() });
    }
    let sys = CoupledSystem::assemble(mesh, chi, params)?;
    let fixed = CoupledSystem::dirichlet(mesh, params)?;
    let rate = d_u / dt;
    let mass = mesh.lumped_mass();
    let mass_op = SparseOperator::from_triplets(
        n,
        mass.iter().enumerate().map(|(i, &m)| (i, i, m * rate)).collect(),
        true,
    );
    let fixed1: Vec<(usize, T)> = fixed.iter().filter(|p| p.0 < n).copied().collect();
    let fixed2: Vec<(usize, T)> = fixed.iter().filter(|p| p.0 >= n).map(|&(i, v)| (i - n, v)).collect();
    let op1 = mass_op.plus(&sys.k1);
    let op2 = mass_op.plus(&sys.k2);
    let cg = CgOptions::default();

    let mut state = state0.clone();
    for &(i, v) in &fixed1 {
        state.u1[i] = v;
    }
    for &(i, v) in &fixed2 {
        state.u2[i] = v;
    }
    let norm = |s: &StateField<T>| s.u1.iter().chain(&s.u2).map(|v| *v * *v).sum::<T>().sqrt();
    let base = norm(&state).max(T::one());

    for step in 1..=n_steps {
        let d: Vec<T> = state.u1.iter().zip(&state.u2).map(|(a, b)| *a - *b).collect();
        let cd = sys.c.apply(&d);
        let rhs1: Vec<T> = (0..n).map(|i| mass[i] * rate * state.u1[i] - cd[i]).collect();
        let rhs2: Vec<T> = (0..n).map(|i| mass[i] * rate * state.u2[i] + cd[i]).collect();
        let u1 = DirichletSystem::new(&op1, &rhs1, &fixed1)?.solve(Some(&state.u1), &cg)?;
        let u2 = DirichletSystem::new(&op2, &rhs2, &fixed2)?.solve(Some(&state.u2), &cg)?;
        state = StateField { u1, u2 };
        let growth = norm(&state) / base;
        if !(growth <= T::lit(1e6)) {
            return Err(Error::Diverged { step, growth: growth.to_f64_lossy() });
        }
    }
    Ok(state)
}
