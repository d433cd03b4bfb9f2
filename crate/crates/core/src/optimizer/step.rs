use super::{double_well, double_well_derivative, PhaseFieldParams};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_stiffness, check_design, midpoint_integral, solve_spd_with, CgOptions, CoefficientField, SparseOperator,
    MIDPOINT_EDGES,
};
use crate::mesh::Mesh;
use crate::scalar::{clamp, Real};
use crate::state::{CoupledSystem, ModelParams, StateField};

/// Weak driving force `b_j = ∂L/∂χ_j` at fixed state, without the gradient
/// penalty and the multiplier:
/// `F = Σ(Δk_i/2)|∇u_i|² + ½k_s(u1 − u2)²(1 − 2χ) − αW'(χ)` tested against
/// the hat function of dof `j`.
///
/// Transport terms use the element-average coefficient, so their
/// derivative spreads `1/3` of each element onto its vertices; reaction and
/// well terms use the edge-midpoint rule of the assembled operators.
pub fn driving_force<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    state: &StateField<T>,
    params: &ModelParams<T>,
    alpha: T,
) -> Result<Vec<T>> {
    check_design(mesh, chi)?;
    let n = mesh.num_dofs();
    if state.u1.len() != n || state.u2.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: state.u1.len().min(state.u2.len()) });
    }
    let half = T::lit(0.5);
    let third = T::lit(1.0 / 3.0);
    let (dk1, dk2) = (params.dk1(), params.dk2());
    let mut b = vec![T::zero(); n];
    for e in 0..mesh.num_elements() {
        let g = mesh.geometry(e);
        let d = mesh.element_dofs(e);
        let a3 = g.area * third;
        let g1 = g.gradient(d.map(|k| state.u1[k]));
        let g2 = g.gradient(d.map(|k| state.u2[k]));
        let t = half * (dk1 * (g1[0] * g1[0] + g1[1] * g1[1]) + dk2 * (g2[0] * g2[0] + g2[1] * g2[1])) * a3;
        for &k in &d {
            b[k] += t;
        }
        for [i, j] in MIDPOINT_EDGES {
            let (p, q) = (d[i], d[j]);
            let cq = (chi[p] + chi[q]) * half;
            let dq = (state.u1[p] - state.u2[p] + state.u1[q] - state.u2[q]) * half;
            let f = (half * params.k_s * dq * dq * (T::one() - T::lit(2.0) * cq) - alpha * double_well_derivative(cq))
                * a3
                * half;
            b[p] += f;
            b[q] += f;
        }
    }
    Ok(b)
}

/// Lower cap on `χ(1−χ)` in the reaction part of [`curvature_shift`].
const REACTION_FLOOR: f64 = 0.05;

/// Nonnegative diagonal bound of the curvature of the reduced functional:
/// `max(0, −∂b_j/∂χ_j)` of the reaction and well parts at fixed state plus,
/// per element, the fixed-flux transport curvature `Δk_i²|∇u_i|²/k_i`
/// spread over the vertices. Adding it to the implicit operator stabilizes
/// large steps without moving stationary points.
pub fn curvature_shift<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    state: &StateField<T>,
    params: &ModelParams<T>,
    alpha: T,
) -> Vec<T> {
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let third = T::lit(1.0 / 3.0);
    let mut h = vec![T::zero(); mesh.num_dofs()];
    let mut t = vec![T::zero(); mesh.num_dofs()];
    let k1 = CoefficientField::from_design(mesh, chi, params.k11, params.k12);
    let k2 = CoefficientField::from_design(mesh, chi, params.k21, params.k22);
    let (dk1, dk2) = (params.dk1(), params.dk2());
    for e in 0..mesh.num_elements() {
        let g = mesh.geometry(e);
        let d = mesh.element_dofs(e);
        let a3 = g.area * third;
        let g1 = g.gradient(d.map(|k| state.u1[k]));
        let g2 = g.gradient(d.map(|k| state.u2[k]));
        let c = (dk1 * dk1 * (g1[0] * g1[0] + g1[1] * g1[1]) / k1.values()[e]
            + dk2 * dk2 * (g2[0] * g2[0] + g2[1] * g2[1]) / k2.values()[e])
            * a3;
        for &k in &d {
            t[k] += c;
        }
        for [i, j] in MIDPOINT_EDGES {
            let (p, q) = (d[i], d[j]);
            let cq = (chi[p] + chi[q]) * half;
            let dq = (state.u1[p] - state.u2[p] + state.u1[q] - state.u2[q]) * half;
            let w2 = T::lit(2.0) - T::lit(12.0) * cq + T::lit(12.0) * cq * cq;
            let c = (params.k_s * dq * dq + alpha * w2) * a3 * quarter;
            h[p] += c;
            h[q] += c;
            let s = T::one() - T::lit(2.0) * cq;
            let r = params.k_s * s * s * dq * dq * a3 * half / (cq * (T::one() - cq)).max(T::lit(REACTION_FLOOR));
            t[p] += r;
            t[q] += r;
        }
    }
    h.into_iter().zip(t).map(|(x, y)| x.max(T::zero()) + y).collect()
}

/// Semi-implicit step operator `d_χ/dt · M + β K` with lumped mass `M` and
/// unit-coefficient stiffness `K` (zero-flux boundary for `χ`).
#[derive(Clone, Debug)]
pub struct StepOperator<T> {
    lap: SparseOperator<T>,
    mass: Vec<T>,
    beta: T,
    d_chi: T,
    dt: T,
    op: SparseOperator<T>,
}

impl<T: Real> StepOperator<T> {
    pub fn new(mesh: &Mesh<T>, pf: &PhaseFieldParams<T>) -> Result<Self> {
        pf.validate()?;
        let lap = assemble_stiffness(mesh, &CoefficientField::constant(mesh, T::one()))?;
        let mass = mesh.lumped_mass();
        let op = Self::build(&lap, &mass, pf.beta, pf.d_chi / pf.dt);
        Ok(StepOperator { lap, mass, beta: pf.beta, d_chi: pf.d_chi, dt: pf.dt, op })
    }

    fn build(lap: &SparseOperator<T>, mass: &[T], beta: T, rate: T) -> SparseOperator<T> {
        let m = SparseOperator::from_triplets(
            mass.len(),
            mass.iter().enumerate().map(|(i, &v)| (i, i, v * rate)).collect(),
            true,
        );
        m.plus(&lap.scaled(beta))
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn set_dt(&mut self, dt: T) {
        if dt != self.dt {
            self.dt = dt;
            self.op = Self::build(&self.lap, &self.mass, self.beta, self.d_chi / dt);
        }
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn laplacian(&self) -> &SparseOperator<T> {
        &self.lap
    }

    /// `½β χᵀKχ`.
    pub fn gradient_penalty(&self, chi: &[T]) -> T {
        T::lit(0.5) * self.beta * self.lap.bilinear(chi, chi)
    }

    /// Solves `(d_χ/dt M + βK) χ⁺ = d_χ/dt M χ + b` in increment form.
    pub fn advance(&self, chi: &[T], b: &[T]) -> Result<Vec<T>> {
        let kchi = self.lap.apply(chi);
        let rhs: Vec<T> = b.iter().zip(&kchi).map(|(bi, ki)| *bi - self.beta * *ki).collect();
        let delta = solve_spd_with(&self.op, &rhs, None, &CgOptions::default())?.x;
        Ok(chi.iter().zip(&delta).map(|(c, d)| *c + *d).collect())
    }

    /// Step of size `dt` with `diag(shift)` added to the implicit operator
    /// `P`. Also returns `P⁻¹M`, the direction of the matching volume
    /// correction (see [`project_volume_along`]).
    pub fn advance_shifted(&self, chi: &[T], b: &[T], dt: T, shift: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let rate = self.d_chi / dt;
        let diag = SparseOperator::from_triplets(
            self.mass.len(),
            self.mass.iter().zip(shift).enumerate().map(|(i, (&m, &s))| (i, i, m * rate + s)).collect(),
            true,
        );
        let op = diag.plus(&self.lap.scaled(self.beta));
        let kchi = self.lap.apply(chi);
        let rhs: Vec<T> = b.iter().zip(&kchi).map(|(bi, ki)| *bi - self.beta * *ki).collect();
        let cg = CgOptions::default();
        let delta = solve_spd_with(&op, &rhs, None, &cg)?.x;
        let dir = solve_spd_with(&op, &self.mass, None, &cg)?.x;
        Ok((chi.iter().zip(&delta).map(|(c, d)| *c + *d).collect(), dir))
    }

    /// `‖a − b‖` in the lumped-mass norm.
    pub fn mass_norm_diff(&self, a: &[T], b: &[T]) -> T {
        self.mass.iter().zip(a.iter().zip(b)).map(|(m, (x, y))| *m * (*x - *y) * (*x - *y)).sum::<T>().sqrt()
    }
}

/// One semi-implicit design step without the volume projection.
pub fn design_step<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    state: &StateField<T>,
    params: &ModelParams<T>,
    pf: &PhaseFieldParams<T>,
) -> Result<Vec<T>> {
    let b = driving_force(mesh, chi, state, params, pf.alpha)?;
    StepOperator::new(mesh, pf)?.advance(chi, &b)
}

/// Functional ascended by the design flow,
/// `½∫k_i|∇u_i|² + ½∫χ(1−χ)k_s(u1−u2)² − α∫W(χ) − ½β∫|∇χ|²`,
/// evaluated at the given state.
pub fn reduced_functional<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    state: &StateField<T>,
    params: &ModelParams<T>,
    pf: &PhaseFieldParams<T>,
) -> Result<T> {
    let sys = CoupledSystem::assemble(mesh, chi, params)?;
    let lap = assemble_stiffness(mesh, &CoefficientField::constant(mesh, T::one()))?;
    functional_with(mesh, chi, state, &sys, &lap, pf)
}

pub(crate) fn functional_with<T: Real>(
    mesh: &Mesh<T>,
    chi: &[T],
    state: &StateField<T>,
    sys: &CoupledSystem<T>,
    lap: &SparseOperator<T>,
    pf: &PhaseFieldParams<T>,
) -> Result<T> {
    let half = T::lit(0.5);
    let d: Vec<T> = state.u1.iter().zip(&state.u2).map(|(a, b)| *a - *b).collect();
    let e = half * (sys.k1.bilinear(&state.u1, &state.u1) + sys.k2.bilinear(&state.u2, &state.u2) + sys.c.bilinear(&d, &d));
    Ok(e - pf.alpha * midpoint_integral(mesh, chi, double_well) - half * pf.beta * lap.bilinear(chi, chi))
}

/// Shift-and-clamp projection onto `{0 ≤ χ ≤ 1, Σ w χ = v Σ w}`.
///
/// Finds the scalar `c` with `Σ w clamp(χ + c, 0, 1) = v Σ w` by bisection and
/// returns the projected field and `c`. With `w` the lumped mass this is the
/// projection in the lumped `L²` metric.
pub fn project_volume<T: Real>(chi: &[T], weights: &[T], v: T) -> Result<(Vec<T>, T)> {
    project_volume_along(chi, &vec![T::one(); chi.len()], weights, v)
}

/// [`project_volume`] moving each entry by `c · dir_j` instead of `c`.
///
/// With `dir = P⁻¹w` for a step metric `P` this is the volume correction
/// consistent with that metric. `dir` must be positive.
pub fn project_volume_along<T: Real>(chi: &[T], dir: &[T], weights: &[T], v: T) -> Result<(Vec<T>, T)> {
    if chi.len() != weights.len() || dir.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), got: chi.len().min(dir.len()) });
    }
    if !(v > T::zero() && v < T::one()) {
        return Err(Error::InvalidParameter(format!("volume fraction must lie in (0, 1) (got {v})")));
    }
    let (zero, one) = (T::zero(), T::one());
    let top = dir.iter().copied().fold(zero, T::max);
    if !(top > zero) || !top.is_finite() {
        return Err(Error::InvalidParameter("projection direction must be positive".into()));
    }
    let floor = top * T::lit(1e-12);
    let dir: Vec<T> = dir.iter().map(|&q| q.max(floor)).collect();
    let total: T = weights.iter().copied().sum();
    let target = v * total;
    let at = |c: T| chi.iter().zip(&dir).map(move |(x, q)| clamp(*x + c * *q, zero, one));
    let volume = |c: T| -> T { at(c).zip(weights).map(|(x, w)| *w * x).sum() };

    let in_range = chi.iter().all(|&x| x >= zero && x <= one);
    if in_range && (volume(zero) - target).abs() <= T::epsilon() * T::lit(4.0) * total {
        return Ok((chi.to_vec(), zero));
    }
    let lo0 = chi.iter().zip(&dir).map(|(x, q)| -*x / *q).fold(T::infinity(), T::min);
    let hi0 = chi.iter().zip(&dir).map(|(x, q)| (one - *x) / *q).fold(T::neg_infinity(), T::max);
    let (mut lo, mut hi) = (lo0.min(zero), hi0.max(zero));
    let two = T::lit(2.0);
    for _ in 0..300 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if volume(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = if (volume(lo) - target).abs() <= (volume(hi) - target).abs() { lo } else { hi };
    Ok((at(c).collect(), c))
}
