//! Second-order refinement of a nearly stationary design.
//!
//! Late in the flow the design creeps: the remaining motion is a slow
//! rearrangement inside the mixed region whose rate is set by the weakest
//! curvature of the functional. Once the flow residual is small, projected
//! Newton steps on the free dofs finish the job in a few iterations.

use super::curvature_shift;
use crate::error::Result;
use crate::fem::{CgOptions, DirichletSystem, SparseOperator, MIDPOINT_EDGES};
use crate::mesh::Mesh;
use crate::scalar::Real;
use crate::state::{CoupledSystem, ModelParams, StateField};

/// Hessian of the reduced functional (state re-solved) at one design.
///
/// The state sensitivity `u' = −A⁻¹A'(v)u` costs one linear solve with
/// homogeneous Dirichlet data per product.
pub struct ReducedHessian<'a, T> {
    mesh: &'a Mesh<T>,
    chi: &'a [T],
    state: &'a StateField<T>,
    params: &'a ModelParams<T>,
    lap: &'a SparseOperator<T>,
    alpha: T,
    beta: T,
    sens: DirichletSystem<T>,
    cg: CgOptions<T>,
}

impl<'a, T: Real> ReducedHessian<'a, T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: &'a Mesh<T>,
        chi: &'a [T],
        state: &'a StateField<T>,
        params: &'a ModelParams<T>,
        sys: &CoupledSystem<T>,
        lap: &'a SparseOperator<T>,
        alpha: T,
        beta: T,
    ) -> Result<Self> {
        let fixed: Vec<(usize, T)> =
            CoupledSystem::dirichlet(mesh, params)?.into_iter().map(|(i, _)| (i, T::zero())).collect();
        let sens = DirichletSystem::new(&sys.full, &vec![T::zero(); sys.full.dim()], &fixed)?;
        // products only steer the Newton direction, so a looser solve suffices
        let cg = CgOptions { rtol: T::lit(1e-8).max(T::default_rtol()), max_iter: None };
        Ok(ReducedHessian { mesh, chi, state, params, lap, alpha, beta, sens, cg })
    }

    /// Overrides the relative tolerance of the sensitivity solves.
    pub fn with_rtol(mut self, rtol: T) -> Self {
        self.cg.rtol = rtol;
        self
    }

    /// `H v` where `H` is the Hessian of `L(u(χ), χ) − ½βχᵀKχ`.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        let (mesh, chi, u, p) = (self.mesh, self.chi, self.state, self.params);
        let n = mesh.num_dofs();
        let half = T::lit(0.5);
        let third = T::lit(1.0 / 3.0);
        let quarter = T::lit(0.25);
        let two = T::lit(2.0);
        let (dk1, dk2) = (p.dk1(), p.dk2());
        let diff = |i: usize| u.u1[i] - u.u2[i];

        // load −A'(v)u of the sensitivity problem
        let mut load = vec![T::zero(); 2 * n];
        for e in 0..mesh.num_elements() {
            let g = mesh.geometry(e);
            let d = mesh.element_dofs(e);
            let vbar = (v[d[0]] + v[d[1]] + v[d[2]]) * third;
            let g1 = g.gradient(d.map(|k| u.u1[k]));
            let g2 = g.gradient(d.map(|k| u.u2[k]));
            for a in 0..3 {
                let ga = g.grad[a];
                load[d[a]] -= dk1 * vbar * g.area * (ga[0] * g1[0] + ga[1] * g1[1]);
                load[n + d[a]] -= dk2 * vbar * g.area * (ga[0] * g2[0] + ga[1] * g2[1]);
            }
            for [i, j] in MIDPOINT_EDGES {
                let (a, b) = (d[i], d[j]);
                let cq = (chi[a] + chi[b]) * half;
                let dw = p.k_s * (T::one() - two * cq) * (v[a] + v[b]) * half * g.area * third * quarter;
                let s = dw * (diff(a) + diff(b));
                load[a] -= s;
                load[b] -= s;
                load[n + a] += s;
                load[n + b] += s;
            }
        }
        let w = self.sens.solve_homogeneous(&load, &self.cg)?;

        let mut hv = vec![T::zero(); n];
        for e in 0..mesh.num_elements() {
            let g = mesh.geometry(e);
            let d = mesh.element_dofs(e);
            let a3 = g.area * third;
            let g1 = g.gradient(d.map(|k| u.u1[k]));
            let g2 = g.gradient(d.map(|k| u.u2[k]));
            let w1 = g.gradient(d.map(|k| w[k]));
            let w2 = g.gradient(d.map(|k| w[n + k]));
            let t = (dk1 * (g1[0] * w1[0] + g1[1] * w1[1]) + dk2 * (g2[0] * w2[0] + g2[1] * w2[1])) * a3;
            for &k in &d {
                hv[k] += t;
            }
            for [i, j] in MIDPOINT_EDGES {
                let (a, b) = (d[i], d[j]);
                let cq = (chi[a] + chi[b]) * half;
                let dq = (diff(a) + diff(b)) * half;
                let dc = (v[a] + v[b]) * half;
                let ddq = (w[a] - w[n + a] + w[b] - w[n + b]) * half;
                let w2nd = two - T::lit(12.0) * cq + T::lit(12.0) * cq * cq;
                let f = (p.k_s * dq * ddq * (T::one() - two * cq) - p.k_s * dq * dq * dc - self.alpha * w2nd * dc)
                    * a3
                    * half;
                hv[a] += f;
                hv[b] += f;
            }
        }
        let kv = self.lap.apply(v);
        for (h, k) in hv.iter_mut().zip(kv) {
            *h -= self.beta * k;
        }
        Ok(hv)
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Free dofs and the volume multiplier `c` of the gradient `g` (driving
/// force minus gradient penalty): a dof at a bound stays fixed while `g − c m`
/// pushes it outward.
pub(crate) fn free_set<T: Real>(chi: &[T], g: &[T], mass: &[T]) -> (Vec<bool>, T) {
    let tau = T::lit(1e-12);
    let interior: Vec<bool> = chi.iter().map(|&c| c > tau && c < T::one() - tau).collect();
    let mult = |free: &[bool]| -> T {
        let (mut gs, mut ms) = (T::zero(), T::zero());
        for i in 0..g.len() {
            if free[i] {
                gs += g[i];
                ms += mass[i];
            }
        }
        if ms > T::zero() {
            gs / ms
        } else {
            T::zero()
        }
    };
    let c0 = mult(&interior);
    let free: Vec<bool> = (0..chi.len())
        .map(|i| {
            let r = g[i] - c0 * mass[i];
            interior[i] || (chi[i] <= tau && r > T::zero()) || (chi[i] >= T::one() - tau && r < T::zero())
        })
        .collect();
    let c = mult(&free);
    (free, c)
}

/// Projected Newton direction on the free dofs: truncated conjugate
/// gradients for `−H δ = g − c m` restricted to `Σ m δ = 0`, preconditioned
/// by the curvature bound of the flow. Stops at negative curvature of `−H`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn newton_direction<T: Real>(
    hess: &ReducedHessian<'_, T>,
    g: &[T],
    mass: &[T],
    max_iter: usize,
    rtol: T,
) -> Result<Vec<T>> {
    let (mesh, chi, state, params) = (hess.mesh, hess.chi, hess.state, hess.params);
    let n = chi.len();
    let (free, c) = free_set(chi, g, mass);
    let shift = curvature_shift(mesh, chi, state, params, hess.alpha);
    let kdiag = hess.lap.diagonal();
    let pre: Vec<T> = (0..n).map(|i| shift[i] + hess.beta * kdiag[i]).collect();
    let mask = |x: &mut Vec<T>| {
        for (xi, f) in x.iter_mut().zip(&free) {
            if !*f {
                *xi = T::zero();
            }
        }
    };
    // projected preconditioner: z = P⁻¹r − P⁻¹m (mᵀP⁻¹r)/(mᵀP⁻¹m) on free dofs
    let pm: Vec<T> = (0..n).map(|i| if free[i] { mass[i] / pre[i] } else { T::zero() }).collect();
    let mpm = dot(mass, &pm);
    let precond = |r: &[T]| -> Vec<T> {
        let mut z: Vec<T> = (0..n).map(|i| if free[i] { r[i] / pre[i] } else { T::zero() }).collect();
        if mpm > T::zero() {
            let s = dot(mass, &z) / mpm;
            for i in 0..n {
                z[i] -= s * pm[i];
            }
        }
        z
    };
    let mut r: Vec<T> = (0..n).map(|i| if free[i] { g[i] - c * mass[i] } else { T::zero() }).collect();
    let mut delta = vec![T::zero(); n];
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let rz0 = rz;
    if rz0 <= T::zero() {
        return Ok(delta);
    }
    for _ in 0..max_iter {
        let mut q = hess.apply(&p)?;
        for x in q.iter_mut() {
            *x = -*x;
        }
        mask(&mut q);
        let curv = dot(&p, &q);
        if curv <= T::zero() {
            if delta.iter().all(|&x| x == T::zero()) {
                return Ok(z);
            }
            break;
        }
        let step = rz / curv;
        for i in 0..n {
            delta[i] += step * p[i];
            r[i] -= step * q[i];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        if rz_new <= rtol * rtol * rz0 {
            break;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(delta)
}
