use super::solver::{solve_spd_with, CgOptions};
use super::SparseOperator;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::scalar::Real;

/// A linear system `A u = f` with some entries of `u` prescribed.
///
/// The reduced operator acts on the free unknowns only; the fixed values
/// are moved to the right-hand side.
#[derive(Clone, Debug)]
pub struct DirichletSystem<T> {
    free: Vec<usize>,
    fixed: Vec<(usize, T)>,
    reduced: SparseOperator<T>,
    rhs: Vec<T>,
    dim: usize,
}

impl<T: Real> DirichletSystem<T> {
    /// `fixed` lists `(index, value)` pairs; indices must be distinct.
    pub fn new(op: &SparseOperator<T>, load: &[T], fixed: &[(usize, T)]) -> Result<Self> {
        let n = op.dim();
        if load.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: load.len() });
        }
        let mut value = vec![None; n];
        for &(i, v) in fixed {
            if i >= n {
                return Err(Error::DimensionMismatch { expected: n, got: i });
            }
            value[i] = Some(v);
        }
        let free: Vec<usize> = (0..n).filter(|&i| value[i].is_none()).collect();
        let reduced = op.principal_submatrix(&free);
        let rhs = free
            .iter()
            .map(|&i| {
                let mut acc = load[i];
                for (j, a) in op.row(i) {
                    if let Some(v) = value[j] {
                        acc -= a * v;
                    }
                }
                acc
            })
            .collect();
        let mut fixed = fixed.to_vec();
        fixed.sort_unstable_by_key(|p| p.0);
        Ok(DirichletSystem { free, fixed, reduced, rhs, dim: n })
    }

    /// The operator on free unknowns.
    pub fn reduced(&self) -> &SparseOperator<T> {
        &self.reduced
    }

    pub fn reduced_rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Solves and returns the full vector (fixed entries exact).
    pub fn solve(&self, initial: Option<&[T]>, opts: &CgOptions<T>) -> Result<Vec<T>> {
        let x0: Option<Vec<T>> = initial.map(|g| self.free.iter().map(|&i| g[i]).collect());
        let sol = solve_spd_with(&self.reduced, &self.rhs, x0.as_deref(), opts)?;
        Ok(self.expand(&sol.x))
    }

    /// Solves with the fixed entries held at zero and load `load` (full
    /// length; entries at fixed indices are ignored).
    pub fn solve_homogeneous(&self, load: &[T], opts: &CgOptions<T>) -> Result<Vec<T>> {
        if load.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: load.len() });
        }
        let rhs: Vec<T> = self.free.iter().map(|&i| load[i]).collect();
        let sol = solve_spd_with(&self.reduced, &rhs, None, opts)?;
        let mut u = vec![T::zero(); self.dim];
        for (&i, &v) in self.free.iter().zip(&sol.x) {
            u[i] = v;
        }
        Ok(u)
    }

    /// Scatters free values into a full vector with the fixed values set.
    pub fn expand(&self, free_values: &[T]) -> Vec<T> {
        let mut u = vec![T::zero(); self.dim];
        for (&i, &v) in self.free.iter().zip(free_values) {
            u[i] = v;
        }
        for &(i, v) in &self.fixed {
            u[i] = v;
        }
        u
    }
}

/// Consistent boundary flux through the Dirichlet nodes of `tag`.
///
/// Sums the unconstrained residual `(op u - rhs)_j` over the constrained
/// dofs; this is the inward flux `∫ k ∇u·n̂ dA` (outward normal) of the
/// species held on that boundary. For the coupled two-species operator
/// (dimension `2 * num_dofs`) `Source1` selects species 1 and `Sink2`
/// species 2.
pub fn boundary_flux<T: Real>(
    mesh: &Mesh<T>,
    u: &[T],
    op: &SparseOperator<T>,
    rhs: &[T],
    tag: BoundaryTag,
) -> Result<T> {
    let n = mesh.num_dofs();
    let offset = if op.dim() == n {
        0
    } else if op.dim() == 2 * n {
        match tag {
            BoundaryTag::Source1 => 0,
            BoundaryTag::Sink2 => n,
            BoundaryTag::Insulated => return Err(Error::NoDirichletNodes(tag.to_string())),
        }
    } else {
        return Err(Error::DimensionMismatch { expected: n, got: op.dim() });
    };
    if tag == BoundaryTag::Insulated {
        return Err(Error::NoDirichletNodes(tag.to_string()));
    }
    let dofs = mesh.tagged_dofs(tag);
    if dofs.is_empty() {
        return Err(Error::NoDirichletNodes(tag.to_string()));
    }
    if u.len() != op.dim() || rhs.len() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: u.len().min(rhs.len()) });
    }
    let mut flux = T::zero();
    for d in dofs {
        let i = d + offset;
        let mut r = -rhs[i];
        for (j, a) in op.row(i) {
            r += a * u[j];
        }
        flux += r;
    }
    Ok(flux)
}
