use super::SparseOperator;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Slack allowed when checking that a design lies in `[0, 1]`.
pub const CHI_SLACK: f64 = 1e-12;

/// Piecewise-constant per-element coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField<T> {
    values: Vec<T>,
}

impl<T: Real> CoefficientField<T> {
    pub fn new(values: Vec<T>) -> Self {
        CoefficientField { values }
    }

    pub fn constant(mesh: &Mesh<T>, value: T) -> Self {
        CoefficientField { values: vec![value; mesh.elements().len()] }
    }

    /// `k_mat1 * chi_e + k_mat2 * (1 - chi_e)` with `chi_e` the element
    /// average of the nodal design.
    pub fn from_design(mesh: &Mesh<T>, chi: &[T], k_mat1: T, k_mat2: T) -> Self {
        let third = T::lit(1.0 / 3.0);
        let values = (0..mesh.num_elements())
            .map(|e| {
                let d = mesh.element_dofs(e);
                let avg = (chi[d[0]] + chi[d[1]] + chi[d[2]]) * third;
                k_mat1 * avg + k_mat2 * (T::one() - avg)
            })
            .collect();
        CoefficientField { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn scaled(&self, s: T) -> Self {
        CoefficientField { values: self.values.iter().map(|v| *v * s).collect() }
    }
}

/// Checks `len` and the `[0, 1]` bounds of a nodal design.
pub fn check_design<T: Real>(mesh: &Mesh<T>, chi: &[T]) -> Result<()> {
    if chi.len() != mesh.num_dofs() {
        return Err(Error::DimensionMismatch { expected: mesh.num_dofs(), got: chi.len() });
    }
    let slack = T::lit(CHI_SLACK);
    for (dof, &c) in chi.iter().enumerate() {
        if !(c >= -slack && c <= T::one() + slack) {
            return Err(Error::DesignOutOfRange { dof, value: c.to_f64_lossy() });
        }
    }
    Ok(())
}

/// P1 stiffness matrix `∫ k ∇φ_a·∇φ_b` with a per-element coefficient.
pub fn assemble_stiffness<T: Real>(mesh: &Mesh<T>, coeff: &CoefficientField<T>) -> Result<SparseOperator<T>> {
    if coeff.values.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch { expected: mesh.num_elements(), got: coeff.values.len() });
    }
    if let Some(e) = coeff.values.iter().position(|&k| !(k > T::zero())) {
        return Err(Error::InvalidParameter(format!(
            "diffusivity on element {e} is not positive ({})",
            coeff.values[e]
        )));
    }
    let mut trip = Vec::with_capacity(9 * mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let g = mesh.geometry(e);
        let d = mesh.element_dofs(e);
        let w = coeff.values[e] * g.area;
        for a in 0..3 {
            for b in 0..3 {
                let v = w * (g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1]);
                trip.push((d[a], d[b], v));
            }
        }
    }
    Ok(SparseOperator::from_triplets(mesh.num_dofs(), trip, true))
}

/// Edge-midpoint quadrature on a triangle: each midpoint carries `area / 3`
/// and touches the two vertices of its edge with basis value `1/2`.
pub(crate) const MIDPOINT_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Reaction coupling matrix `C_ab = ∫ k_s chi (1 - chi) φ_a φ_b`.
///
/// `chi` is interpolated to the edge midpoints. The coupled system applies
/// `C (u1 - u2)` to species 1 and `-C (u1 - u2)` to species 2.
pub fn assemble_reaction<T: Real>(mesh: &Mesh<T>, chi: &[T], k_s: T) -> Result<SparseOperator<T>> {
    check_design(mesh, chi)?;
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let third = T::lit(1.0 / 3.0);
    let mut trip = Vec::with_capacity(12 * mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let area = mesh.geometry(e).area;
        let d = mesh.element_dofs(e);
        for [i, j] in MIDPOINT_EDGES {
            let cq = (chi[d[i]] + chi[d[j]]) * half;
            let w = k_s * cq * (T::one() - cq) * area * third * quarter;
            trip.push((d[i], d[i], w));
            trip.push((d[j], d[j], w));
            trip.push((d[i], d[j], w));
            trip.push((d[j], d[i], w));
        }
    }
    Ok(SparseOperator::from_triplets(mesh.num_dofs(), trip, true))
}

/// `∫ f(chi)` with `chi` interpolated to edge midpoints.
pub fn midpoint_integral<T: Real>(mesh: &Mesh<T>, chi: &[T], f: impl Fn(T) -> T) -> T {
    let half = T::lit(0.5);
    let third = T::lit(1.0 / 3.0);
    let mut acc = T::zero();
    for e in 0..mesh.num_elements() {
        let d = mesh.element_dofs(e);
        let s: T = MIDPOINT_EDGES.iter().map(|&[i, j]| f((chi[d[i]] + chi[d[j]]) * half)).sum();
        acc += s * mesh.geometry(e).area * third;
    }
    acc
}

/// Diagonal operator holding the lumped mass of every dof.
pub fn lumped_mass_operator<T: Real>(mesh: &Mesh<T>) -> SparseOperator<T> {
    let m = mesh.lumped_mass();
    let trip = m.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect();
    SparseOperator::from_triplets(mesh.num_dofs(), trip, true)
}
