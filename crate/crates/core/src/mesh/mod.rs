//! Triangulated 2D domains with boundary tags and optional periodic node
//! identification.
//!
//! Nodes may be duplicated across a periodic seam. Every node maps to a
//! degree of freedom (dof); slave nodes share the dof of their master, so
//! assembled systems carry one unknown per identified node group. Fields in
//! this crate are stored per dof.

mod builders;

pub use builders::{build_annulus, build_periodic_cell, build_rectangle};

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::collections::HashMap;
use std::fmt;

/// Boundary condition class of a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// Species 1 held at `u1_star`.
    Source1,
    /// Species 2 held at `u2_star`.
    Sink2,
    /// Zero flux for both species.
    Insulated,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryTag::Source1 => "Source1",
            BoundaryTag::Sink2 => "Sink2",
            BoundaryTag::Insulated => "Insulated",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Area and constant basis-function gradients of a P1 triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry<T> {
    pub area: T,
    pub grad: [[T; 2]; 3],
}

impl<T: Real> ElementGeometry<T> {
    fn from_vertices(p: [[T; 2]; 3]) -> Self {
        let two_area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
            - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let mut grad = [[T::zero(); 2]; 3];
        for (i, g) in grad.iter_mut().enumerate() {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            g[0] = (p[j][1] - p[k][1]) / two_area;
            g[1] = (p[k][0] - p[j][0]) / two_area;
        }
        ElementGeometry {
            area: two_area * T::lit(0.5),
            grad,
        }
    }

    /// Gradient of the P1 interpolant with the given vertex values.
    pub fn gradient(&self, values: [T; 3]) -> [T; 2] {
        let mut g = [T::zero(); 2];
        for (v, gi) in values.iter().zip(self.grad.iter()) {
            g[0] += *v * gi[0];
            g[1] += *v * gi[1];
        }
        g
    }
}

/// Immutable triangulation. Construct with one of the builders or
/// [`Mesh::new`], which checks the structural invariants.
#[derive(Clone, Debug)]
pub struct Mesh<T> {
    nodes: Vec<[T; 2]>,
    elements: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    periodic_pairs: Vec<(usize, usize)>,
    dof_of_node: Vec<usize>,
    num_dofs: usize,
    geometry: Vec<ElementGeometry<T>>,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh and validates it.
    ///
    /// `periodic_pairs` holds `(master, slave)` node pairs; a master may not
    /// itself be a slave and a slave may appear only once.
    pub fn new(
        nodes: Vec<[T; 2]>,
        elements: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        periodic_pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = nodes.len();
        for (e, tri) in elements.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!("element {e} references a missing node")));
            }
        }

        let mut master_of: Vec<Option<usize>> = vec![None; n];
        for &(m, s) in &periodic_pairs {
            if m >= n || s >= n || m == s {
                return Err(Error::InvalidMesh(format!("bad periodic pair ({m}, {s})")));
            }
            if master_of[s].replace(m).is_some() {
                return Err(Error::InvalidMesh(format!("node {s} is a slave twice")));
            }
        }
        for &(m, _) in &periodic_pairs {
            if master_of[m].is_some() {
                return Err(Error::InvalidMesh(format!("master node {m} is also a slave")));
            }
        }

        let mut dof_of_node = vec![usize::MAX; n];
        let mut num_dofs = 0;
        for i in 0..n {
            if master_of[i].is_none() {
                dof_of_node[i] = num_dofs;
                num_dofs += 1;
            }
        }
        for i in 0..n {
            if let Some(m) = master_of[i] {
                dof_of_node[i] = dof_of_node[m];
            }
        }

        let geometry: Vec<_> = elements
            .iter()
            .map(|t| ElementGeometry::from_vertices([nodes[t[0]], nodes[t[1]], nodes[t[2]]]))
            .collect();
        for (e, g) in geometry.iter().enumerate() {
            if !(g.area > T::zero()) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has non-positive signed area {}",
                    g.area
                )));
            }
        }

        let mut edge_count: HashMap<[usize; 2], usize> = HashMap::new();
        for tri in &elements {
            for k in 0..3 {
                *edge_count.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut seen = HashMap::new();
        for be in &boundary_edges {
            let key = edge_key(be.nodes[0], be.nodes[1]);
            if edge_count.get(&key).copied() != Some(1) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge {:?} does not belong to exactly one element",
                    be.nodes
                )));
            }
            if seen.insert(key, be.tag).is_some() {
                return Err(Error::InvalidMesh(format!("boundary edge {:?} tagged twice", be.nodes)));
            }
        }

        Ok(Mesh {
            nodes,
            elements,
            boundary_edges,
            periodic_pairs,
            dof_of_node,
            num_dofs,
            geometry,
        })
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn periodic_pairs(&self) -> &[(usize, usize)] {
        &self.periodic_pairs
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Number of unknowns per scalar field after periodic identification.
    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn dof(&self, node: usize) -> usize {
        self.dof_of_node[node]
    }

    pub fn element_dofs(&self, e: usize) -> [usize; 3] {
        let t = self.elements[e];
        [self.dof_of_node[t[0]], self.dof_of_node[t[1]], self.dof_of_node[t[2]]]
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry<T> {
        &self.geometry[e]
    }

    pub fn centroid(&self, e: usize) -> [T; 2] {
        let t = self.elements[e];
        let third = T::lit(1.0 / 3.0);
        let mut c = [T::zero(); 2];
        for &v in &t {
            c[0] += self.nodes[v][0];
            c[1] += self.nodes[v][1];
        }
        [c[0] * third, c[1] * third]
    }

    pub fn total_area(&self) -> T {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Row sums of the P1 mass matrix, per dof (`area / 3` from each element).
    pub fn lumped_mass(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.num_dofs];
        let third = T::lit(1.0 / 3.0);
        for (e, g) in self.geometry.iter().enumerate() {
            for d in self.element_dofs(e) {
                m[d] += g.area * third;
            }
        }
        m
    }

    /// Sorted node indices lying on edges with the given tag.
    pub fn tagged_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sorted dofs lying on edges with the given tag.
    pub fn tagged_dofs(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.tagged_nodes(tag).into_iter().map(|n| self.dof(n)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn count_edges(&self, tag: BoundaryTag) -> usize {
        self.boundary_edges.iter().filter(|e| e.tag == tag).count()
    }

    /// Coordinates of a representative node for every dof (the master node).
    pub fn dof_coordinates(&self) -> Vec<[T; 2]> {
        let mut out = vec![[T::zero(); 2]; self.num_dofs];
        let mut set = vec![false; self.num_dofs];
        for (i, p) in self.nodes.iter().enumerate() {
            let d = self.dof_of_node[i];
            if !set[d] {
                out[d] = *p;
                set[d] = true;
            }
        }
        out
    }

    /// Samples `f` at every dof.
    pub fn interpolate(&self, f: impl Fn([T; 2]) -> T) -> Vec<T> {
        self.dof_coordinates().into_iter().map(f).collect()
    }

    /// Expands a per-dof field to one value per node.
    pub fn to_nodal(&self, dof_values: &[T]) -> Vec<T> {
        self.dof_of_node.iter().map(|&d| dof_values[d]).collect()
    }

    /// Smallest and largest corner of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> ([T; 2], [T; 2]) {
        let mut lo = [T::infinity(); 2];
        let mut hi = [T::neg_infinity(); 2];
        for p in &self.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Longest element edge.
    pub fn max_edge_length(&self) -> T {
        let mut h = T::zero();
        for t in &self.elements {
            for k in 0..3 {
                let a = self.nodes[t[k]];
                let b = self.nodes[t[(k + 1) % 3]];
                h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        h
    }
}

fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}
