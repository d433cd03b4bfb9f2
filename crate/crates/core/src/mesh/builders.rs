use super::{edge_key, BoundaryEdge, BoundaryTag, Mesh};
use crate::error::{Error, Result};
use crate::scalar::Real;
use std::collections::HashMap;

/// Splits the structured cell with lower-left corner `(i, j)` into two
/// counterclockwise triangles. The diagonal alternates with the parity of
/// `i + j` (crisscross).
fn split_cell(i: usize, j: usize, a: usize, b: usize, c: usize, d: usize) -> [[usize; 3]; 2] {
    // a = (i, j), b = (i+1, j), c = (i+1, j+1), d = (i, j+1)
    if (i + j) % 2 == 0 {
        [[a, b, c], [a, c, d]]
    } else {
        [[a, b, d], [b, c, d]]
    }
}

/// Structured crisscross triangulation of the unit square.
///
/// The left face is the species-1 source, the right face the species-2 sink,
/// top and bottom are insulated.
pub fn build_rectangle<T: Real>(nx: usize, ny: usize) -> Result<Mesh<T>> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidMesh(format!(
            "rectangle needs nx, ny >= 2 (got {nx} x {ny})"
        )));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([T::of_usize(i) / T::of_usize(nx), T::of_usize(j) / T::of_usize(ny)]);
        }
    }
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let tris = split_cell(i, j, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.extend_from_slice(&tris);
        }
    }
    let mut edges = Vec::with_capacity(2 * (nx + ny));
    for j in 0..ny {
        edges.push(BoundaryEdge { nodes: [id(0, j + 1), id(0, j)], tag: BoundaryTag::Source1 });
        edges.push(BoundaryEdge { nodes: [id(nx, j), id(nx, j + 1)], tag: BoundaryTag::Sink2 });
    }
    for i in 0..nx {
        edges.push(BoundaryEdge { nodes: [id(i, 0), id(i + 1, 0)], tag: BoundaryTag::Insulated });
        edges.push(BoundaryEdge {
            nodes: [id(i + 1, ny), id(i, ny)],
            tag: BoundaryTag::Insulated,
        });
    }
    Mesh::new(nodes, elements, edges, vec![])
}

/// Polar structured mesh of the annulus `r_in < r < r_out`.
///
/// The seam at θ = 2π is duplicated geometrically and identified with θ = 0
/// through periodic pairs. Inner circle: source; outer circle: sink.
pub fn build_annulus<T: Real>(nr: usize, ntheta: usize, r_in: T, r_out: T) -> Result<Mesh<T>> {
    if !(r_in > T::zero() && r_out > r_in) || !r_out.is_finite() {
        return Err(Error::InvalidMesh(format!(
            "annulus needs 0 < r_in < r_out (got r_in = {r_in}, r_out = {r_out})"
        )));
    }
    if nr < 1 || ntheta < 8 {
        return Err(Error::InvalidMesh(format!(
            "annulus needs nr >= 1 and ntheta >= 8 (got {nr}, {ntheta})"
        )));
    }
    let id = |k: usize, j: usize| j * (nr + 1) + k;
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    let mut nodes = Vec::with_capacity((nr + 1) * (ntheta + 1));
    for j in 0..=ntheta {
        let theta = two_pi * T::of_usize(j % ntheta) / T::of_usize(ntheta);
        let (s, c) = theta.sin_cos();
        for k in 0..=nr {
            let r = r_in + (r_out - r_in) * T::of_usize(k) / T::of_usize(nr);
            nodes.push([r * c, r * s]);
        }
    }
    let mut elements = Vec::with_capacity(2 * nr * ntheta);
    for j in 0..ntheta {
        for k in 0..nr {
            // one diagonal direction everywhere keeps every ring rotation-equivalent
            let tris = split_cell(0, 0, id(k, j), id(k + 1, j), id(k + 1, j + 1), id(k, j + 1));
            elements.extend_from_slice(&tris);
        }
    }
    let mut edges = Vec::with_capacity(2 * ntheta);
    for j in 0..ntheta {
        edges.push(BoundaryEdge { nodes: [id(0, j + 1), id(0, j)], tag: BoundaryTag::Source1 });
        edges.push(BoundaryEdge { nodes: [id(nr, j), id(nr, j + 1)], tag: BoundaryTag::Sink2 });
    }
    let pairs = (0..=nr).map(|k| (id(k, 0), id(k, ntheta))).collect();
    Mesh::new(nodes, elements, edges, pairs)
}

/// Fully periodic unit cell with a source disk at the corners and a sink
/// disk at the center.
///
/// Disks are carved out by removing every element whose centroid lies inside
/// them; the exposed edges become the tagged boundary (a staircase
/// approximation of each circle).
pub fn build_periodic_cell<T: Real>(n: usize, r_source: T, r_sink: T) -> Result<Mesh<T>> {
    if n < 16 {
        return Err(Error::InvalidMesh(format!("periodic cell needs n >= 16 (got {n})")));
    }
    if !(r_source > T::zero() && r_sink > T::zero()) {
        return Err(Error::InvalidMesh("disk radii must be positive".into()));
    }
    if !(r_source + r_sink < T::lit(0.5)) {
        return Err(Error::InvalidMesh(format!(
            "source and sink disks overlap (r_source + r_sink = {} >= 0.5)",
            r_source + r_sink
        )));
    }
    let cells = T::of_usize(n);
    if r_source * cells < T::lit(4.0) || r_sink * cells < T::lit(4.0) {
        return Err(Error::InvalidMesh(format!(
            "n = {n} resolves a disk radius with fewer than 4 cells"
        )));
    }

    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            for t in split_cell(i, j, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)) {
                elements.push(t);
            }
        }
    }

    // Centroids in integer units of 1/(6n) keep the disk test exactly
    // symmetric under the lattice symmetries.
    let scale = 6 * n as i64;
    let node_ij = |v: usize| ((v % (n + 1)) as i64, (v / (n + 1)) as i64);
    let r_src_units = (r_source * T::of_usize(6 * n)).to_f64_lossy();
    let r_snk_units = (r_sink * T::of_usize(6 * n)).to_f64_lossy();
    #[derive(Clone, Copy, PartialEq)]
    enum Region {
        Keep,
        Source,
        Sink,
    }
    let region: Vec<Region> = elements
        .iter()
        .map(|t| {
            let (mut cx, mut cy) = (0, 0);
            for &v in t {
                let (i, j) = node_ij(v);
                cx += 2 * i;
                cy += 2 * j;
            }
            // centroid * 6n = 2 * (sum of grid indices)
            let dxc = cx.min(scale - cx);
            let dyc = cy.min(scale - cy);
            let d2_corner = (dxc * dxc + dyc * dyc) as f64;
            let dxm = cx - scale / 2;
            let dym = cy - scale / 2;
            let d2_center = (dxm * dxm + dym * dym) as f64;
            if d2_corner < r_src_units * r_src_units {
                Region::Source
            } else if d2_center < r_snk_units * r_snk_units {
                Region::Sink
            } else {
                Region::Keep
            }
        })
        .collect();

    // Periodic root of every raw node: x = 1 maps to x = 0, y = 1 to y = 0.
    let root = |v: usize| {
        let (i, j) = (v % (n + 1), v / (n + 1));
        id(if i == n { 0 } else { i }, if j == n { 0 } else { j })
    };

    let mut owners: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
    for (e, t) in elements.iter().enumerate() {
        for k in 0..3 {
            owners
                .entry(edge_key(root(t[k]), root(t[(k + 1) % 3])))
                .or_default()
                .push(e);
        }
    }

    let mut raw_edges = Vec::new();
    for (e, t) in elements.iter().enumerate() {
        if region[e] != Region::Keep {
            continue;
        }
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let neighbours = &owners[&edge_key(root(a), root(b))];
            if let Some(&other) = neighbours.iter().find(|&&o| o != e) {
                let tag = match region[other] {
                    Region::Keep => continue,
                    Region::Source => BoundaryTag::Source1,
                    Region::Sink => BoundaryTag::Sink2,
                };
                raw_edges.push(BoundaryEdge { nodes: [a, b], tag });
            }
        }
    }

    // Keep every raw copy of a node whose periodic group touches a kept element.
    let total = (n + 1) * (n + 1);
    let mut root_used = vec![false; total];
    for (e, t) in elements.iter().enumerate() {
        if region[e] == Region::Keep {
            for &v in t {
                root_used[root(v)] = true;
            }
        }
    }
    let mut new_index = vec![usize::MAX; total];
    let mut nodes = Vec::new();
    for v in 0..total {
        if root_used[root(v)] {
            new_index[v] = nodes.len();
            let (i, j) = (v % (n + 1), v / (n + 1));
            nodes.push([T::of_usize(i) / cells, T::of_usize(j) / cells]);
        }
    }
    let kept: Vec<[usize; 3]> = elements
        .iter()
        .zip(&region)
        .filter(|(_, r)| **r == Region::Keep)
        .map(|(t, _)| [new_index[t[0]], new_index[t[1]], new_index[t[2]]])
        .collect();
    let edges = raw_edges
        .into_iter()
        .map(|be| BoundaryEdge {
            nodes: [new_index[be.nodes[0]], new_index[be.nodes[1]]],
            tag: be.tag,
        })
        .collect();
    let mut pairs = Vec::new();
    for v in 0..total {
        let r = root(v);
        if r != v && new_index[v] != usize::MAX {
            pairs.push((new_index[r], new_index[v]));
        }
    }
    Mesh::new(nodes, kept, edges, pairs)
}
