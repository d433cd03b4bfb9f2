//! Scalar summaries of a design on the unit square.

use crate::mesh::Mesh;
use crate::scalar::Real;
use std::collections::BTreeMap;

/// Mass-weighted mean of `χ` per column of dofs with equal `x`, ordered by `x`.
pub fn column_means<T: Real>(mesh: &Mesh<T>, chi: &[T]) -> Vec<(T, T)> {
    let m = mesh.lumped_mass();
    let mut cols: BTreeMap<i64, (T, T, T)> = BTreeMap::new();
    for (j, p) in mesh.dof_coordinates().into_iter().enumerate() {
        let key = (p[0].to_f64_lossy() * 1e9).round() as i64;
        let e = cols.entry(key).or_insert((p[0], T::zero(), T::zero()));
        e.1 += m[j] * chi[j];
        e.2 += m[j];
    }
    cols.into_values().map(|(x, s, w)| (x, s / w)).collect()
}

/// `x` where the column mean of `χ` first falls through `½`, by linear
/// interpolation between columns; `None` if it never does.
pub fn interface_position<T: Real>(mesh: &Mesh<T>, chi: &[T]) -> Option<T> {
    let half = T::lit(0.5);
    let cols = column_means(mesh, chi);
    cols.windows(2).find(|w| w[0].1 >= half && w[1].1 < half).map(|w| {
        let (x0, c0) = w[0];
        let (x1, c1) = w[1];
        x0 + (c0 - half) / (c0 - c1) * (x1 - x0)
    })
}

/// Mean `χ` on `x < ½` minus mean `χ` on `x > ½` (lumped-mass weights).
pub fn left_right_contrast<T: Real>(mesh: &Mesh<T>, chi: &[T]) -> T {
    let half = T::lit(0.5);
    let m = mesh.lumped_mass();
    let (mut l, mut wl, mut r, mut wr) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (j, p) in mesh.dof_coordinates().into_iter().enumerate() {
        if p[0] < half {
            l += m[j] * chi[j];
            wl += m[j];
        } else if p[0] > half {
            r += m[j] * chi[j];
            wr += m[j];
        }
    }
    l / wl - r / wr
}

/// Area carried by dofs with `lo < χ < hi`.
pub fn mixed_area<T: Real>(mesh: &Mesh<T>, chi: &[T], lo: T, hi: T) -> T {
    mesh.lumped_mass().into_iter().zip(chi).filter(|(_, &c)| c > lo && c < hi).map(|(m, _)| m).sum()
}
