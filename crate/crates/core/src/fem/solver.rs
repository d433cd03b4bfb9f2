use super::SparseOperator;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stopping rule for the conjugate-gradient solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions<T> {
    /// Target `‖b - A x‖ / ‖b‖`.
    pub rtol: T,
    /// Iteration cap; `None` means `20 * dim`.
    pub max_iter: Option<usize>,
}

impl<T: Real> Default for CgOptions<T> {
    fn default() -> Self {
        CgOptions { rtol: T::default_rtol(), max_iter: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgSolution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Achieved relative residual.
    pub residual: T,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Solves `op x = rhs` with the default tolerance and a zero initial guess.
pub fn solve_spd<T: Real>(op: &SparseOperator<T>, rhs: &[T]) -> Result<Vec<T>> {
    Ok(solve_spd_with(op, rhs, None, &CgOptions::default())?.x)
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive-definite
/// operators. Sequential and deterministic.
pub fn solve_spd_with<T: Real>(
    op: &SparseOperator<T>,
    rhs: &[T],
    x0: Option<&[T]>,
    opts: &CgOptions<T>,
) -> Result<CgSolution<T>> {
    let n = op.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let max_iter = opts.max_iter.unwrap_or(20 * n.max(1));
    let b_norm = dot(rhs, rhs).sqrt();
    if b_norm == T::zero() {
        return Ok(CgSolution { x: vec![T::zero(); n], iterations: 0, residual: T::zero() });
    }

    let inv_diag: Vec<T> = op
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();

    let mut x = match x0 {
        Some(g) if g.len() == n => g.to_vec(),
        Some(g) => return Err(Error::DimensionMismatch { expected: n, got: g.len() }),
        None => vec![T::zero(); n],
    };
    let mut r = op.apply(&x);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = *bi - *ri;
    }
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    if rel <= opts.rtol {
        return Ok(CgSolution { x, iterations: 0, residual: rel });
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(a, d)| *a * *d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];

    for it in 1..=max_iter {
        op.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NonConvergence { iterations: it, residual: rel.to_f64_lossy() });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= opts.rtol {
            return Ok(CgSolution { x, iterations: it, residual: rel });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: rel.to_f64_lossy() })
}
