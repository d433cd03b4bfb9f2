//! One-dimensional cross-checks of the interface model.
//!
//! Across a planar interface the two-species system reduces to an ODE
//! system in the normal coordinate `x ∈ [0,1]`: species 1 enters at `x = 0`
//! through material 1 (on the left), reacts in the mixed band and leaves as
//! species 2 at `x = 1` through material 2.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::ModelParams;
use serde::Serialize;

/// Material arrangement `χ(x)`: 1 on the left of the interface, 0 on the
/// right.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Shape<T> {
    Step,
    /// Linear transition of the given width centred on the interface.
    Ramp(T),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile1D<T> {
    /// Node count of the uniform grid on `[0,1]`.
    pub n: usize,
    /// Interface position.
    pub s: T,
    pub shape: Shape<T>,
    pub params: ModelParams<T>,
}

/// Result of [`diffuse_flux_1d`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Flux1D<T> {
    /// Species-1 flux entering at `x = 0`.
    pub j: T,
    /// Species-2 flux leaving at `x = 1`.
    pub j_out: T,
    /// `u₁` averaged over the two band edges.
    pub ubar1: T,
    /// `u₂` averaged over the two band edges.
    pub ubar2: T,
}

impl<T: Real> Profile1D<T> {
    pub fn step(n: usize, s: T, params: ModelParams<T>) -> Result<Self> {
        let p = Profile1D { n, s, shape: Shape::Step, params };
        p.validate()?;
        Ok(p)
    }

    pub fn ramp(n: usize, s: T, w: T, params: ModelParams<T>) -> Result<Self> {
        let p = Profile1D { n, s, shape: Shape::Ramp(w), params };
        p.validate()?;
        Ok(p)
    }

    /// Ramp whose reaction rate is chosen so that `k_s ∫χ(1−χ) = kappa`.
    pub fn ramp_with_conductance(n: usize, s: T, w: T, kappa: T, params: ModelParams<T>) -> Result<Self> {
        let k_s = T::lit(6.0) * kappa / w;
        Self::ramp(n, s, w, ModelParams { k_s, ..params })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!("1D grid needs at least 3 nodes (got {})", self.n)));
        }
        if !(self.s > T::zero() && self.s < T::one()) {
            return Err(Error::InvalidParameter(format!("interface position must lie in (0, 1) (got {})", self.s)));
        }
        if let Shape::Ramp(w) = self.shape {
            let h = self.spacing();
            if !(w >= T::lit(2.0) * h) {
                return Err(Error::InvalidParameter(format!("ramp width {w} is below two grid cells ({h})")));
            }
            let half = w / T::lit(2.0);
            if self.s - half <= T::zero() || self.s + half >= T::one() {
                return Err(Error::InvalidParameter(format!("ramp of width {w} at {} leaves the interval", self.s)));
            }
        }
        Ok(())
    }

    pub fn spacing(&self) -> T {
        T::one() / T::of_usize(self.n - 1)
    }

    pub fn width(&self) -> T {
        match self.shape {
            Shape::Step => T::zero(),
            Shape::Ramp(w) => w,
        }
    }

    /// Band edges `s ∓ w/2`.
    pub fn edges(&self) -> (T, T) {
        let half = self.width() / T::lit(2.0);
        (self.s - half, self.s + half)
    }

    pub fn chi(&self, x: T) -> T {
        let (a, b) = self.edges();
        match self.shape {
            Shape::Step => {
                if x < self.s {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Shape::Ramp(w) => {
                if x <= a {
                    T::one()
                } else if x >= b {
                    T::zero()
                } else {
                    (b - x) / w
                }
            }
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        let h = self.spacing();
        (0..self.n).map(|i| T::of_usize(i) * h).collect()
    }

    pub fn nodal_chi(&self) -> Vec<T> {
        self.nodes().into_iter().map(|x| self.chi(x)).collect()
    }

    /// Effective interfacial conductance `k_s ∫χ(1−χ) dx = k_s w / 6`.
    pub fn kappa_eff(&self) -> T {
        self.params.k_s * self.width() / T::lit(6.0)
    }
}

type Block<T> = [[T; 2]; 2];

fn mat_vec<T: Real>(a: &Block<T>, x: [T; 2]) -> [T; 2] {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

fn mat_mul<T: Real>(a: &Block<T>, b: &Block<T>) -> Block<T> {
    let mut c = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn inverse<T: Real>(a: &Block<T>) -> Result<Block<T>> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == T::zero() || !det.is_finite() {
        return Err(Error::NonConvergence { iterations: 0, residual: f64::INFINITY });
    }
    Ok([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// Solves `L_i x_{i−1} + D_i x_i + U_i x_{i+1} = r_i` by block elimination.
fn block_thomas<T: Real>(lower: &[Block<T>], diag: &[Block<T>], upper: &[Block<T>], rhs: &[[T; 2]]) -> Result<Vec<[T; 2]>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut r = rhs.to_vec();
    for i in 1..n {
        let m = mat_mul(&lower[i], &inverse(&d[i - 1])?);
        let mu = mat_mul(&m, &upper[i - 1]);
        let mr = mat_vec(&m, r[i - 1]);
        for a in 0..2 {
            r[i][a] -= mr[a];
            for b in 0..2 {
                d[i][a][b] -= mu[a][b];
            }
        }
    }
    let mut x = vec![[T::zero(); 2]; n];
    x[n - 1] = mat_vec(&inverse(&d[n - 1])?, r[n - 1]);
    for i in (0..n - 1).rev() {
        let ux = mat_vec(&upper[i], x[i + 1]);
        x[i] = mat_vec(&inverse(&d[i])?, [r[i][0] - ux[0], r[i][1] - ux[1]]);
    }
    Ok(x)
}

const GAUSS3: [(f64, f64); 3] = [
    (0.5 - 0.387_298_334_620_741_7, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.5 + 0.387_298_334_620_741_7, 5.0 / 18.0),
];

/// P1 finite-element solve of the 1D two-species system for the profile.
///
/// Elements are split at the kinks of `χ` and integrated with 3-point
/// Gauss rules, so every integral is exact for a step or a ramp. Fluxes
/// are the consistent nodal residuals at the two Dirichlet ends.
pub fn diffuse_flux_1d<T: Real>(profile: &Profile1D<T>) -> Result<Flux1D<T>> {
    profile.validate()?;
    let p = &profile.params;
    let n = profile.n;
    let x = profile.nodes();
    let (ea, eb) = profile.edges();
    let zero = [[T::zero(); 2]; 2];
    let mut lower = vec![zero; n];
    let mut diag = vec![zero; n];
    let mut upper = vec![zero; n];
    for e in 0..n - 1 {
        let (xa, xb) = (x[e], x[e + 1]);
        let h = xb - xa;
        let mut cuts = vec![xa];
        for k in [ea, eb] {
            if k > xa && k < xb && !cuts.contains(&k) {
                cuts.push(k);
            }
        }
        cuts.push(xb);
        // local stiffness coefficients ∫k_i/h² and reaction mass ∫r φ_a φ_b
        let (mut s1, mut s2) = (T::zero(), T::zero());
        let mut rm = [[T::zero(); 2]; 2];
        for seg in cuts.windows(2) {
            let len = seg[1] - seg[0];
            for (g, wq) in GAUSS3 {
                let xq = seg[0] + T::lit(g) * len;
                let wq = T::lit(wq) * len;
                let c = profile.chi(xq);
                s1 += wq * (c * p.k11 + (T::one() - c) * p.k12) / (h * h);
                s2 += wq * (c * p.k21 + (T::one() - c) * p.k22) / (h * h);
                let r = p.k_s * c * (T::one() - c);
                let phi = [(xb - xq) / h, (xq - xa) / h];
                for i in 0..2 {
                    for j in 0..2 {
                        rm[i][j] += wq * r * phi[i] * phi[j];
                    }
                }
            }
        }
        let block = |i: usize, j: usize| -> Block<T> {
            let sign = if i == j { T::one() } else { -T::one() };
            [[sign * s1 + rm[i][j], -rm[i][j]], [-rm[i][j], sign * s2 + rm[i][j]]]
        };
        let add = |dst: &mut Block<T>, src: Block<T>| {
            for a in 0..2 {
                for b in 0..2 {
                    dst[a][b] += src[a][b];
                }
            }
        };
        add(&mut diag[e], block(0, 0));
        add(&mut upper[e], block(0, 1));
        add(&mut lower[e + 1], block(1, 0));
        add(&mut diag[e + 1], block(1, 1));
    }
    // Dirichlet rows: u₁ at the source end, u₂ at the sink end
    let (full_d0, full_u0) = (diag[0], upper[0]);
    let (full_ln, full_dn) = (lower[n - 1], diag[n - 1]);
    let mut rhs = vec![[T::zero(); 2]; n];
    diag[0][0] = [T::one(), T::zero()];
    upper[0][0] = [T::zero(); 2];
    rhs[0][0] = p.u1_star;
    diag[n - 1][1] = [T::zero(), T::one()];
    lower[n - 1][1] = [T::zero(); 2];
    rhs[n - 1][1] = p.u2_star;
    let u = block_thomas(&lower, &diag, &upper, &rhs)?;

    let j = mat_vec(&full_d0, u[0])[0] + mat_vec(&full_u0, u[1])[0];
    let j_out = -(mat_vec(&full_ln, u[n - 2])[1] + mat_vec(&full_dn, u[n - 1])[1]);
    let sample = |xs: T, species: usize| -> T {
        let h = profile.spacing();
        let i = (xs / h).floor().to_usize().unwrap_or(0).min(n - 2);
        let t = (xs - x[i]) / h;
        u[i][species] * (T::one() - t) + u[i + 1][species] * t
    };
    let half = T::lit(0.5);
    Ok(Flux1D {
        j,
        j_out,
        ubar1: half * (sample(ea, 0) + sample(eb, 0)),
        ubar2: half * (sample(ea, 1) + sample(eb, 1)),
    })
}

/// Series resistance `s/K₁ + (1−s)/K₂ + 1/k_s` of the sharp interface.
pub fn sharp_flux_analytic<T: Real>(k1: T, k2: T, k_s: T, s: T, u1_star: T, u2_star: T) -> T {
    (u1_star - u2_star) / (s / k1 + (T::one() - s) / k2 + T::one() / k_s)
}

/// Relative defect `|J − κ_eff (ū₁ − ū₂)| / J` of the interfacial flux
/// condition for a ramp profile.
pub fn flux_condition_residual<T: Real>(profile: &Profile1D<T>) -> Result<T> {
    if profile.shape == Shape::Step {
        return Err(Error::InvalidParameter("flux condition needs a ramp profile".into()));
    }
    let f = diffuse_flux_1d(profile)?;
    Ok((f.j - profile.kappa_eff() * (f.ubar1 - f.ubar2)).abs() / f.j.abs())
}
