//! Pointwise relaxed density: the optimal local mixture of the two materials
//! for given concentrations and gradients.

use crate::error::{Error, Result};
use crate::scalar::{clamp, Real};
use crate::state::ModelParams;
use serde::Serialize;
use std::fmt;

/// Concentrations, gradients and material data at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxedPoint<T> {
    pub params: ModelParams<T>,
    pub v: [T; 2],
    pub xi: [[T; 2]; 2],
    pub lambda: T,
}

/// Pure phase 2, mixed, or pure phase 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    R0,
    R,
    R1,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::R0 => "R0",
            Region::R => "R",
            Region::R1 => "R1",
        })
    }
}

impl<T: Real> RelaxedPoint<T> {
    /// Takes `lambda` from `params`.
    pub fn new(params: ModelParams<T>, v: [T; 2], xi: [[T; 2]; 2]) -> Self {
        RelaxedPoint { params, v, xi, lambda: params.lambda }
    }

    /// `|ξ_1|²`, `|ξ_2|²`.
    pub fn xi_sq(&self) -> [T; 2] {
        [0, 1].map(|i| self.xi[i][0] * self.xi[i][0] + self.xi[i][1] * self.xi[i][1])
    }

    /// `k_v = k_s (v1 - v2)²`.
    pub fn k_v(&self) -> T {
        let d = self.v[0] - self.v[1];
        self.params.k_s * d * d
    }

    /// `S = Δk_1|ξ_1|² + Δk_2|ξ_2|²`.
    pub fn s(&self) -> T {
        let [a, b] = self.xi_sq();
        self.params.dk1() * a + self.params.dk2() * b
    }

    /// Magnitude used to scale round-off comparisons.
    pub fn scale(&self) -> T {
        let p = &self.params;
        let [a, b] = self.xi_sq();
        T::one() + self.k_v() + self.lambda.abs() + (p.k11 + p.k12) * a + (p.k21 + p.k22) * b
    }
}

/// `W = ½Σ(χk_i1 + (1−χ)k_i2)|ξ_i|² + ½χ(1−χ)k_v − λχ`.
#[allow(non_snake_case)]
pub fn W_pointwise<T: Real>(p: &RelaxedPoint<T>, chi: T) -> T {
    let half = T::lit(0.5);
    let q = &p.params;
    let [a, b] = p.xi_sq();
    let one_m = T::one() - chi;
    let k1 = chi * q.k11 + one_m * q.k12;
    let k2 = chi * q.k21 + one_m * q.k22;
    half * (k1 * a + k2 * b) + half * chi * one_m * p.k_v() - p.lambda * chi
}

/// Unclamped stationary point `(S + k_v − 2λ) / (2k_v)` of `W(p, ·)`.
pub fn chi_star<T: Real>(p: &RelaxedPoint<T>) -> Result<T> {
    let kv = p.k_v();
    if !(kv > T::zero()) {
        return Err(Error::DegenerateReaction);
    }
    let two = T::lit(2.0);
    Ok((p.s() + kv - two * p.lambda) / (two * kv))
}

pub fn region_classify<T: Real>(p: &RelaxedPoint<T>) -> Region {
    let kv = p.k_v();
    let g = p.s() - T::lit(2.0) * p.lambda;
    if kv > T::zero() {
        if g <= -kv {
            Region::R0
        } else if g >= kv {
            Region::R1
        } else {
            Region::R
        }
    } else if g > T::zero() {
        Region::R1
    } else {
        Region::R0
    }
}

/// Relaxed density `max_{χ∈[0,1]} W(p, χ)` and the region of the maximizer.
#[allow(non_snake_case)]
pub fn W_bar<T: Real>(p: &RelaxedPoint<T>) -> (T, Region) {
    let region = region_classify(p);
    let w0 = W_pointwise(p, T::zero());
    let w1 = W_pointwise(p, T::one());
    let best = w0.max(w1);
    let value = match chi_star(p) {
        Ok(c) => best.max(W_pointwise(p, clamp(c, T::zero(), T::one()))),
        Err(_) => best,
    };
    (value, region)
}

/// Closed form of `W(p, χ*)` valid in the mixed region:
/// `[S² + 2Σ|ξ_i|²(k_v(k_i1 + k_i2) − 2λΔk_i) + (k_v − 2λ)²] / (8k_v)`.
pub fn w_bar_closed_form<T: Real>(p: &RelaxedPoint<T>) -> Result<T> {
    let kv = p.k_v();
    if !(kv > T::zero()) {
        return Err(Error::DegenerateReaction);
    }
    let two = T::lit(2.0);
    let q = &p.params;
    let [a, b] = p.xi_sq();
    let s = p.s();
    let l = p.lambda;
    let mid = a * (kv * (q.k11 + q.k12) - two * l * q.dk1()) + b * (kv * (q.k21 + q.k22) - two * l * q.dk2());
    let tail = kv - two * l;
    Ok((s * s + two * mid + tail * tail) / (T::lit(8.0) * kv))
}

/// Residuals of the comparison identities between `W(χ*)`, `W(0)`, `W(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResiduals<T> {
    /// `W(χ*) − W(0) − (k_v/2)χ*²`.
    pub star_minus_zero: T,
    /// `W(χ*) − W(1) − (k_v/2)(χ* − 1)²`.
    pub star_minus_one: T,
    /// Same comparison with coefficient `¼` in place of `k_v/2`.
    pub star_minus_one_quarter: T,
    /// `W(1) − W(0) − ½(S − 2λ)`.
    pub one_minus_zero: T,
}

pub fn verify_identities<T: Real>(p: &RelaxedPoint<T>) -> Result<IdentityResiduals<T>> {
    let c = chi_star(p)?;
    let half = T::lit(0.5);
    let kv = p.k_v();
    let ws = W_pointwise(p, c);
    let w0 = W_pointwise(p, T::zero());
    let w1 = W_pointwise(p, T::one());
    let d1 = (c - T::one()) * (c - T::one());
    Ok(IdentityResiduals {
        star_minus_zero: ws - w0 - half * kv * c * c,
        star_minus_one: ws - w1 - half * kv * d1,
        star_minus_one_quarter: ws - w1 - T::lit(0.25) * d1,
        one_minus_zero: w1 - w0 - half * (p.s() - T::lit(2.0) * p.lambda),
    })
}

/// One sample of a relaxed-density map over gradient magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WbarSample<T> {
    pub xi1: T,
    pub xi2: T,
    pub wbar: T,
    pub region: Region,
}

/// Evaluates `W̄` on a `grid × grid` lattice of `(|ξ_1|, |ξ_2|) ∈ [0, xi_max]²`
/// (row-major in `ξ_2`, then `ξ_1`).
pub fn wbar_map<T: Real>(
    params: &ModelParams<T>,
    v: [T; 2],
    lambda: T,
    grid: usize,
    xi_max: T,
) -> Result<Vec<WbarSample<T>>> {
    if grid < 2 || !(xi_max > T::zero()) {
        return Err(Error::InvalidParameter("map needs grid >= 2 and xi_max > 0".into()));
    }
    let step = xi_max / T::of_usize(grid - 1);
    let mut out = Vec::with_capacity(grid * grid);
    for j in 0..grid {
        let x2 = step * T::of_usize(j);
        for i in 0..grid {
            let x1 = step * T::of_usize(i);
            let p = RelaxedPoint { params: *params, v, xi: [[x1, T::zero()], [T::zero(), x2]], lambda };
            let (wbar, region) = W_bar(&p);
            out.push(WbarSample { xi1: x1, xi2: x2, wbar, region });
        }
    }
    Ok(out)
}

/// A named parameter set for a relaxed-density map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapCase<T> {
    pub name: &'static str,
    pub params: ModelParams<T>,
    pub v: [T; 2],
    pub lambda: T,
}

/// Reference cases: (a) `k11 = k22 = k_s = 1`, `k12 = k21 = 0.1`,
/// `(v1 − v2)² = 1`, `λ = 0`; (b) as (a) with `k11 = 5`; (c) as (a) with
/// `λ = 1`; (d) as (a) with `(v1 − v2)² = 10`.
pub fn reference_map_cases<T: Real>() -> [MapCase<T>; 4] {
    let base = ModelParams {
        k11: T::one(),
        k12: T::lit(0.1),
        k21: T::lit(0.1),
        k22: T::one(),
        k_s: T::one(),
        u1_star: T::one(),
        u2_star: T::zero(),
        lambda: T::zero(),
    };
    let v = [T::one(), T::zero()];
    [
        MapCase { name: "a", params: base, v, lambda: T::zero() },
        MapCase { name: "b", params: ModelParams { k11: T::lit(5.0), ..base }, v, lambda: T::zero() },
        MapCase { name: "c", params: base, v, lambda: T::one() },
        MapCase { name: "d", params: base, v: [T::lit(10.0).sqrt(), T::zero()], lambda: T::zero() },
    ]
}
