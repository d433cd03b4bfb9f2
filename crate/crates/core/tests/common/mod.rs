//! Independent reference solvers shared by the integration tests.
#![allow(dead_code)]

/// Solves a block-tridiagonal system with 2×2 blocks by Gaussian
/// elimination without pivoting between blocks.
fn solve_blocks(l: &[[[f64; 2]; 2]], d: &[[[f64; 2]; 2]], u: &[[[f64; 2]; 2]], r: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = d.len();
    let inv = |a: [[f64; 2]; 2]| {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
    };
    let mv = |a: [[f64; 2]; 2], x: [f64; 2]| [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]];
    let mm = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ]
    };
    // eliminate below: C_i = D_i⁻¹U_i, y_i = D_i⁻¹(r_i − L_i y_{i−1})
    let mut c = vec![[[0.0; 2]; 2]; n];
    let mut y = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut dd = d[i];
        let mut rr = r[i];
        if i > 0 {
            let lc = mm(l[i], c[i - 1]);
            let ly = mv(l[i], y[i - 1]);
            for a in 0..2 {
                rr[a] -= ly[a];
                for b in 0..2 {
                    dd[a][b] -= lc[a][b];
                }
            }
        }
        let di = inv(dd);
        c[i] = mm(di, u[i]);
        y[i] = mv(di, rr);
    }
    for i in (0..n - 1).rev() {
        let cx = mv(c[i], y[i + 1]);
        y[i] = [y[i][0] - cx[0], y[i][1] - cx[1]];
    }
    y
}

/// Vertex-centred finite differences for the 1D two-species system with a
/// linear ramp `χ` of width `w` at `s` (1 on the left): face conductivities
/// from `χ` at face midpoints, reaction lumped on control volumes. Returns
/// the species-1 flux entering at `x = 0`.
pub fn fd_ramp_flux(k1: f64, k2: f64, k_s: f64, s: f64, w: f64, n: usize) -> f64 {
    let (k12, k21) = (1e-6, 1e-6);
    let chi = |x: f64| ((s + w / 2.0 - x) / w).clamp(0.0, 1.0);
    let h = 1.0 / (n - 1) as f64;
    let x = |i: usize| i as f64 * h;
    let face = |i: usize| {
        let c = chi(x(i) + h / 2.0);
        [(c * k1 + (1.0 - c) * k12) / h, (c * k21 + (1.0 - c) * k2) / h]
    };
    let react = |i: usize| {
        let c = chi(x(i));
        let vol = if i == 0 || i == n - 1 { h / 2.0 } else { h };
        k_s * c * (1.0 - c) * vol
    };
    let mut l = vec![[[0.0; 2]; 2]; n];
    let mut d = vec![[[0.0; 2]; 2]; n];
    let mut u = vec![[[0.0; 2]; 2]; n];
    let mut r = vec![[0.0; 2]; n];
    for i in 0..n {
        let rc = react(i);
        d[i] = [[rc, -rc], [-rc, rc]];
        if i + 1 < n {
            let f = face(i);
            d[i][0][0] += f[0];
            d[i][1][1] += f[1];
            u[i] = [[-f[0], 0.0], [0.0, -f[1]]];
        }
        if i > 0 {
            let f = face(i - 1);
            d[i][0][0] += f[0];
            d[i][1][1] += f[1];
            l[i] = [[-f[0], 0.0], [0.0, -f[1]]];
        }
    }
    let (d0, u0) = (d[0], u[0]);
    d[0][0] = [1.0, 0.0];
    u[0][0] = [0.0, 0.0];
    r[0][0] = 1.0;
    d[n - 1][1] = [0.0, 1.0];
    l[n - 1][1] = [0.0, 0.0];
    r[n - 1][1] = 0.0;
    let sol = solve_blocks(&l, &d, &u, &r);
    d0[0][0] * sol[0][0] + d0[0][1] * sol[0][1] + u0[0][0] * sol[1][0] + u0[0][1] * sol[1][1]
}

/// Finite differences for the sharp interface at `s`: `u₁` on `[0,s]`,
/// `u₂` on `[s,1]`, coupled by `−K₁u₁' = k_s(u₁−u₂) = −K₂u₂'` at `s`.
pub fn fd_sharp_flux(k1: f64, k2: f64, k_s: f64, s: f64, m: usize) -> f64 {
    // unknowns u₁ at s·i/m (i = 0..=m) then u₂ at s + (1−s)·i/m
    let n = 2 * (m + 1);
    let (h1, h2) = (s / m as f64, (1.0 - s) / m as f64);
    let (g1, g2) = (k1 / h1, k2 / h2);
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut r = vec![0.0; n];
    b[0] = 1.0;
    r[0] = 1.0;
    for i in 1..m {
        a[i] = -g1;
        b[i] = 2.0 * g1;
        c[i] = -g1;
    }
    // interface rows: half-cell balances with the transfer term
    a[m] = -g1;
    b[m] = g1 + k_s;
    c[m] = -k_s;
    a[m + 1] = -k_s;
    b[m + 1] = g2 + k_s;
    c[m + 1] = -g2;
    for i in m + 2..n - 1 {
        a[i] = -g2;
        b[i] = 2.0 * g2;
        c[i] = -g2;
    }
    b[n - 1] = 1.0;
    // Thomas algorithm
    for i in 1..n {
        let f = a[i] / b[i - 1];
        b[i] -= f * c[i - 1];
        r[i] -= f * r[i - 1];
    }
    let mut x = vec![0.0; n];
    x[n - 1] = r[n - 1] / b[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (r[i] - c[i] * x[i + 1]) / b[i];
    }
    g1 * (x[0] - x[1])
}
