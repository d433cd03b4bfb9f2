mod common;

use common::{fd_ramp_flux, fd_sharp_flux};
use reactor_design::validation1d::{diffuse_flux_1d, flux_condition_residual, sharp_flux_analytic, Profile1D};
use reactor_design::ModelParams;

fn params(k1: f64, k2: f64) -> ModelParams<f64> {
    ModelParams { k11: k1, k22: k2, k12: 1e-6, k21: 1e-6, ..ModelParams::reference() }
}

#[test]
fn sharp_formula_matches_finite_differences() {
    for (k1, k2, k_s, s) in [(2.0, 1.0, 2.0, 0.25), (1.0, 1.0, 1.0, 0.5), (0.1, 10.0, 50.0, 0.7)] {
        let exact = sharp_flux_analytic(k1, k2, k_s, s, 1.0, 0.0);
        let fd = fd_sharp_flux(k1, k2, k_s, s, 1000);
        assert!((exact - fd).abs() <= 1e-3 * fd, "{exact} vs {fd}");
    }
    assert!((fd_sharp_flux(2.0, 1.0, 2.0, 0.25, 1000) - 0.7273).abs() < 1e-4);
}

#[test]
fn ramp_flux_matches_fine_grid_oracle() {
    for (k1, k2, kappa) in [(1.0, 1.0, 1.0), (0.1, 10.0, 10.0), (10.0, 0.1, 0.1)] {
        let p = Profile1D::ramp_with_conductance(1024, 0.5, 0.04, kappa, params(k1, k2)).unwrap();
        let fe = diffuse_flux_1d(&p).unwrap().j;
        let fd = fd_ramp_flux(k1, k2, p.params.k_s, 0.5, 0.04, 100_000);
        assert!((fe - fd).abs() <= 5e-3 * fd, "K=({k1},{k2}) κ={kappa}: {fe} vs {fd}");
    }
}

#[test]
fn narrow_band_flux_near_one_half() {
    let p = Profile1D::ramp(4096, 0.5, 0.02, ModelParams { k_s: 300.0, ..params(1.0, 1.0) }).unwrap();
    let f = diffuse_flux_1d(&p).unwrap();
    assert!((f.j - 0.5).abs() <= 0.025);
    let fd = fd_ramp_flux(1.0, 1.0, 300.0, 0.5, 0.02, 100_000);
    assert!((f.j - fd).abs() <= 5e-3 * fd);
}

#[test]
fn flux_condition_tightens_as_band_narrows() {
    let res: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&w| flux_condition_residual(&Profile1D::ramp_with_conductance(4096, 0.5, w, 1.0, params(1.0, 1.0)).unwrap()).unwrap())
        .collect();
    assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
}
