mod common;

use capspectra::grid::{Grid1D, PotentialSpec};
use capspectra::hamiltonian::Hamiltonian;
use capspectra::lindblad::{DensityPropagator, OneBodyDensity};
use capspectra::matrix::{CMat, C64};
use capspectra::spectra::{AccumulationScope, SpectralAccumulator};
use capspectra::twobody::{OneBodySplit, SplitOperator, TwoBodyState};

use common::{grid8, max_diff};

fn assert_ratios(values: &[f64], range: std::ops::Range<f64>) {
    for w in values.windows(2) {
        let ratio = w[0] / w[1];
        assert!(range.contains(&ratio), "{values:?}");
    }
}

#[test]
fn split_step_local_defect_is_third_order() {
    assert_ratios(&common::split_local_defects(), 6.5..9.5);
}

#[test]
fn split_global_error_is_second_order() {
    assert_ratios(&common::split_global_errors(), 3.5..4.5);
}

#[test]
fn density_step_local_defect_is_third_order() {
    assert_ratios(&common::density_local_defects(), 6.5..9.5);
}

#[test]
fn density_scheme_global_error_is_second_order() {
    assert_ratios(&common::density_global_errors(), 3.5..4.5);
}

#[test]
fn pure_density_follows_schrodinger() {
    let g = Grid1D::new(10.0, 64).unwrap();
    let ham = Hamiltonian::new(&g, &PotentialSpec::SoftCoulomb { strength: 0.5, width: 0.5 }).unwrap();
    let mut chi: Vec<C64> = g.x().iter().map(|&x| C64::from_polar((-(x - 1.0).powi(2)).exp(), 0.8 * x)).collect();
    let rho0 = CMat::from_fn(64, 64, |i, j| chi[i] * chi[j].conj());
    let mut rho = OneBodyDensity::from_matrix(rho0, g.h(), 0.0);
    let mut prop = DensityPropagator::new(&ham, 0.05).unwrap();
    let mut single = OneBodySplit::real_time(&ham, 0.05).unwrap();
    let p0 = rho.probability();
    for k in 0..40 {
        prop.step(&ham, &mut rho, None);
        single.step(&ham, k as f64 * 0.05, &mut chi);
        assert!((rho.probability() - p0).abs() < 1e-12 * p0);
    }
    let pure = CMat::from_fn(64, 64, |i, j| chi[i] * chi[j].conj());
    assert!(max_diff(rho.rho(), &pure) < 1e-12);
    assert_eq!(rho.rho().max_antihermiticity(), 0.0);
}

#[test]
fn projected_spectrum_matches_direct_double_sum() {
    let err = common::spectrum_projection_error();
    assert!(err < 1e-12, "{err}");
}

#[test]
fn outer_product_accumulation() {
    let g = grid8();
    let h = g.h();
    let u: Vec<C64> = (0..8).map(|i| C64::new(i as f64 - 3.0, 0.5)).collect();
    let v: Vec<C64> = (0..8).map(|i| C64::new(1.0, -(i as f64) * 0.25)).collect();
    let psi = CMat::from_fn(8, 8, |i, j| u[i] * v[j].conj());
    let mut acc = SpectralAccumulator::new(&[1.0; 8], h, AccumulationScope::Full);
    acc.accumulate_psi(&psi, 0.3);
    let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    for j in 0..8 {
        for i in 0..8 {
            let want = u[i] * u[j].conj() * (h * 0.3 * vv);
            assert!((acc.phi().unwrap()[(i, j)] - want).norm() < 1e-12);
        }
    }
}

#[test]
fn free_packet_spreads_analytically() {
    let g = Grid1D::new(40.0, 512).unwrap();
    let sigma = 1.0;
    let chi: Vec<C64> =
        g.x().iter().map(|&x| C64::from_polar((-x * x / (4.0 * sigma * sigma)).exp(), 0.5 * x)).collect();
    let ham = Hamiltonian::new(&g, &PotentialSpec::None).unwrap();
    let mut state = TwoBodyState::symmetric_product(&chi, &chi, g.h());
    let tau = 0.05;
    let mut op = SplitOperator::real_time(&ham, tau).unwrap();
    for _ in 0..100 {
        op.step(&ham, &mut state);
    }
    let t = 100.0 * tau;
    let h = g.h();
    let marginal: Vec<f64> =
        (0..512).map(|i| (0..512).map(|j| state.psi()[(i, j)].norm_sqr()).sum::<f64>() * h * h).collect();
    let mean: f64 = marginal.iter().zip(g.x()).map(|(p, x)| p * x).sum();
    let var: f64 = marginal.iter().zip(g.x()).map(|(p, x)| p * (x - mean).powi(2)).sum();
    let want = sigma * sigma + (t / (2.0 * sigma)).powi(2);
    assert!((var - want).abs() < 1e-6 * want, "{var} vs {want}");
    assert!((mean - 0.5 * t).abs() < 1e-6);
}
