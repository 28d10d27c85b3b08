use proptest::prelude::*;

use capspectra::eigenbasis::{continuum_weights, EigenBasis};
use capspectra::grid::{CapSpec, Grid1D, InteractionSpec, PotentialSpec};
use capspectra::hamiltonian::Hamiltonian;
use capspectra::lindblad::source_matrix;
use capspectra::matrix::{CMat, C64};
use capspectra::spectra::{to_density, AccumulationScope, SpectralAccumulator};
use capspectra::twobody::{SplitOperator, TwoBodyState};

fn state(n: usize, values: &[(f64, f64)]) -> CMat {
    let mut m = CMat::from_fn(n, n, |i, j| {
        let (re, im) = values[(i * 7 + j * 3) % values.len()];
        C64::new(re, im)
    });
    m.symmetrize();
    m
}

fn min_eigenvalue(m: &CMat) -> f64 {
    let evd = m.view().self_adjoint_eigen(faer::Side::Lower).unwrap();
    evd.S().column_vector().iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cap_is_nonnegative_and_zero_inside(gamma0 in 0.0..5.0f64, onset in 0.5..9.5f64) {
        let g = Grid1D::new(10.0, 40).unwrap();
        let cap = CapSpec { gamma0, onset }.values(&g).unwrap();
        for (x, c) in g.x().iter().zip(&cap) {
            prop_assert!(*c >= 0.0);
            if x.abs() < onset {
                prop_assert_eq!(*c, 0.0);
            }
        }
    }

    #[test]
    fn split_step_keeps_symmetry_and_never_gains_norm(
        values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5..20),
        gamma0 in 0.0..2.0f64,
        tau in 0.01..0.3f64,
    ) {
        let g = Grid1D::new(6.0, 16).unwrap();
        let ham = Hamiltonian::new(&g, &PotentialSpec::Gaussian { strength: 2.0, width: 1.0 }).unwrap()
            .with_cap(&CapSpec { gamma0, onset: 3.0 }).unwrap()
            .with_interaction(&InteractionSpec { strength: 1.0, smoothness: 0.5 }).unwrap();
        let mut s = TwoBodyState::new(state(16, &values), g.h(), 0.0);
        let mut op = SplitOperator::real_time(&ham, tau).unwrap();
        for _ in 0..5 {
            let before = s.norm2();
            op.step(&ham, &mut s);
            prop_assert!(s.norm2() <= before * (1.0 + 1e-12));
            prop_assert_eq!(s.psi().max_asymmetry(), 0.0);
        }
    }

    #[test]
    fn source_is_hermitian_psd(values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5..20)) {
        let g = Grid1D::new(6.0, 12).unwrap();
        let cap = CapSpec { gamma0: 0.8, onset: 2.0 }.values(&g).unwrap();
        let s = source_matrix(&state(12, &values), &cap, g.h());
        prop_assert!(s.max_antihermiticity() == 0.0);
        let scale = s.trace().re.abs().max(1e-300);
        prop_assert!(min_eigenvalue(&s) >= -1e-12 * scale);
    }

    #[test]
    fn phi_is_hermitian_psd_and_linear_in_cap(
        values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5..20),
        steps in 1usize..5,
    ) {
        let g = Grid1D::new(6.0, 12).unwrap();
        let h = g.h();
        let cap = CapSpec { gamma0: 0.8, onset: 2.0 }.values(&g).unwrap();
        let doubled: Vec<f64> = cap.iter().map(|c| 2.0 * c).collect();
        let mut full = SpectralAccumulator::new(&cap, h, AccumulationScope::Full);
        let mut a = SpectralAccumulator::new(&cap, h, AccumulationScope::CapColumns);
        let mut b = SpectralAccumulator::new(&doubled, h, AccumulationScope::CapColumns);
        for k in 0..steps {
            let mut v = values.clone();
            v.rotate_left(k % values.len());
            let psi = state(12, &v);
            full.accumulate_psi(&psi, 0.1);
            a.accumulate_psi(&psi, 0.1);
            b.accumulate_psi(&psi, 0.1);
        }
        let phi = full.phi().unwrap();
        prop_assert!(phi.max_antihermiticity() < 1e-12 * phi.trace().re.max(1e-300));
        prop_assert!(min_eigenvalue(phi) >= -1e-10 * phi.trace().re);
        let basis = EigenBasis::from_potential(&g, &PotentialSpec::None).unwrap();
        for (x, y) in a.discrete_first(&basis).iter().zip(b.discrete_first(&basis)) {
            prop_assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn density_integrates_back_to_discrete_sum(center in 3.0..8.0f64, width in 1.0..2.0f64) {
        let g = Grid1D::new(40.0, 320).unwrap();
        let basis = EigenBasis::from_potential(&g, &PotentialSpec::Gaussian { strength: 4.0, width: 1.06 }).unwrap();
        let w = continuum_weights(&basis).unwrap();
        // c_k sampled from a smooth distribution over energy
        let c: Vec<f64> = basis.energies().iter().zip(&w.weights)
            .map(|(&e, &wk)| if wk > 0.0 { (-(e - center).powi(2) / (2.0 * width * width)).exp() / wk } else { 0.0 })
            .collect();
        let total: f64 = c.iter().sum();
        let spectrum = to_density(&c, &basis, &w).unwrap();
        prop_assert!((spectrum.integral() - total).abs() < 0.01 * total);
    }
}
