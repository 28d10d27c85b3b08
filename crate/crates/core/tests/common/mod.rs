//! Independent references on tiny grids: dense operators built from explicit
//! Fourier sums and integrated with fine-step RK4, and direct summation of the
//! time-integrated density.

#![allow(dead_code)]

use capspectra::eigenbasis::EigenBasis;
use capspectra::grid::{CapSpec, Grid1D, InteractionSpec, PotentialSpec, PulseSpec};
use capspectra::hamiltonian::Hamiltonian;
use capspectra::lindblad::{DensityPropagator, OneBodyDensity};
use capspectra::matrix::{CMat, C64};
use capspectra::spectra::{AccumulationScope, SpectralAccumulator};
use capspectra::twobody::{SplitOperator, TwoBodyState};

const I: C64 = C64::new(0.0, 1.0);

pub fn grid8() -> Grid1D {
    Grid1D::new(4.0, 8).unwrap()
}

/// Dense `h_eff(t) = p²/2 + A(t) p + V - iγ` from explicit Fourier sums.
fn dense_one_body(grid: &Grid1D, v: &[f64], gamma: &[f64], a: f64) -> CMat {
    let n = grid.len();
    let m = n as i64;
    let dk = 2.0 * std::f64::consts::PI / (2.0 * grid.half_extent());
    CMat::from_fn(n, n, |i, j| {
        let mut s = C64::default();
        for q in -(m / 2)..(m / 2) {
            let k = q as f64 * dk;
            let phase = C64::from_polar(1.0, k * (i as f64 - j as f64) * grid.h());
            s += phase * (0.5 * k * k + a * k);
        }
        s /= n as f64;
        if i == j {
            s += C64::new(v[i], -gamma[i]);
        }
        s
    })
}

fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.rows();
    CMat::from_fn(n, b.cols(), |i, j| (0..a.cols()).map(|l| a[(i, l)] * b[(l, j)]).sum())
}

fn add(a: &CMat, b: &CMat, s: C64) -> CMat {
    let mut c = a.clone();
    c.axpy(s, b);
    c
}

fn rk4<F: Fn(f64, &CMat) -> CMat>(f: F, y0: &CMat, t0: f64, tau: f64, substeps: usize) -> CMat {
    let dt = tau / substeps as f64;
    let mut y = y0.clone();
    let one = C64::new(1.0, 0.0);
    for s in 0..substeps {
        let t = t0 + s as f64 * dt;
        let k1 = f(t, &y);
        let k2 = f(t + dt / 2.0, &add(&y, &k1, one * (dt / 2.0)));
        let k3 = f(t + dt / 2.0, &add(&y, &k2, one * (dt / 2.0)));
        let k4 = f(t + dt, &add(&y, &k3, one * dt));
        let mut incr = add(&k1, &k2, one * 2.0);
        incr = add(&incr, &k3, one * 2.0);
        incr = add(&incr, &k4, one);
        y = add(&y, &incr, one * (dt / 6.0));
    }
    y
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    a.max_abs_diff(b)
}

struct Toy {
    grid: Grid1D,
    v: Vec<f64>,
    gamma: Vec<f64>,
    w: Vec<f64>,
    pulse: PulseSpec,
    ham: Hamiltonian,
}

fn toy() -> Toy {
    let grid = grid8();
    let pot = PotentialSpec::Gaussian { strength: 1.5, width: 1.2 };
    let cap = CapSpec { gamma0: 0.3, onset: 2.5 };
    let inter = InteractionSpec { strength: 0.8, smoothness: 0.7 };
    let pulse = PulseSpec { field: 0.4, omega: 1.3, cycles: 2 };
    let ham = Hamiltonian::new(&grid, &pot)
        .unwrap()
        .with_cap(&cap)
        .unwrap()
        .with_interaction(&inter)
        .unwrap()
        .with_pulse(pulse)
        .unwrap();
    let x = grid.x().to_vec();
    let w = (0..64).map(|k| inter.value(x[k % 8] - x[k / 8])).collect();
    Toy {
        v: x.iter().map(|&xi| pot.value(xi)).collect(),
        gamma: x.iter().map(|&xi| cap.value(xi)).collect(),
        w,
        pulse,
        ham,
        grid,
    }
}

fn symmetric_state(n: usize) -> CMat {
    let mut m = CMat::from_fn(n, n, |i, j| {
        let (a, b) = (i as f64, j as f64);
        C64::new((0.3 * a - 0.2 * b).cos() + 0.1 * a * b, (0.5 * a + 0.4 * b).sin())
    });
    m.symmetrize();
    m
}

/// `dΨ/dt = -i (h Ψ + Ψ hᵀ + W ∘ Ψ)`
fn two_body_rhs(t: &Toy) -> impl Fn(f64, &CMat) -> CMat + '_ {
    move |time, psi| {
        let h1 = dense_one_body(&t.grid, &t.v, &t.gamma, t.pulse.vector_potential(time));
        let left = matmul(&h1, psi);
        let right = matmul(psi, &h1.transpose());
        let mut out = add(&left, &right, C64::new(1.0, 0.0));
        for (k, z) in out.as_mut_slice().iter_mut().enumerate() {
            *z += t.w[k] * psi.as_slice()[k];
            *z *= -I;
        }
        out
    }
}

/// `dρ/dt = -i (h ρ - ρ h†) + S(t)`
fn rho_rhs<'a>(t: &'a Toy, source: &'a dyn Fn(f64) -> CMat) -> impl Fn(f64, &CMat) -> CMat + 'a {
    move |time, rho| {
        let h1 = dense_one_body(&t.grid, &t.v, &t.gamma, t.pulse.vector_potential(time));
        let comm = add(&matmul(&h1, rho), &matmul(rho, &h1.adjoint()), C64::new(-1.0, 0.0));
        add(&source(time), &comm, -I)
    }
}

fn toy_source(time: f64) -> CMat {
    let b = CMat::from_fn(8, 3, |i, j| C64::new((i as f64 * 0.7 + j as f64).sin(), 0.2 * (i + 2 * j) as f64 / 8.0));
    let mut s = matmul(&b, &b.adjoint());
    s.scale(0.05 * (1.0 + 0.5 * (0.9 * time).sin()));
    s
}

fn initial_rho() -> CMat {
    let chi: Vec<C64> = (0..8).map(|i| C64::new(1.0 / (1.0 + (i as f64 - 3.5).powi(2)), 0.1 * i as f64)).collect();
    CMat::from_fn(8, 8, |i, j| chi[i] * chi[j].conj())
}

fn scheme_run(t: &Toy, rho0: &CMat, t0: f64, tau: f64, steps: usize) -> CMat {
    let mut rho = OneBodyDensity::from_matrix(rho0.clone(), t.grid.h(), t0);
    let mut prop = DensityPropagator::new(&t.ham, tau).unwrap();
    for k in 0..steps {
        let now = toy_source(t0 + k as f64 * tau);
        let next = toy_source(t0 + (k + 1) as f64 * tau);
        prop.step(&t.ham, &mut rho, Some((&now, &next)));
    }
    rho.rho().clone()
}

fn psi_at(step: usize) -> CMat {
    let s = step as f64;
    let mut m = CMat::from_fn(8, 8, |i, j| {
        C64::from_polar(1.0 / (1.0 + 0.1 * (i * j) as f64), 0.3 * s * (i as f64 - j as f64) + 0.2 * (i + j) as f64)
    });
    m.symmetrize();
    m
}

/// One-step defects of the two-body split step against RK4, for
/// `τ = 0.2, 0.1, 0.05`.
pub fn split_local_defects() -> Vec<f64> {
    let t = toy();
    let psi0 = symmetric_state(8);
    let t0 = 1.1;
    [0.2, 0.1, 0.05]
        .iter()
        .map(|&tau| {
            let reference = rk4(two_body_rhs(&t), &psi0, t0, tau, 2000);
            let mut state = TwoBodyState::new(psi0.clone(), t.grid.h(), t0);
            let mut op = SplitOperator::real_time(&t.ham, tau).unwrap();
            op.step(&t.ham, &mut state);
            max_diff(state.psi(), &reference)
        })
        .collect()
}

/// Errors at `t = 1.6` after 16, 32 and 64 split steps.
pub fn split_global_errors() -> Vec<f64> {
    let t = toy();
    let psi0 = symmetric_state(8);
    let end = 1.6;
    let reference = rk4(two_body_rhs(&t), &psi0, 0.0, end, 8000);
    [16, 32, 64]
        .iter()
        .map(|&steps| {
            let tau = end / steps as f64;
            let mut state = TwoBodyState::new(psi0.clone(), t.grid.h(), 0.0);
            let mut op = SplitOperator::real_time(&t.ham, tau).unwrap();
            for _ in 0..steps {
                op.step(&t.ham, &mut state);
            }
            max_diff(state.psi(), &reference)
        })
        .collect()
}

/// One-step defects of the density scheme with a time-dependent source.
pub fn density_local_defects() -> Vec<f64> {
    let t = toy();
    let rho0 = initial_rho();
    let src: &dyn Fn(f64) -> CMat = &toy_source;
    let t0 = 0.7;
    [0.2, 0.1, 0.05]
        .iter()
        .map(|&tau| {
            let reference = rk4(rho_rhs(&t, src), &rho0, t0, tau, 2000);
            max_diff(&scheme_run(&t, &rho0, t0, tau, 1), &reference)
        })
        .collect()
}

/// Density-scheme errors at `t = 1.6` after 16, 32 and 64 steps.
pub fn density_global_errors() -> Vec<f64> {
    let t = toy();
    let rho0 = initial_rho();
    let src: &dyn Fn(f64) -> CMat = &toy_source;
    let end = 1.6;
    let reference = rk4(rho_rhs(&t, src), &rho0, 0.0, end, 8000);
    [16, 32, 64]
        .iter()
        .map(|&steps| max_diff(&scheme_run(&t, &rho0, 0.0, end / steps as f64, steps), &reference))
        .collect()
}

/// Largest relative deviation between the projected spectra (both scopes,
/// first and second absorption) and a direct double sum over grid points.
pub fn spectrum_projection_error() -> f64 {
    let g = grid8();
    let h = g.h();
    let tau = 0.1;
    let cap = CapSpec { gamma0: 0.7, onset: 1.5 }.values(&g).unwrap();
    let basis = EigenBasis::from_potential(&g, &PotentialSpec::Gaussian { strength: 1.0, width: 1.0 }).unwrap();
    let mut acc_cols = SpectralAccumulator::new(&cap, h, AccumulationScope::CapColumns);
    let mut acc_full = SpectralAccumulator::new(&cap, h, AccumulationScope::Full);
    let mut phi = vec![vec![C64::default(); 8]; 8];
    let mut r = vec![vec![C64::default(); 8]; 8];
    for step in 0..5 {
        let psi = psi_at(step);
        acc_cols.accumulate_psi(&psi, tau);
        acc_full.accumulate_psi(&psi, tau);
        let rho = CMat::from_fn(8, 8, |a, b| (0..8).map(|y| psi[(a, y)] * psi[(b, y)].conj()).sum::<C64>() * h);
        acc_cols.accumulate_rho(&rho, tau);
        acc_full.accumulate_rho(&rho, tau);
        for a in 0..8 {
            for b in 0..8 {
                for y in 0..8 {
                    phi[a][b] += psi[(a, y)] * psi[(b, y)].conj() * (h * tau);
                }
                r[a][b] += rho[(a, b)] * tau;
            }
        }
    }
    let direct = |m: &Vec<Vec<C64>>, scale: f64, k: usize| -> f64 {
        let f = basis.state(k);
        let mut s = C64::default();
        for a in 0..8 {
            for b in 0..8 {
                s += f[a] * (cap[a] + cap[b]) * m[a][b] * f[b];
            }
        }
        scale * h * h * s.re
    };
    let results = [
        (acc_cols.discrete_first(&basis), &phi, 2.0),
        (acc_full.discrete_first(&basis), &phi, 2.0),
        (acc_cols.discrete_second(&basis), &r, 1.0),
        (acc_full.discrete_second(&basis), &r, 1.0),
    ];
    let mut worst = 0.0f64;
    for (values, m, scale) in &results {
        for (k, v) in values.iter().enumerate() {
            let d = direct(m, *scale, k);
            worst = worst.max((v - d).abs() / d.abs().max(1.0));
        }
    }
    worst
}
