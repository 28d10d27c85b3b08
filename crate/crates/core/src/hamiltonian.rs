//! Grid representation of the effective Hamiltonian
//! `H = Σ_i [p_i²/2 + A(t) p_i + V(x_i) - iγ(x_i)] + W(x_1 - x_2)`.
//!
//! Everything here is diagonal either in position or in momentum, so the
//! propagators only ever need pointwise data plus [`SpectralKinetic`].

use crate::error::Result;
use crate::grid::{CapSpec, Grid1D, InteractionSpec, PotentialSpec, PulseSpec};
use crate::matrix::{CMat, RMat, C64};
use crate::spectral::SpectralKinetic;

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid1D,
    potential: Vec<f64>,
    cap: Vec<f64>,
    interaction: Option<RMat>,
    pulse: Option<PulseSpec>,
}

impl Hamiltonian {
    pub fn new(grid: &Grid1D, potential: &PotentialSpec) -> Result<Self> {
        Ok(Self::from_values(grid, potential.values(grid)?))
    }

    /// One-body Hamiltonian with an explicit potential on the grid.
    pub fn from_values(grid: &Grid1D, potential: Vec<f64>) -> Self {
        assert_eq!(potential.len(), grid.len());
        Hamiltonian { grid: grid.clone(), potential, cap: vec![0.0; grid.len()], interaction: None, pulse: None }
    }

    pub fn with_cap(mut self, cap: &CapSpec) -> Result<Self> {
        self.cap = cap.values(&self.grid)?;
        Ok(self)
    }

    pub fn with_cap_values(mut self, cap: Vec<f64>) -> Self {
        assert_eq!(cap.len(), self.grid.len());
        self.cap = cap;
        self
    }

    pub fn with_interaction(mut self, interaction: &InteractionSpec) -> Result<Self> {
        self.interaction = Some(interaction.matrix(&self.grid)?);
        Ok(self)
    }

    pub fn with_pulse(mut self, pulse: PulseSpec) -> Result<Self> {
        pulse.validate()?;
        self.pulse = Some(pulse);
        Ok(self)
    }

    pub fn without_cap(&self) -> Self {
        let mut h = self.clone();
        h.cap.fill(0.0);
        h
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn cap(&self) -> &[f64] {
        &self.cap
    }

    pub fn interaction(&self) -> Option<&RMat> {
        self.interaction.as_ref()
    }

    pub fn pulse(&self) -> Option<&PulseSpec> {
        self.pulse.as_ref()
    }

    pub fn has_cap(&self) -> bool {
        self.cap.iter().any(|&g| g > 0.0)
    }

    pub fn vector_potential(&self, t: f64) -> f64 {
        self.pulse.map_or(0.0, |p| p.vector_potential(t))
    }

    /// Indices where `γ > 0`.
    pub fn cap_indices(&self) -> Vec<usize> {
        (0..self.cap.len()).filter(|&i| self.cap[i] > 0.0).collect()
    }

    /// `exp(-i dt (V - iγ) / 2)` per grid point.
    pub fn half_diagonal(&self, dt: C64) -> Vec<C64> {
        self.potential
            .iter()
            .zip(&self.cap)
            .map(|(&v, &g)| (C64::new(0.0, -0.5) * dt * C64::new(v, -g)).exp())
            .collect()
    }

    /// `m ← h_eff(t) m` for the one-body `h_eff = T + A(t) p + V - iγ`
    /// (the absorber is dropped when `with_cap` is false).
    pub fn apply_one_body(&self, kinetic: &mut SpectralKinetic, t: f64, m: &mut CMat, with_cap: bool) {
        let n = self.grid.len();
        let original = m.clone();
        kinetic.set_operator(self.vector_potential(t));
        kinetic.apply(m.as_mut_slice());
        for (out, src) in m.as_mut_slice().chunks_exact_mut(n).zip(original.as_slice().chunks_exact(n)) {
            for i in 0..n {
                let g = if with_cap { self.cap[i] } else { 0.0 };
                out[i] += C64::new(self.potential[i], -g) * src[i];
            }
        }
    }

    /// `H Ψ` for the Hermitian part of the two-body Hamiltonian at time `t`.
    pub fn apply_two_body_hermitian(&self, kinetic: &mut SpectralKinetic, t: f64, psi: &CMat) -> CMat {
        let n = self.grid.len();
        let mut left = psi.clone();
        self.apply_one_body(kinetic, t, &mut left, false);
        let mut right = psi.transpose();
        self.apply_one_body(kinetic, t, &mut right, false);
        right.transpose_in_place();
        left.axpy(C64::new(1.0, 0.0), &right);
        if let Some(w) = &self.interaction {
            for j in 0..n {
                for i in 0..n {
                    left[(i, j)] += w[(i, j)] * psi[(i, j)];
                }
            }
        }
        left
    }

    /// `<Ψ|H|Ψ> / <Ψ|Ψ>` without the absorber.
    pub fn two_body_energy(&self, kinetic: &mut SpectralKinetic, t: f64, psi: &CMat) -> f64 {
        let hpsi = self.apply_two_body_hermitian(kinetic, t, psi);
        let num: f64 = psi.as_slice().iter().zip(hpsi.as_slice()).map(|(a, b)| (a.conj() * b).re).sum();
        num / psi.frobenius_sq()
    }

    /// `<φ|h|φ> / <φ|φ>` for a one-body vector, without the absorber.
    pub fn one_body_energy(&self, kinetic: &mut SpectralKinetic, t: f64, phi: &[C64]) -> f64 {
        let mut m = CMat::from_col_major(phi.len(), 1, phi.to_vec());
        self.apply_one_body(kinetic, t, &mut m, false);
        let num: f64 = phi.iter().zip(m.as_slice()).map(|(a, b)| (a.conj() * b).re).sum();
        num / phi.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}
