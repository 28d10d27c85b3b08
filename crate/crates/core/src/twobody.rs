//! Two-particle wave function on the product grid and its split-operator
//! propagation, in real and imaginary time.
//!
//! `psi[(i, j)] = Ψ(x_i, x_j)`. One-particle operators act on particle 1 by
//! left multiplication and on particle 2 by right multiplication with the
//! transpose; the interaction acts elementwise.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eigenbasis::EigenBasis;
use crate::error::{Error, Result};
use crate::grid::{CapSpec, Grid1D};
use crate::hamiltonian::Hamiltonian;
use crate::matrix::{CMat, C64};
use crate::spectral::SpectralKinetic;

/// Gaussian projectile: minimum-uncertainty packet with position width
/// `1 / (2 σ_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePacketSpec {
    pub center: f64,
    pub momentum: f64,
    pub momentum_width: f64,
}

impl WavePacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.momentum_width > 0.0) || !self.momentum_width.is_finite() {
            return Err(Error::param(
                "packet.momentum_width",
                format!("must be positive, got {}", self.momentum_width),
            ));
        }
        if !self.center.is_finite() || !self.momentum.is_finite() {
            return Err(Error::param("packet", "center and momentum must be finite"));
        }
        Ok(())
    }

    pub fn position_width(&self) -> f64 {
        0.5 / self.momentum_width
    }

    /// Packet on the grid, normalized so that `h Σ |χ|² = 1`.
    pub fn sample(&self, grid: &Grid1D) -> Vec<C64> {
        let sx = self.position_width();
        let mut chi: Vec<C64> = grid
            .x()
            .iter()
            .map(|&x| {
                let d = x - self.center;
                C64::from_polar((-d * d / (4.0 * sx * sx)).exp(), self.momentum * x)
            })
            .collect();
        let norm = (grid.h() * chi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        chi.iter_mut().for_each(|z| *z /= norm);
        chi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyState {
    psi: CMat,
    h: f64,
    t: f64,
}

impl TwoBodyState {
    pub fn new(psi: CMat, h: f64, t: f64) -> Self {
        assert_eq!(psi.rows(), psi.cols());
        TwoBodyState { psi, h, t }
    }

    /// `N (a ⊗ b + b ⊗ a)`, normalized to unit squared norm.
    pub fn symmetric_product(a: &[C64], b: &[C64], h: f64) -> Self {
        let n = a.len();
        let psi = CMat::from_fn(n, n, |i, j| a[i] * b[j] + b[i] * a[j]);
        let mut s = TwoBodyState { psi, h, t: 0.0 };
        s.normalize();
        s
    }

    pub fn psi(&self) -> &CMat {
        &self.psi
    }

    pub fn psi_mut(&mut self) -> &mut CMat {
        &mut self.psi
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    pub fn len(&self) -> usize {
        self.psi.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.rows() == 0
    }

    /// `h² Σ |Ψ_ij|²`
    pub fn norm2(&self) -> f64 {
        self.h * self.h * self.psi.frobenius_sq()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm2().sqrt();
        if norm > 0.0 {
            self.psi.scale(1.0 / norm);
        }
    }

    const MAGIC: &'static [u8; 8] = b"CAPPSI01";

    /// Binary checkpoint: magic, n, h, t, then `(re, im)` column-major.
    pub fn save(&self, path: &Path) -> Result<()> {
        let n = self.len();
        let mut buf = Vec::with_capacity(32 + 16 * n * n);
        buf.extend_from_slice(Self::MAGIC);
        buf.extend_from_slice(&(n as u64).to_le_bytes());
        buf.extend_from_slice(&self.h.to_le_bytes());
        buf.extend_from_slice(&self.t.to_le_bytes());
        for z in self.psi.as_slice() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut buf)).map_err(|e| Error::io(path, e))?;
        let bad = |m: &str| Error::Parse { path: path.to_path_buf(), message: m.to_string() };
        if buf.len() < 32 || &buf[..8] != Self::MAGIC {
            return Err(bad("not a two-body checkpoint"));
        }
        let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
        if buf.len() != 32 + 16 * n * n {
            return Err(bad("truncated checkpoint"));
        }
        let data = (0..n * n).map(|k| C64::new(f64_at(32 + 16 * k), f64_at(40 + 16 * k))).collect();
        Ok(TwoBodyState { psi: CMat::from_col_major(n, n, data), h: f64_at(16), t: f64_at(24) })
    }
}

/// Fraction of `h Σ |χ|²` lying at or beyond the absorber onset.
pub fn fraction_in_cap(grid: &Grid1D, onset: f64, chi: &[C64]) -> f64 {
    let total: f64 = chi.iter().map(|z| z.norm_sqr()).sum();
    let inside: f64 = grid.x().iter().zip(chi).filter(|(x, _)| x.abs() >= onset).map(|(_, z)| z.norm_sqr()).sum();
    inside / total
}

/// Projectile packet incident on a target in the ground state of `basis`.
pub fn init_scattering_state(
    grid: &Grid1D,
    basis: &EigenBasis,
    cap: &CapSpec,
    packet: &WavePacketSpec,
) -> Result<TwoBodyState> {
    packet.validate()?;
    let ground_energy = basis.energies()[0];
    if ground_energy >= 0.0 {
        return Err(Error::NoBoundState { energy: ground_energy });
    }
    let chi = packet.sample(grid);
    let fraction = fraction_in_cap(grid, cap.onset, &chi);
    if fraction > 0.01 {
        return Err(Error::PacketInCap { fraction });
    }
    let target: Vec<C64> = basis.state(0).iter().map(|&v| C64::new(v, 0.0)).collect();
    Ok(TwoBodyState::symmetric_product(&chi, &target, grid.h()))
}

/// Second-order split-operator step for the two-body state:
/// `Ψ ← F ∘ (K (F ∘ Ψ) Kᵀ)` with `F_ij = exp(-i dt (W_ij + V_i + V_j - i(γ_i + γ_j)) / 2)`
/// and `K = exp(-i dt κ(k, A(t + τ/2)))`.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    kinetic: SpectralKinetic,
    factor: CMat,
    dt: C64,
    tau: f64,
}

impl SplitOperator {
    pub fn real_time(ham: &Hamiltonian, tau: f64) -> Result<Self> {
        Self::build(ham, tau, C64::new(tau, 0.0))
    }

    /// `t → -it`; the absorber and the pulse are ignored.
    pub fn imaginary_time(ham: &Hamiltonian, tau: f64) -> Result<Self> {
        Self::build(&ham.without_cap(), tau, C64::new(0.0, -tau))
    }

    fn build(ham: &Hamiltonian, tau: f64, dt: C64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::param("tau", format!("must be positive, got {tau}")));
        }
        let grid = ham.grid();
        let n = grid.len();
        let p = ham.half_diagonal(dt);
        let half = C64::new(0.0, -0.5) * dt;
        let factor = CMat::from_fn(n, n, |i, j| {
            let w = ham.interaction().map_or(0.0, |w| w[(i, j)]);
            p[i] * p[j] * (half * w).exp()
        });
        Ok(SplitOperator { kinetic: SpectralKinetic::new(grid), factor, dt, tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn is_imaginary(&self) -> bool {
        self.dt.re == 0.0
    }

    /// Advance by one step; requires an exchange-symmetric state.
    pub fn step(&mut self, ham: &Hamiltonian, state: &mut TwoBodyState) {
        let a = if self.is_imaginary() { 0.0 } else { ham.vector_potential(state.t + 0.5 * self.tau) };
        self.kinetic.set_exponential(self.dt, a);
        let psi = &mut state.psi;
        psi.hadamard_in_place(&self.factor);
        self.kinetic.apply_columns(psi);
        psi.transpose_in_place();
        self.kinetic.apply_columns(psi);
        psi.symmetrize();
        psi.hadamard_in_place(&self.factor);
        state.t += self.tau;
    }

    pub fn kinetic_mut(&mut self) -> &mut SpectralKinetic {
        &mut self.kinetic
    }
}

/// Split-operator step for a single particle, `φ ← P K P φ`.
#[derive(Debug, Clone)]
pub struct OneBodySplit {
    kinetic: SpectralKinetic,
    diagonal: Vec<C64>,
    dt: C64,
    tau: f64,
}

impl OneBodySplit {
    pub fn real_time(ham: &Hamiltonian, tau: f64) -> Result<Self> {
        Self::build(ham, tau, C64::new(tau, 0.0))
    }

    pub fn imaginary_time(ham: &Hamiltonian, tau: f64) -> Result<Self> {
        Self::build(&ham.without_cap(), tau, C64::new(0.0, -tau))
    }

    fn build(ham: &Hamiltonian, tau: f64, dt: C64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::param("tau", format!("must be positive, got {tau}")));
        }
        Ok(OneBodySplit { kinetic: SpectralKinetic::new(ham.grid()), diagonal: ham.half_diagonal(dt), dt, tau })
    }

    pub fn step(&mut self, ham: &Hamiltonian, t: f64, phi: &mut [C64]) {
        let a = if self.dt.re == 0.0 { 0.0 } else { ham.vector_potential(t + 0.5 * self.tau) };
        self.kinetic.set_exponential(self.dt, a);
        phi.iter_mut().zip(&self.diagonal).for_each(|(z, d)| *z *= d);
        self.kinetic.apply(phi);
        phi.iter_mut().zip(&self.diagonal).for_each(|(z, d)| *z *= d);
    }
}

/// Imaginary-time relaxation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxSpec {
    pub tau: f64,
    /// Convergence when the energy changes by less than this between checks.
    pub tolerance: f64,
    pub max_steps: usize,
    pub check_every: usize,
}

impl Default for RelaxSpec {
    fn default() -> Self {
        RelaxSpec { tau: 0.05, tolerance: 1e-10, max_steps: 200_000, check_every: 10 }
    }
}

impl RelaxSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::param("relax.tau", "must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::param("relax.tolerance", "must be positive"));
        }
        if self.check_every == 0 || self.max_steps == 0 {
            return Err(Error::param("relax", "check_every and max_steps must be at least 1"));
        }
        Ok(())
    }
}

fn starting_guess(grid: &Grid1D) -> Vec<C64> {
    let width = (grid.half_extent() / 8.0).max(1.0);
    grid.x().iter().map(|&x| C64::new((-0.5 * (x / width).powi(2)).exp(), 0.0)).collect()
}

/// Lowest one-body eigenstate by imaginary-time propagation. Returns the
/// state normalized to `h Σ φ² = 1` and its energy.
pub fn relax_one_body(ham: &Hamiltonian, spec: &RelaxSpec) -> Result<(Vec<f64>, f64)> {
    spec.validate()?;
    let grid = ham.grid();
    let h = grid.h();
    let mut stepper = OneBodySplit::imaginary_time(ham, spec.tau)?;
    let mut kinetic = SpectralKinetic::new(grid);
    let mut phi = starting_guess(grid);
    let mut last = f64::INFINITY;
    let mut delta = f64::INFINITY;
    for step in 1..=spec.max_steps {
        stepper.step(ham, 0.0, &mut phi);
        let norm = (h * phi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        phi.iter_mut().for_each(|z| *z /= norm);
        if step % spec.check_every == 0 {
            let e = ham.one_body_energy(&mut kinetic, 0.0, &phi);
            delta = (e - last).abs();
            last = e;
            if delta < spec.tolerance {
                return Ok((phi.iter().map(|z| z.re).collect(), e));
            }
        }
    }
    Err(Error::NoConvergence { steps: spec.max_steps, energy: last, delta })
}

/// Lowest exchange-symmetric two-body eigenstate by imaginary-time propagation.
pub fn relax_two_body(ham: &Hamiltonian, spec: &RelaxSpec) -> Result<(TwoBodyState, f64)> {
    spec.validate()?;
    let grid = ham.grid();
    let g = starting_guess(grid);
    let mut state = TwoBodyState::symmetric_product(&g, &g, grid.h());
    let mut stepper = SplitOperator::imaginary_time(ham, spec.tau)?;
    let mut kinetic = SpectralKinetic::new(grid);
    let mut last = f64::INFINITY;
    let mut delta = f64::INFINITY;
    for step in 1..=spec.max_steps {
        stepper.step(ham, &mut state);
        state.normalize();
        if step % spec.check_every == 0 {
            let e = ham.two_body_energy(&mut kinetic, 0.0, state.psi());
            delta = (e - last).abs();
            last = e;
            if delta < spec.tolerance {
                state.set_t(0.0);
                return Ok((state, e));
            }
        }
    }
    Err(Error::NoConvergence { steps: spec.max_steps, energy: last, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{InteractionSpec, PotentialSpec};

    #[test]
    fn harmonic_oscillator_relaxes_to_one_half() {
        let g = Grid1D::new(10.0, 80).unwrap();
        let ham = Hamiltonian::new(&g, &PotentialSpec::Harmonic { stiffness: 1.0 }).unwrap();
        let (phi, e) = relax_one_body(&ham, &RelaxSpec { tau: 0.01, ..Default::default() }).unwrap();
        assert!((e - 0.5).abs() < 1e-6, "{e}");
        assert!((g.h() * phi.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let g = Grid1D::new(10.0, 40).unwrap();
        let ham = Hamiltonian::new(&g, &PotentialSpec::Harmonic { stiffness: 1.0 }).unwrap();
        let spec = RelaxSpec { tau: 0.01, tolerance: 1e-14, max_steps: 20, check_every: 10 };
        assert!(matches!(relax_one_body(&ham, &spec), Err(Error::NoConvergence { steps: 20, .. })));
    }

    #[test]
    fn scattering_state_is_symmetric_and_normalized() {
        let g = Grid1D::new(40.0, 320).unwrap();
        let pot = PotentialSpec::Gaussian { strength: 4.0, width: 3.0 / (2.0 * 2f64.sqrt()) };
        let basis = EigenBasis::from_potential(&g, &pot).unwrap();
        let packet = WavePacketSpec { center: -20.0, momentum: 2.0, momentum_width: 0.1 };
        let cap = CapSpec { gamma0: 1.0, onset: 35.0 };
        let s = init_scattering_state(&g, &basis, &cap, &packet).unwrap();
        assert!((s.norm2() - 1.0).abs() < 1e-12);
        assert_eq!(s.psi().max_asymmetry(), 0.0);

        let near = WavePacketSpec { center: -33.0, ..packet };
        assert!(matches!(init_scattering_state(&g, &basis, &cap, &near), Err(Error::PacketInCap { .. })));
    }

    #[test]
    fn unitary_without_absorber() {
        let g = Grid1D::new(10.0, 48).unwrap();
        let ham = Hamiltonian::new(&g, &PotentialSpec::SoftCoulomb { strength: 0.5, width: 0.5 })
            .unwrap()
            .with_interaction(&InteractionSpec { strength: 0.5, smoothness: 0.5 })
            .unwrap();
        let chi = WavePacketSpec { center: -2.0, momentum: 1.0, momentum_width: 0.5 }.sample(&g);
        let phi = WavePacketSpec { center: 1.0, momentum: -0.5, momentum_width: 0.7 }.sample(&g);
        let mut s = TwoBodyState::symmetric_product(&chi, &phi, g.h());
        let mut op = SplitOperator::real_time(&ham, 0.05).unwrap();
        for _ in 0..50 {
            let before = s.norm2();
            op.step(&ham, &mut s);
            assert!((s.norm2() - before).abs() < 1e-12);
            assert_eq!(s.psi().max_asymmetry(), 0.0);
        }
        assert!((s.t() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = Grid1D::new(4.0, 8).unwrap();
        let a: Vec<C64> = (0..8).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut s = TwoBodyState::symmetric_product(&a, &a, g.h());
        s.set_t(3.25);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("psi.bin");
        s.save(&p).unwrap();
        assert_eq!(TwoBodyState::load(&p).unwrap(), s);
    }
}
