//! One-particle density matrix fed by absorption from the two-particle state,
//! and the vacuum probability fed by absorption from the one-particle sector.
//!
//! `dρ/dt = -i(h_eff ρ - ρ h_eff†) + S`, `S = 4h Ψ D Ψ†`, `dp0/dt = 2h Σ_i γ_i ρ_ii`,
//! with `h_eff = T + A(t) p + V - iγ` and `D = diag(γ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::{Accum, Par};

use crate::matrix::{CMat, C64};
use crate::spectral::SpectralKinetic;

#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyDensity {
    rho: CMat,
    h: f64,
    t: f64,
}

impl OneBodyDensity {
    pub fn zeros(n: usize, h: f64) -> Self {
        OneBodyDensity { rho: CMat::zeros(n, n), h, t: 0.0 }
    }

    pub fn from_matrix(rho: CMat, h: f64, t: f64) -> Self {
        assert_eq!(rho.rows(), rho.cols());
        OneBodyDensity { rho, h, t }
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `h tr ρ`
    pub fn probability(&self) -> f64 {
        self.h * self.rho.trace().re
    }

    /// Rate at which probability leaves through the absorber, `2h Σ γ_i ρ_ii`.
    pub fn absorption_rate(&self, cap: &[f64]) -> f64 {
        2.0 * self.h
            * cap.iter().enumerate().filter(|(_, &g)| g > 0.0).map(|(i, &g)| g * self.rho[(i, i)].re).sum::<f64>()
    }
}

/// Global probability bookkeeping: `|Ψ|² + h tr ρ + p0 = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceLedger {
    pub t: f64,
    pub p0: f64,
    pub norm2_psi: f64,
    pub trace_rho1: f64,
    #[serde(skip)]
    rate: f64,
}

impl TraceLedger {
    pub fn new(norm2_psi: f64) -> Self {
        TraceLedger { norm2_psi, ..Default::default() }
    }

    pub fn residual(&self) -> f64 {
        1.0 - (self.norm2_psi + self.trace_rho1 + self.p0)
    }

    /// Trapezoidal update of `p0` over one step ending at the current `rho`.
    pub fn update_p0(&mut self, rho: &OneBodyDensity, cap: &[f64], tau: f64) {
        let rate = rho.absorption_rate(cap);
        self.p0 += 0.5 * tau * (self.rate + rate);
        self.rate = rate;
        self.trace_rho1 = rho.probability();
        self.t = rho.t();
    }
}

/// `S = 4h Ψ D Ψ†` for an arbitrary absorber.
pub fn source_matrix(psi: &CMat, cap: &[f64], h: f64) -> CMat {
    let mut builder = SourceBuilder::new(cap, psi.rows());
    let mut s = CMat::zeros(psi.rows(), psi.rows());
    builder.compute(psi, h, &mut s);
    s
}

/// Reusable buffers for the source term; only the absorber columns of `Ψ`
/// enter, as `S = 4h B B†` with `B = Ψ[:, C] diag(√γ_C)`.
#[derive(Debug, Clone)]
pub struct SourceBuilder {
    columns: Vec<usize>,
    sqrt_gamma: Vec<f64>,
    b: CMat,
}

impl SourceBuilder {
    pub fn new(cap: &[f64], n: usize) -> Self {
        let columns: Vec<usize> = (0..cap.len()).filter(|&i| cap[i] > 0.0).collect();
        let sqrt_gamma = columns.iter().map(|&c| cap[c].sqrt()).collect();
        let b = CMat::zeros(n, columns.len());
        SourceBuilder { columns, sqrt_gamma, b }
    }

    pub fn compute(&mut self, psi: &CMat, h: f64, out: &mut CMat) {
        if self.columns.is_empty() {
            out.fill(C64::default());
            return;
        }
        for (k, (&c, &sg)) in self.columns.iter().zip(&self.sqrt_gamma).enumerate() {
            for (dst, src) in self.b.col_mut(k).iter_mut().zip(psi.col(c)) {
                *dst = src * sg;
            }
        }
        // lower triangle only, then mirrored
        triangular::matmul(
            out.view_mut(),
            BlockStructure::TriangularLower,
            Accum::Replace,
            self.b.view(),
            BlockStructure::Rectangular,
            self.b.view().adjoint(),
            BlockStructure::Rectangular,
            C64::new(4.0 * h, 0.0),
            Par::Seq,
        );
        out.mirror_lower();
    }
}

/// Second-order step for `ρ`:
///
/// `ρ(t+τ) = U ρ U† + τ/2 (S(t) + S(t+τ)) - i τ²/2 (h_eff(t) S(t) - S(t) h_eff(t)†)`
///
/// with `U = exp(-iτ h_eff(t + τ/2))` applied through the split-operator
/// factorization.
#[derive(Debug, Clone)]
pub struct DensityPropagator {
    kinetic: SpectralKinetic,
    operator: SpectralKinetic,
    factor: CMat,
    scratch: CMat,
    tau: f64,
}

impl DensityPropagator {
    pub fn new(ham: &Hamiltonian, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::param("tau", format!("must be positive, got {tau}")));
        }
        let grid = ham.grid();
        let n = grid.len();
        let p = ham.half_diagonal(C64::new(tau, 0.0));
        Ok(DensityPropagator {
            kinetic: SpectralKinetic::new(grid),
            operator: SpectralKinetic::new(grid),
            factor: CMat::from_fn(n, n, |i, j| p[i] * p[j].conj()),
            scratch: CMat::zeros(n, n),
            tau,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `ρ ← U ρ U†`
    pub fn evolve(&mut self, ham: &Hamiltonian, rho: &mut OneBodyDensity) {
        let a = ham.vector_potential(rho.t + 0.5 * self.tau);
        self.kinetic.set_exponential(C64::new(self.tau, 0.0), a);
        let m = &mut rho.rho;
        m.hadamard_in_place(&self.factor);
        self.kinetic.apply_columns(m);
        m.adjoint_in_place();
        self.kinetic.apply_columns(m);
        m.hadamard_in_place(&self.factor);
        m.hermitize();
    }

    /// One full step. `sources` is `(S(t), S(t+τ))`; `None` means no source.
    pub fn step(&mut self, ham: &Hamiltonian, rho: &mut OneBodyDensity, sources: Option<(&CMat, &CMat)>) {
        let t = rho.t;
        self.evolve(ham, rho);
        if let Some((now, next)) = sources {
            let half = 0.5 * self.tau;
            let m = &mut rho.rho;
            for ((r, a), b) in m.as_mut_slice().iter_mut().zip(now.as_slice()).zip(next.as_slice()) {
                *r += (a + b) * half;
            }
            self.scratch.as_mut_slice().copy_from_slice(now.as_slice());
            ham.apply_one_body(&mut self.operator, t, &mut self.scratch, true);
            // -i τ²/2 (X - X†) with X = h_eff S is the Hermitian part of -i τ² X
            let c = C64::new(0.0, -self.tau * self.tau);
            for (r, x) in m.as_mut_slice().iter_mut().zip(self.scratch.as_slice()) {
                *r += c * x;
            }
            m.hermitize();
        }
        rho.t = t + self.tau;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CapSpec, Grid1D, PotentialSpec};

    #[test]
    fn source_vanishes_without_support_in_cap() {
        let n = 16;
        let cap: Vec<f64> = (0..n).map(|i| if i < 2 || i >= 14 { 1.0 } else { 0.0 }).collect();
        let psi = CMat::from_fn(n, n, |i, j| {
            if (4..12).contains(&i) && (4..12).contains(&j) {
                C64::new(1.0, (i + j) as f64)
            } else {
                C64::default()
            }
        });
        let s = source_matrix(&psi, &cap, 0.5);
        assert!(s.as_slice().iter().all(|z| *z == C64::default()));
    }

    #[test]
    fn single_entry_source() {
        let h = 0.7;
        let cap = [0.0, 0.0, 0.0, 2.5];
        let mut psi = CMat::zeros(4, 4);
        psi[(1, 3)] = C64::new(0.3, -0.4);
        let s = source_matrix(&psi, &cap, h);
        for j in 0..4 {
            for i in 0..4 {
                let want = if (i, j) == (1, 1) { 4.0 * h * 0.25 * 2.5 } else { 0.0 };
                assert!((s[(i, j)] - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dissipation_only_loses_probability() {
        let g = Grid1D::new(10.0, 32).unwrap();
        let ham =
            Hamiltonian::new(&g, &PotentialSpec::None).unwrap().with_cap(&CapSpec { gamma0: 0.5, onset: 4.0 }).unwrap();
        let chi: Vec<C64> = g.x().iter().map(|&x| C64::from_polar((-(x - 2.0).powi(2)).exp(), 1.5 * x)).collect();
        let balance = |tau: f64| {
            let rho0 = CMat::from_fn(32, 32, |i, j| chi[i] * chi[j].conj());
            let mut rho = OneBodyDensity::from_matrix(rho0, g.h(), 0.0);
            let mut prop = DensityPropagator::new(&ham, tau).unwrap();
            let mut ledger = TraceLedger::new(0.0);
            ledger.update_p0(&rho, ham.cap(), 0.0);
            let total = rho.probability();
            let mut last = total;
            for _ in 0..(5.0 / tau).round() as usize {
                prop.step(&ham, &mut rho, None);
                ledger.update_p0(&rho, ham.cap(), tau);
                assert!(rho.probability() < last);
                last = rho.probability();
                assert!(rho.rho().max_antihermiticity() == 0.0);
            }
            assert!(ledger.p0 > 0.5 * total);
            (total - ledger.trace_rho1 - ledger.p0) / total
        };
        let coarse = balance(0.05);
        let fine = balance(0.025);
        assert!(coarse.abs() < 2e-3);
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
