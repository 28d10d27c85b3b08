//! Time-integrated absorption data and its projection onto scattering states.
//!
//! `Φ = hτ Σ_t Ψ Ψ†` and `R = τ Σ_t ρ` are accumulated during propagation. The
//! discrete probabilities of absorption into state `k` are
//! `c_k = 2h² φ_k†(DΦ + ΦD)φ_k` (first absorption) and
//! `c_k = h² φ_k†(DR + RD)φ_k` (second absorption). Both only involve the
//! absorber columns of `Φ` and `R`, which is all that is stored by default.

use serde::{Deserialize, Serialize};

use crate::eigenbasis::{ContinuumWeights, EigenBasis, Parity};
use crate::error::{Error, Result};
use crate::matrix::{gemm, CMat, RMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AccumulationScope {
    /// Only the columns of `Φ` and `R` on which the absorber is nonzero.
    #[default]
    CapColumns,
    /// The full matrices.
    Full,
}

#[derive(Debug, Clone)]
pub struct SpectralAccumulator {
    scope: AccumulationScope,
    h: f64,
    columns: Vec<usize>,
    gamma: Vec<f64>,
    /// `Re Φ[:, C]` and `Re R[:, C]`; the projection needs nothing else.
    phi_re: RMat,
    r_re: RMat,
    /// `[Re Ψ, Im Ψ]` and the matching absorber rows, for the real product.
    split: RMat,
    gathered: RMat,
    full: Option<Full>,
}

#[derive(Debug, Clone)]
struct Full {
    phi: CMat,
    r: CMat,
    adjoint: CMat,
}

impl SpectralAccumulator {
    pub fn new(cap: &[f64], h: f64, scope: AccumulationScope) -> Self {
        let n = cap.len();
        let columns: Vec<usize> = match scope {
            AccumulationScope::CapColumns => (0..n).filter(|&i| cap[i] > 0.0).collect(),
            AccumulationScope::Full => (0..n).collect(),
        };
        let gamma = columns.iter().map(|&c| cap[c]).collect();
        let m = columns.len();
        let (split, gathered, full) = match scope {
            AccumulationScope::CapColumns => (RMat::zeros(n, 2 * n), RMat::zeros(2 * n, m), None),
            AccumulationScope::Full => (
                RMat::zeros(0, 0),
                RMat::zeros(0, 0),
                Some(Full { phi: CMat::zeros(n, n), r: CMat::zeros(n, n), adjoint: CMat::zeros(n, n) }),
            ),
        };
        SpectralAccumulator {
            scope,
            h,
            gamma,
            phi_re: RMat::zeros(n, m),
            r_re: RMat::zeros(n, m),
            split,
            gathered,
            full,
            columns,
        }
    }

    pub fn scope(&self) -> AccumulationScope {
        self.scope
    }

    /// Grid indices of the stored columns.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// The full complex `Φ`; `None` unless the scope is [`AccumulationScope::Full`].
    pub fn phi(&self) -> Option<&CMat> {
        self.full.as_ref().map(|f| &f.phi)
    }

    /// The full complex `R`; `None` unless the scope is [`AccumulationScope::Full`].
    pub fn r(&self) -> Option<&CMat> {
        self.full.as_ref().map(|f| &f.r)
    }

    /// `Re Φ` on the stored columns.
    pub fn phi_real(&self) -> &RMat {
        &self.phi_re
    }

    /// `Φ += h τ Ψ Ψ†` (stored columns only).
    pub fn accumulate_psi(&mut self, psi: &CMat, tau: f64) {
        if self.columns.is_empty() {
            return;
        }
        let alpha = self.h * tau;
        if let Some(full) = self.full.as_mut() {
            full.adjoint.as_mut_slice().copy_from_slice(psi.as_slice());
            full.adjoint.adjoint_in_place();
            gemm(&mut full.phi, true, psi.view(), full.adjoint.view(), C64::new(alpha, 0.0));
            let n = psi.rows();
            for (k, &c) in self.columns.iter().enumerate() {
                for l in 0..n {
                    self.phi_re[(l, k)] = full.phi[(l, c)].re;
                }
            }
            return;
        }
        // Re(Ψ Ψ†)[l, c] = Σ_m Re Ψ[l, m] Re Ψ[c, m] + Im Ψ[l, m] Im Ψ[c, m]
        let n = psi.rows();
        let (re, im) = self.split.as_mut_slice().split_at_mut(n * n);
        for ((r, i), z) in re.iter_mut().zip(im.iter_mut()).zip(psi.as_slice()) {
            *r = z.re;
            *i = z.im;
        }
        for (k, &c) in self.columns.iter().enumerate() {
            let col = self.gathered.col_mut(k);
            for m in 0..n {
                let z = psi[(c, m)];
                col[m] = z.re;
                col[n + m] = z.im;
            }
        }
        faer::linalg::matmul::matmul(
            self.phi_re.view_mut(),
            faer::Accum::Add,
            self.split.view(),
            self.gathered.view(),
            alpha,
            faer::Par::Seq,
        );
    }

    /// `R += τ ρ` (stored columns only).
    pub fn accumulate_rho(&mut self, rho: &CMat, tau: f64) {
        if let Some(full) = self.full.as_mut() {
            for (dst, src) in full.r.as_mut_slice().iter_mut().zip(rho.as_slice()) {
                *dst += src * tau;
            }
        }
        for (k, &c) in self.columns.iter().enumerate() {
            for (dst, src) in self.r_re.col_mut(k).iter_mut().zip(rho.col(c)) {
                *dst += src.re * tau;
            }
        }
    }

    /// `Σ_c γ_c φ_k(c) Σ_l φ_k(l) M[l, c]` for every basis state, with `M`
    /// the real part of the stored columns.
    fn project(&self, re: &RMat, basis: &EigenBasis) -> Vec<f64> {
        let n = basis.len();
        let cols = self.columns.len();
        if cols == 0 {
            return vec![0.0; n];
        }
        let mut proj = RMat::zeros(n, cols);
        faer::linalg::matmul::matmul(
            proj.view_mut(),
            faer::Accum::Replace,
            basis.states().view().transpose(),
            re.view(),
            1.0,
            faer::Par::Seq,
        );
        (0..n)
            .map(|k| {
                let phi = basis.state(k);
                self.columns.iter().enumerate().map(|(kk, &c)| self.gamma[kk] * phi[c] * proj[(k, kk)]).sum::<f64>()
            })
            .collect()
    }

    /// Discrete first-absorption probabilities `c_k`, one per basis state.
    pub fn discrete_first(&self, basis: &EigenBasis) -> Vec<f64> {
        let s = 4.0 * self.h * self.h;
        self.project(&self.phi_re, basis).into_iter().map(|v| s * v).collect()
    }

    /// Discrete second-absorption probabilities `c_k`, one per basis state.
    pub fn discrete_second(&self, basis: &EigenBasis) -> Vec<f64> {
        let s = 2.0 * self.h * self.h;
        self.project(&self.r_re, basis).into_iter().map(|v| s * v).collect()
    }
}

/// A density sampled on an ascending energy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub density: Vec<f64>,
}

fn trapezoid(x: &[f64], y: impl Fn(usize) -> f64) -> f64 {
    x.windows(2).enumerate().map(|(i, w)| 0.5 * (y(i) + y(i + 1)) * (w[1] - w[0])).sum()
}

/// Linear interpolation on an ascending grid, constant beyond the ends.
pub fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    if at <= x[0] {
        return y[0];
    }
    let last = x.len() - 1;
    if at >= x[last] {
        return y[last];
    }
    let j = x.partition_point(|&v| v <= at);
    let (x0, x1) = (x[j - 1], x[j]);
    let f = (at - x0) / (x1 - x0);
    y[j - 1] + f * (y[j] - y[j - 1])
}

impl Spectrum {
    pub fn zeros(energies: Vec<f64>) -> Self {
        let density = vec![0.0; energies.len()];
        Spectrum { energies, density }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Trapezoidal `∫ dP/dε dε`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.energies, |i| self.density[i])
    }

    /// `-∫ min(dP/dε, 0) dε`
    pub fn negative_content(&self) -> f64 {
        0.0 - trapezoid(&self.energies, |i| self.density[i].min(0.0))
    }

    /// `∫ dP/dε dε` over `[lo, hi]`, clipped to the sampled range.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        let mut x = vec![lo.max(self.energies[0])];
        x.extend(self.energies.iter().copied().filter(|&e| e > lo && e < hi));
        x.push(hi.min(*self.energies.last().unwrap()));
        if x[x.len() - 1] <= x[0] {
            return 0.0;
        }
        let y: Vec<f64> = x.iter().map(|&e| self.at(e)).collect();
        trapezoid(&x, |i| y[i])
    }

    pub fn at(&self, energy: f64) -> f64 {
        interpolate(&self.energies, &self.density, energy)
    }

    /// `∫ |a - b| dε` on this spectrum's grid.
    pub fn l1_distance(&self, other: &Spectrum) -> f64 {
        let diff: Vec<f64> = if self.energies == other.energies {
            self.density.iter().zip(&other.density).map(|(a, b)| (a - b).abs()).collect()
        } else {
            self.energies.iter().zip(&self.density).map(|(&e, a)| (a - other.at(e)).abs()).collect()
        };
        trapezoid(&self.energies, |i| diff[i])
    }

    /// Interior local maxima `(energy, value)`, in ascending energy.
    pub fn local_maxima(&self) -> Vec<(f64, f64)> {
        self.density
            .windows(3)
            .enumerate()
            .filter(|(_, w)| w[1] > w[0] && w[1] >= w[2])
            .map(|(i, w)| (self.energies[i + 1], w[1]))
            .collect()
    }
}

/// Convert discrete probabilities to a density on the merged positive-energy
/// grid: each parity family is weighted by its density of states, then
/// interpolated onto the union of both families' energies and summed.
pub fn to_density(discrete: &[f64], basis: &EigenBasis, weights: &ContinuumWeights) -> Result<Spectrum> {
    let e = basis.energies();
    let mut merged: Vec<f64> = weights.even.iter().chain(&weights.odd).map(|&k| e[k]).collect();
    if merged.is_empty() {
        return Err(Error::SparseContinuum { family: "merged", count: 0 });
    }
    merged.sort_by(f64::total_cmp);
    let mut density = vec![0.0; merged.len()];
    for parity in [Parity::Even, Parity::Odd] {
        let family = weights.family(parity);
        let x: Vec<f64> = family.iter().map(|&k| e[k]).collect();
        let y: Vec<f64> = family.iter().map(|&k| discrete[k] * weights.weights[k]).collect();
        for (d, &en) in density.iter_mut().zip(&merged) {
            *d += interpolate(&x, &y, en);
        }
    }
    Ok(Spectrum { energies: merged, density })
}

/// First-absorption energy density `dP2/dε`.
pub fn spectrum_first(acc: &SpectralAccumulator, basis: &EigenBasis, weights: &ContinuumWeights) -> Result<Spectrum> {
    to_density(&acc.discrete_first(basis), basis, weights)
}

/// Second-absorption energy density `dP1/dε`.
pub fn spectrum_second(acc: &SpectralAccumulator, basis: &EigenBasis, weights: &ContinuumWeights) -> Result<Spectrum> {
    to_density(&acc.discrete_second(basis), basis, weights)
}

/// Running maximum over time of the probability that at least one particle
/// lies beyond each radius.
#[derive(Debug, Clone)]
pub struct ExtentTracker {
    h: f64,
    center: usize,
    beyond_max: Vec<f64>,
    shell: Vec<f64>,
}

impl ExtentTracker {
    pub fn new(n: usize, h: f64) -> Self {
        let half = n / 2;
        ExtentTracker { h, center: half, beyond_max: vec![0.0; half + 1], shell: vec![0.0; half + 1] }
    }

    fn radius(&self, i: usize) -> usize {
        i.abs_diff(self.center)
    }

    pub fn record(&mut self, psi: &CMat) {
        self.shell.fill(0.0);
        let n = psi.rows();
        for j in 0..n {
            let rj = self.radius(j);
            for (i, z) in psi.col(j).iter().enumerate() {
                let r = rj.max(self.radius(i));
                self.shell[r] += z.norm_sqr();
            }
        }
        let w = self.h * self.h;
        let mut beyond = 0.0;
        for r in (0..self.shell.len()).rev() {
            // probability with max radius strictly greater than r
            self.beyond_max[r] = self.beyond_max[r].max(beyond);
            beyond += w * self.shell[r];
        }
    }

    /// `max_t P(max(|x1|, |x2|) > r h)` for each radius index `r`.
    pub fn beyond(&self) -> &[f64] {
        &self.beyond_max
    }

    /// Smallest radius `a` whose exterior held less than `threshold` at all
    /// recorded times.
    pub fn extent(&self, threshold: f64) -> f64 {
        let r = self.beyond_max.iter().position(|&p| p < threshold).unwrap_or(self.beyond_max.len() - 1);
        r as f64 * self.h
    }
}

/// First sampled time at which the squared norm fell below `threshold`;
/// `None` if it never did.
pub fn duration(samples: &[(f64, f64)], threshold: f64) -> Option<f64> {
    samples.iter().find(|(_, n2)| *n2 < threshold).map(|(t, _)| *t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_quantities() {
        let s = Spectrum { energies: vec![0.0, 1.0, 2.0, 3.0], density: vec![1.0, -1.0, -1.0, 1.0] };
        assert!((s.integral() - (0.0 - 1.0 + 0.0)).abs() < 1e-15);
        assert!((s.negative_content() - (0.5 + 1.0 + 0.5)).abs() < 1e-15);
        let pos = Spectrum { energies: vec![0.0, 1.0], density: vec![1.0, 2.0] };
        assert_eq!(pos.negative_content(), 0.0);
        assert!((pos.integral_between(0.25, 0.75) - 0.5 * 1.5).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_linear_and_clamped() {
        let x = [0.0, 1.0, 3.0];
        let y = [0.0, 2.0, 6.0];
        assert_eq!(interpolate(&x, &y, 0.5), 1.0);
        assert_eq!(interpolate(&x, &y, 2.0), 4.0);
        assert_eq!(interpolate(&x, &y, -1.0), 0.0);
        assert_eq!(interpolate(&x, &y, 9.0), 6.0);
    }

    #[test]
    fn l1_distance_of_shifted_density() {
        let e: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let a = Spectrum { energies: e.clone(), density: vec![1.0; 101] };
        let b = Spectrum { energies: e, density: vec![1.5; 101] };
        assert!((a.l1_distance(&b) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn extent_of_static_packet() {
        let n = 40;
        let h = 0.5;
        // Uniform over |x| < 2 for both particles: radius index < 4.
        let mut psi = CMat::zeros(n, n);
        let inside: Vec<usize> = (0..n).filter(|&i| i.abs_diff(n / 2) < 4).collect();
        let amp = 1.0 / (h * inside.len() as f64);
        for &i in &inside {
            for &j in &inside {
                psi[(i, j)] = C64::new(amp, 0.0);
            }
        }
        let mut tr = ExtentTracker::new(n, h);
        tr.record(&psi);
        assert_eq!(tr.extent(0.01), 3.0 * h);
        assert!((tr.beyond()[0] - (1.0 - (1.0f64 / 7.0).powi(2))).abs() < 1e-12);
    }

    #[test]
    fn duration_rule() {
        let s = [(0.0, 1.0), (1.0, 0.5), (2.0, 0.009), (3.0, 0.001)];
        assert_eq!(duration(&s, 0.01), Some(2.0));
        assert_eq!(duration(&s[..2], 0.01), None);
    }
}
