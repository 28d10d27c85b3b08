//! Momentum-space one-body operators applied through the FFT.
//!
//! The kinetic term in the velocity gauge is `κ(k) = k²/2 + A(t) k`, diagonal
//! in momentum space. Operators act on every column of a column-major matrix,
//! i.e. on the first index, which is left multiplication.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::grid::Grid1D;
use crate::matrix::{CMat, C64};

/// Spectral representation of `κ(k)` on a grid, with cached FFT plans.
pub struct SpectralKinetic {
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    multiplier: Vec<C64>,
}

impl Clone for SpectralKinetic {
    fn clone(&self) -> Self {
        SpectralKinetic {
            k: self.k.clone(),
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            scratch: vec![C64::default(); self.scratch.len()],
            multiplier: self.multiplier.clone(),
        }
    }
}

impl std::fmt::Debug for SpectralKinetic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralKinetic").field("n", &self.k.len()).finish()
    }
}

impl SpectralKinetic {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        SpectralKinetic {
            k: grid.k().to_vec(),
            forward,
            inverse,
            scratch: vec![C64::default(); scratch_len],
            multiplier: vec![C64::default(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    #[inline]
    pub fn kappa(&self, index: usize, vector_potential: f64) -> f64 {
        let k = self.k[index];
        0.5 * k * k + vector_potential * k
    }

    /// Load `exp(-i dt κ(k))`. A complex `dt = -iτ` gives the imaginary-time
    /// factor `exp(-τ κ)`.
    pub fn set_exponential(&mut self, dt: C64, vector_potential: f64) {
        let scale = 1.0 / self.k.len() as f64;
        for a in 0..self.k.len() {
            let kappa = self.kappa(a, vector_potential);
            self.multiplier[a] = (C64::new(0.0, -1.0) * dt * kappa).exp() * scale;
        }
    }

    /// Load `κ(k)` itself, for applying the kinetic operator.
    pub fn set_operator(&mut self, vector_potential: f64) {
        let scale = 1.0 / self.k.len() as f64;
        for a in 0..self.k.len() {
            self.multiplier[a] = C64::new(self.kappa(a, vector_potential) * scale, 0.0);
        }
    }

    /// Apply the loaded momentum-space multiplier to each length-`n` chunk of
    /// `data` (matrix columns, or a single vector).
    pub fn apply(&mut self, data: &mut [C64]) {
        let n = self.k.len();
        debug_assert_eq!(data.len() % n, 0);
        self.forward.process_with_scratch(data, &mut self.scratch);
        for chunk in data.chunks_exact_mut(n) {
            for (z, m) in chunk.iter_mut().zip(&self.multiplier) {
                *z *= m;
            }
        }
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    pub fn apply_columns(&mut self, m: &mut CMat) {
        debug_assert_eq!(m.rows(), self.k.len());
        self.apply(m.as_mut_slice());
    }
}

/// Dense matrix of the spectral kinetic operator `-½ d²/dx²` on the periodic
/// grid: `T_ij = (1/n) Σ_a cos(k_a (x_i - x_j)) k_a²/2`.
pub fn kinetic_matrix(grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let h = grid.h();
    let k = grid.k();
    // Toeplitz-circulant: depends on (i - j) mod n only.
    let first: Vec<f64> =
        (0..n).map(|d| k.iter().map(|&ka| (ka * d as f64 * h).cos() * 0.5 * ka * ka).sum::<f64>() / n as f64).collect();
    let mut t = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let d = (i + n - j) % n;
            t[i + j * n] = first[d];
        }
    }
    // Exact symmetry; the cosine sums agree to rounding only.
    for j in 0..n {
        for i in (j + 1)..n {
            let m = 0.5 * (t[i + j * n] + t[j + i * n]);
            t[i + j * n] = m;
            t[j + i * n] = m;
        }
    }
    t
}
