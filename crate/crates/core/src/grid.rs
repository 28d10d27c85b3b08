//! Uniform grid and the pointwise operator data shared by every propagator:
//! confining potentials, the absorber, the particle interaction and the laser
//! vector potential.
//!
//! Units: ħ = m = e = 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RMat;

/// Uniform grid on `[-L, L)` with `n` points and the conjugate momenta in FFT
/// ordering.
///
/// The reflection `x -> -x` maps grid index `i` to `(n - i) % n`; index 0
/// (`x = -L`) is its own image on the periodic box, as is index `n/2` (`x = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    half_extent: f64,
    h: f64,
    x: Vec<f64>,
    k: Vec<f64>,
}

impl Grid1D {
    pub fn new(half_extent: f64, n: usize) -> Result<Self> {
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::Grid(format!("half extent must be positive, got {half_extent}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Grid(format!("point count must be even and at least 8, got {n}")));
        }
        let h = 2.0 * half_extent / n as f64;
        let x = (0..n).map(|i| -half_extent + i as f64 * h).collect();
        let dk = 2.0 * PI / (n as f64 * h);
        let k = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                m as f64 * dk
            })
            .collect();
        Ok(Grid1D { half_extent, h, x, k })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Momenta `2π m / (n h)`, `m` in `[-n/2, n/2)`, in FFT order.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Index of the mirror image of grid point `i`.
    #[inline]
    pub fn reflect(&self, i: usize) -> usize {
        let n = self.len();
        (n - i) % n
    }
}

/// Square absorber `γ(x) = γ0 (|x| - x0)²` beyond the onset `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    pub gamma0: f64,
    pub onset: f64,
}

impl CapSpec {
    pub fn value(&self, x: f64) -> f64 {
        let d = x.abs() - self.onset;
        if d >= 0.0 {
            self.gamma0 * d * d
        } else {
            0.0
        }
    }

    /// `γ(x_i)` on every grid point.
    pub fn values(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        if !(self.gamma0 >= 0.0) || !self.gamma0.is_finite() {
            return Err(Error::param("gamma0", format!("must be finite and >= 0, got {}", self.gamma0)));
        }
        if !(self.onset > 0.0) || self.onset >= grid.half_extent() {
            return Err(Error::param(
                "cap.onset",
                format!("must lie in (0, L = {}), got {}", grid.half_extent(), self.onset),
            ));
        }
        Ok(grid.x().iter().map(|&x| self.value(x)).collect())
    }
}

/// One-body confining potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    /// `-V0 exp(-x² / (2 σ²))`
    Gaussian {
        strength: f64,
        width: f64,
    },
    /// `-V0 / sqrt(x² + u²)`
    SoftCoulomb {
        strength: f64,
        width: f64,
    },
    /// `k x² / 2`. Used for validation; it does not decay.
    Harmonic {
        stiffness: f64,
    },
    None,
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::Gaussian { width, strength } | PotentialSpec::SoftCoulomb { width, strength } => {
                if !(width > 0.0) || !width.is_finite() {
                    return Err(Error::param("potential.width", format!("must be positive, got {width}")));
                }
                if !strength.is_finite() {
                    return Err(Error::param("potential.strength", "must be finite"));
                }
            }
            PotentialSpec::Harmonic { stiffness } => {
                if !(stiffness > 0.0) || !stiffness.is_finite() {
                    return Err(Error::param("potential.stiffness", format!("must be positive, got {stiffness}")));
                }
            }
            PotentialSpec::None => {}
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            PotentialSpec::Gaussian { strength, width } => -strength * (-x * x / (2.0 * width * width)).exp(),
            PotentialSpec::SoftCoulomb { strength, width } => -strength / (x * x + width * width).sqrt(),
            PotentialSpec::Harmonic { stiffness } => 0.5 * stiffness * x * x,
            PotentialSpec::None => 0.0,
        }
    }

    pub fn values(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(grid.x().iter().map(|&x| self.value(x)).collect())
    }
}

/// Soft-core interaction `W0 / sqrt(x12² + s²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub strength: f64,
    pub smoothness: f64,
}

impl InteractionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.smoothness > 0.0) || !self.smoothness.is_finite() {
            return Err(Error::param("interaction.smoothness", format!("must be positive, got {}", self.smoothness)));
        }
        if !self.strength.is_finite() {
            return Err(Error::param("interaction.strength", "must be finite"));
        }
        Ok(())
    }

    pub fn value(&self, separation: f64) -> f64 {
        self.strength / (separation * separation + self.smoothness * self.smoothness).sqrt()
    }

    /// Symmetric `n x n` matrix `W(|x_i - x_j|)`.
    pub fn matrix(&self, grid: &Grid1D) -> Result<RMat> {
        self.validate()?;
        let x = grid.x();
        Ok(RMat::from_fn(x.len(), x.len(), |i, j| self.value(x[i] - x[j])))
    }
}

/// Laser pulse with a sin² envelope spanning an integer number of optical
/// cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Peak electric field `E0`.
    pub field: f64,
    /// Central angular frequency `ω`.
    pub omega: f64,
    pub cycles: u32,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::param("pulse.omega", format!("must be positive, got {}", self.omega)));
        }
        if self.cycles == 0 {
            return Err(Error::param("pulse.cycles", "must be at least 1"));
        }
        if !self.field.is_finite() {
            return Err(Error::param("pulse.field", "must be finite"));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        2.0 * PI * self.cycles as f64 / self.omega
    }

    /// `A(t) = (E0/ω) sin²(π t / T) sin(ω t)` on `[0, T]`, zero elsewhere.
    pub fn vector_potential(&self, t: f64) -> f64 {
        let duration = self.duration();
        if !(0.0..=duration).contains(&t) {
            return 0.0;
        }
        let envelope = (PI * t / duration).sin();
        self.field / self.omega * envelope * envelope * (self.omega * t).sin()
    }
}
