//! Box-normalized eigenstates of the discretized one-body Hamiltonian `h0`,
//! labelled by parity, and the density-of-states weights that turn discrete
//! projections into continuous energy densities.

use std::io::{Read, Write};
use std::path::Path;

use faer::Side;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PotentialSpec};
use crate::matrix::RMat;
use crate::spectral::kinetic_matrix;

/// `|<φ|Rφ>|` below this is reported as parity-ambiguous.
pub const PARITY_THRESHOLD: f64 = 0.99;
/// Smallest accepted level spacing inside a parity family.
pub const MIN_SPACING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenBasis {
    h: f64,
    energies: Vec<f64>,
    /// Column `k` is `φ_k(x_i)`, normalized so that `h Σ_i φ_k(x_i)² = 1`.
    states: RMat,
    parity: Vec<Parity>,
    /// `h Σ_i φ_k(x_i) φ_k(x_{R i})`, ±1 for a state of definite parity.
    reflection_overlap: Vec<f64>,
    ambiguous: Vec<usize>,
}

/// `h0 = T + diag(V)` with the spectral kinetic matrix.
pub fn build_h0_dense(grid: &Grid1D, potential: &PotentialSpec) -> Result<RMat> {
    let v = potential.values(grid)?;
    let n = grid.len();
    let mut h0 = RMat::from_col_major(n, n, kinetic_matrix(grid));
    for (i, vi) in v.into_iter().enumerate() {
        h0[(i, i)] += vi;
    }
    Ok(h0)
}

fn is_reflection_symmetric(h0: &RMat, grid: &Grid1D) -> bool {
    let n = grid.len();
    let scale = h0.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    (0..n).all(|j| {
        let rj = grid.reflect(j);
        (0..n).all(|i| (h0[(i, j)] - h0[(grid.reflect(i), rj)]).abs() <= 1e-12 * scale)
    })
}

/// Columns spanning the even (`sign = 1`) or odd (`sign = -1`) subspace.
fn symmetry_adapted(grid: &Grid1D, parity: Parity) -> RMat {
    let n = grid.len();
    let half = n / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
    if parity == Parity::Even {
        cols.push(vec![(0, 1.0)]);
        cols.push(vec![(half, 1.0)]);
    }
    let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
    for i in 1..half {
        cols.push(vec![(i, s), (n - i, sign * s)]);
    }
    let mut p = RMat::zeros(n, cols.len());
    for (c, entries) in cols.iter().enumerate() {
        for &(i, v) in entries {
            p[(i, c)] = v;
        }
    }
    p
}

fn symmetric_eigen(m: &RMat) -> Result<(Vec<f64>, RMat)> {
    let evd = m.view().self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let u = evd.U();
    let vectors = RMat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]);
    Ok((values, vectors))
}

fn real_matmul(a: faer::MatRef<'_, f64>, b: faer::MatRef<'_, f64>) -> RMat {
    let mut out = RMat::zeros(a.nrows(), b.ncols());
    faer::linalg::matmul::matmul(out.view_mut(), faer::Accum::Replace, a, b, 1.0, faer::Par::Seq);
    out
}

/// Full diagonalization of `h0`.
///
/// A reflection-symmetric `h0` is diagonalized separately in the even and odd
/// subspaces, so every state has exact parity even where the two continua are
/// nearly degenerate. Otherwise the full matrix is diagonalized and parity is
/// read off `<φ|Rφ>`; states below [`PARITY_THRESHOLD`] are recorded as
/// ambiguous.
pub fn eigendecompose(h0: &RMat, grid: &Grid1D) -> Result<EigenBasis> {
    let n = grid.len();
    if h0.rows() != n || h0.cols() != n {
        return Err(Error::Eigen(format!("h0 is {}x{}, grid has {n} points", h0.rows(), h0.cols())));
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    if is_reflection_symmetric(h0, grid) {
        for parity in [Parity::Even, Parity::Odd] {
            let p = symmetry_adapted(grid, parity);
            let hp = real_matmul(h0.view(), p.view());
            let block = real_matmul(p.view().transpose(), hp.view());
            let (values, vectors) = symmetric_eigen(&block)?;
            let full = real_matmul(p.view(), vectors.view());
            for (k, &e) in values.iter().enumerate() {
                pairs.push((e, full.col(k).to_vec()));
            }
        }
    } else {
        let mut sym = h0.clone();
        for j in 0..n {
            for i in (j + 1)..n {
                let m = 0.5 * (sym[(i, j)] + sym[(j, i)]);
                sym[(i, j)] = m;
                sym[(j, i)] = m;
            }
        }
        let (values, vectors) = symmetric_eigen(&sym)?;
        for (k, &e) in values.iter().enumerate() {
            pairs.push((e, vectors.col(k).to_vec()));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let h = grid.h();
    let norm = 1.0 / h.sqrt();
    let mut energies = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * n);
    let mut parity = Vec::with_capacity(n);
    let mut reflection_overlap = Vec::with_capacity(n);
    let mut ambiguous = Vec::new();
    for (k, (e, mut v)) in pairs.into_iter().enumerate() {
        // Deterministic sign: first component of appreciable size is positive.
        let pivot = v.iter().copied().find(|c| c.abs() > 1e-8).unwrap_or(1.0);
        let sign = if pivot < 0.0 { -norm } else { norm };
        for c in &mut v {
            *c *= sign;
        }
        let overlap = h * (0..n).map(|i| v[i] * v[grid.reflect(i)]).sum::<f64>();
        if overlap.abs() < PARITY_THRESHOLD {
            ambiguous.push(k);
        }
        parity.push(if overlap >= 0.0 { Parity::Even } else { Parity::Odd });
        reflection_overlap.push(overlap);
        energies.push(e);
        data.extend_from_slice(&v);
    }
    Ok(EigenBasis { h, energies, states: RMat::from_col_major(n, n, data), parity, reflection_overlap, ambiguous })
}

impl EigenBasis {
    pub fn from_potential(grid: &Grid1D, potential: &PotentialSpec) -> Result<Self> {
        eigendecompose(&build_h0_dense(grid, potential)?, grid)
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn states(&self) -> &RMat {
        &self.states
    }

    pub fn state(&self, k: usize) -> &[f64] {
        self.states.col(k)
    }

    pub fn parity(&self) -> &[Parity] {
        &self.parity
    }

    pub fn reflection_overlap(&self) -> &[f64] {
        &self.reflection_overlap
    }

    /// Indices of states whose parity could not be established.
    pub fn ambiguous(&self) -> &[usize] {
        &self.ambiguous
    }

    pub fn bound_count(&self) -> usize {
        self.energies.iter().take_while(|&&e| e < 0.0).count()
    }

    /// `max_jk |h φ_j·φ_k - δ_jk|`
    pub fn orthonormality_residual(&self) -> f64 {
        let g = real_matmul(self.states.view().transpose(), self.states.view());
        let n = self.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.h * g[(i, j)] - target).abs());
            }
        }
        worst
    }

    const MAGIC: &'static [u8; 8] = b"CAPEIG01";

    /// Binary cache: magic, n, h, energies, parities, states (little endian).
    pub fn save(&self, path: &Path) -> Result<()> {
        let n = self.len();
        let mut buf = Vec::with_capacity(24 + n * 9 + n * n * 8);
        buf.extend_from_slice(Self::MAGIC);
        buf.extend_from_slice(&(n as u64).to_le_bytes());
        buf.extend_from_slice(&self.h.to_le_bytes());
        for e in &self.energies {
            buf.extend_from_slice(&e.to_le_bytes());
        }
        for p in &self.parity {
            buf.push(matches!(p, Parity::Odd) as u8);
        }
        for v in self.states.as_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, grid: &Grid1D) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut buf)).map_err(|e| Error::io(path, e))?;
        let bad = |m: &str| Error::Parse { path: path.to_path_buf(), message: m.to_string() };
        if buf.len() < 24 || &buf[..8] != Self::MAGIC {
            return Err(bad("not an eigenbasis cache file"));
        }
        let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
        let h = f64_at(16);
        if n != grid.len() || h != grid.h() {
            return Err(bad("cache was written for a different grid"));
        }
        if buf.len() != 24 + n * 9 + n * n * 8 {
            return Err(bad("truncated cache file"));
        }
        let energies: Vec<f64> = (0..n).map(|k| f64_at(24 + 8 * k)).collect();
        let pstart = 24 + 8 * n;
        let parity: Vec<Parity> =
            buf[pstart..pstart + n].iter().map(|&b| if b == 0 { Parity::Even } else { Parity::Odd }).collect();
        let sstart = pstart + n;
        let states = RMat::from_col_major(n, n, (0..n * n).map(|i| f64_at(sstart + 8 * i)).collect());
        let reflection_overlap: Vec<f64> = (0..n)
            .map(|k| {
                let v = states.col(k);
                h * (0..n).map(|i| v[i] * v[grid.reflect(i)]).sum::<f64>()
            })
            .collect();
        let ambiguous = (0..n).filter(|&k| reflection_overlap[k].abs() < PARITY_THRESHOLD).collect();
        Ok(EigenBasis { h, energies, states, parity, reflection_overlap, ambiguous })
    }
}

/// Density-of-states weights for the positive-energy states, per parity family.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumWeights {
    /// Per state of the basis; zero for bound states.
    pub weights: Vec<f64>,
    /// Positive-energy state indices, ascending in energy.
    pub even: Vec<usize>,
    pub odd: Vec<usize>,
}

impl ContinuumWeights {
    pub fn family(&self, parity: Parity) -> &[usize] {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }
}

/// Central-difference density of states within each parity family:
/// `w_k = 2 / (ε_{k+1} - ε_{k-1})`, one-sided at the family ends.
pub fn continuum_weights(basis: &EigenBasis) -> Result<ContinuumWeights> {
    let e = basis.energies();
    let mut weights = vec![0.0; e.len()];
    let mut families = [Vec::new(), Vec::new()];
    for (k, (&ek, &p)) in e.iter().zip(basis.parity()).enumerate() {
        if ek > 0.0 {
            if basis.ambiguous.contains(&k) {
                return Err(Error::ParityAmbiguous { index: k, overlap: basis.reflection_overlap[k] });
            }
            families[(p == Parity::Odd) as usize].push(k);
        }
    }
    for (family, parity) in families.iter().zip([Parity::Even, Parity::Odd]) {
        let m = family.len();
        if m < 3 {
            return Err(Error::SparseContinuum { family: parity.name(), count: m });
        }
        for w in family.windows(2) {
            let spacing = e[w[1]] - e[w[0]];
            if spacing < MIN_SPACING {
                return Err(Error::DegenerateSpacing { family: parity.name(), energy: e[w[0]], spacing });
            }
        }
        for (pos, &k) in family.iter().enumerate() {
            let span = if pos == 0 {
                e[family[1]] - e[k]
            } else if pos == m - 1 {
                e[k] - e[family[m - 2]]
            } else {
                0.5 * (e[family[pos + 1]] - e[family[pos - 1]])
            };
            weights[k] = 1.0 / span;
        }
    }
    let [even, odd] = families;
    Ok(ContinuumWeights { weights, even, odd })
}
