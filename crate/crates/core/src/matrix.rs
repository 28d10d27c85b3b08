//! Dense column-major matrices with contiguous storage.
//!
//! Storage is a single `Vec` so batches of columns can go straight through the
//! FFT, and views can be handed to faer for the GEMM and eigen kernels.

use std::ops::{Index, IndexMut};

use faer::{MatMut, MatRef};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Matrix<C64>;
pub type RMat = Matrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::default(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "column-major buffer has the wrong length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// In-place transpose of a square matrix.
    pub fn transpose_in_place(&mut self) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        const B: usize = 32;
        for jb in (0..n).step_by(B) {
            for ib in (jb..n).step_by(B) {
                for j in jb..(jb + B).min(n) {
                    let i0 = if ib == jb { j + 1 } else { ib };
                    for i in i0..(ib + B).min(n) {
                        self.data.swap(i + j * n, j + i * n);
                    }
                }
            }
        }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn fill(&mut self, value: T) {
        self.data.fill(value);
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl<T> Matrix<T> {
    pub fn view(&self) -> MatRef<'_, T> {
        MatRef::from_column_major_slice(&self.data, self.rows, self.cols)
    }

    pub fn view_mut(&mut self) -> MatMut<'_, T> {
        MatMut::from_column_major_slice_mut(&mut self.data, self.rows, self.cols)
    }
}

impl CMat {
    /// `(M + Mᵀ) / 2`, in place.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        const B: usize = 32;
        for jb in (0..n).step_by(B) {
            for ib in (jb..n).step_by(B) {
                for j in jb..(jb + B).min(n) {
                    let i0 = if ib == jb { j + 1 } else { ib };
                    for i in i0..(ib + B).min(n) {
                        let m = (self.data[i + j * n] + self.data[j + i * n]) * 0.5;
                        self.data[i + j * n] = m;
                        self.data[j + i * n] = m;
                    }
                }
            }
        }
    }

    /// Copy the conjugated strict lower triangle onto the upper one and
    /// zero the imaginary part of the diagonal.
    pub fn mirror_lower(&mut self) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        const B: usize = 32;
        for jb in (0..n).step_by(B) {
            for ib in (jb..n).step_by(B) {
                for j in jb..(jb + B).min(n) {
                    let i0 = if ib == jb { j + 1 } else { ib };
                    for i in i0..(ib + B).min(n) {
                        self.data[j + i * n] = self.data[i + j * n].conj();
                    }
                }
            }
        }
        for j in 0..n {
            self.data[j + j * n].im = 0.0;
        }
    }

    /// `(M + M†) / 2`, in place.
    pub fn hermitize(&mut self) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        const B: usize = 32;
        for jb in (0..n).step_by(B) {
            for ib in (jb..n).step_by(B) {
                for j in jb..(jb + B).min(n) {
                    let i0 = if ib == jb { j + 1 } else { ib };
                    for i in i0..(ib + B).min(n) {
                        let m = (self.data[i + j * n] + self.data[j + i * n].conj()) * 0.5;
                        self.data[i + j * n] = m;
                        self.data[j + i * n] = m.conj();
                    }
                }
            }
        }
        for j in 0..n {
            self.data[j + j * n].im = 0.0;
        }
    }

    /// In-place conjugate transpose of a square matrix.
    pub fn adjoint_in_place(&mut self) {
        self.transpose_in_place();
        for z in &mut self.data {
            *z = z.conj();
        }
    }

    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.rows;
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        worst
    }

    pub fn max_antihermiticity(&self) -> f64 {
        let n = self.rows;
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in j..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `Σ |m_ij|²`
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn axpy(&mut self, alpha: C64, other: &CMat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn hadamard_in_place(&mut self, other: &CMat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a *= b;
        }
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `M ← α·A·B + β·M` via faer, sequential (the pipeline must be deterministic).
pub fn gemm(dst: &mut CMat, accumulate: bool, lhs: MatRef<'_, C64>, rhs: MatRef<'_, C64>, alpha: C64) {
    let beta = if accumulate { faer::Accum::Add } else { faer::Accum::Replace };
    faer::linalg::matmul::matmul(dst.view_mut(), beta, lhs, rhs, alpha, faer::Par::Seq);
}
