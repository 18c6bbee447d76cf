//! Small dense row-major matrices and the norms used throughout the crate.
//!
//! Everything here is desk scale: no blocking, no BLAS. Norm names follow the
//! usual conventions:
//!
//! * `l1`: entrywise ℓ¹ norm, `Σ_ij |a_ij|`
//! * `norm_1_inf`: induced norm `max_i Σ_j |a_ij|` (largest row sum)
//! * `spectral`: largest singular value, by power iteration on `AᵀA`
//! * `group_2_1`: `Σ_i ‖row_i‖₂`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative convergence tolerance for power iterations.
pub const POWER_TOL: f64 = 1e-10;
/// Iteration cap for power iterations.
pub const POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn row_vector(v: &[T]) -> Self {
        Matrix {
            rows: 1,
            cols: v.len(),
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Keeps the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j));
            }
        }
        Matrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::zero())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("matrix sum of mismatched shapes".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `vᵀ A` for a row vector `v`.
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    pub fn l1(&self) -> T {
        self.data.iter().map(|x| x.abs()).sum()
    }

    pub fn norm_1_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn group_2_1(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|&x| x * x).sum::<T>().sqrt())
            .sum()
    }

    pub fn diagonal_removed(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m.set(i, i, T::zero());
        }
        m
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= T::zero())
    }

    /// Largest singular value via power iteration on `AᵀA`.
    pub fn spectral(&self) -> T {
        if self.data.iter().all(|&x| x == T::zero()) {
            return T::zero();
        }
        let gram = self.transpose().matmul(self).expect("AᵀA is square");
        let (lambda, _) = power_iteration(&gram);
        lambda.max(T::zero()).sqrt()
    }
}

/// Dominant eigenpair of a square matrix with nonnegative entries.
///
/// Iterates on `(I + A)/2`, which shares the Perron vector of `A` but is
/// aperiodic whenever `A` is irreducible, so periodic matrices converge too.
/// The returned vector is ℓ²-normalized.
pub fn power_iteration<T: Scalar>(a: &Matrix<T>) -> (T, Vec<T>) {
    let n = a.rows();
    let half = T::of(0.5);
    // Slightly tilted start so that no eigenvector is orthogonal to it by symmetry.
    let mut x: Vec<T> = (0..n)
        .map(|i| T::one() + T::of(1e-3) * T::of_usize(i + 1))
        .collect();
    normalize_l2(&mut x);
    let tol = T::of(POWER_TOL);
    let mut lambda = T::zero();
    for _ in 0..POWER_MAX_ITER {
        let ax = a.mul_vec(&x);
        let mut y: Vec<T> = ax.iter().zip(&x).map(|(&p, &q)| half * (p + q)).collect();
        let norm = normalize_l2(&mut y);
        if norm == T::zero() {
            return (T::zero(), x);
        }
        let diff = y
            .iter()
            .zip(&x)
            .map(|(&p, &q)| (p - q).abs())
            .fold(T::zero(), T::max);
        x = y;
        let next = T::of(2.0) * norm - T::one();
        let settled = (next - lambda).abs() <= tol * next.abs().max(T::one());
        lambda = next;
        if diff <= tol && settled {
            break;
        }
    }
    // Rayleigh quotient on the converged vector is more accurate than the shifted norm.
    let ax = a.mul_vec(&x);
    let rq = ax.iter().zip(&x).map(|(&p, &q)| p * q).sum::<T>();
    (rq, x)
}

fn normalize_l2<T: Scalar>(x: &mut [T]) -> T {
    let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm > T::zero() {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    norm
}

/// Product `A₁ A₂ ⋯ A_m`; `None` for an empty chain.
pub fn chain_product<T: Scalar>(chain: &[Matrix<T>]) -> Result<Option<Matrix<T>>> {
    let mut iter = chain.iter();
    let Some(first) = iter.next() else {
        return Ok(None);
    };
    let mut acc = first.clone();
    for m in iter {
        acc = acc.matmul(m)?;
    }
    Ok(Some(acc))
}
