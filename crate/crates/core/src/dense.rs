//! Dense complex matrices on the d^n-dimensional Hilbert space. Used for
//! verification only, so every constructor is guarded by a size cap.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Modulus;

/// Largest Hilbert-space dimension a dense operator may have by default.
pub const DEFAULT_MAX_DENSE_DIM: usize = 250;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseCap {
    pub max_dim: usize,
}

impl Default for DenseCap {
    fn default() -> Self {
        DenseCap {
            max_dim: DEFAULT_MAX_DENSE_DIM,
        }
    }
}

impl DenseCap {
    pub fn check(&self, d: Modulus, n: usize) -> Result<usize> {
        let dim = (d.get() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if dim > self.max_dim as u128 {
            return Err(Error::CapExceeded {
                what: "dense dimension d^n",
                needed: dim,
                limit: self.max_dim as u128,
                next_index: None,
            });
        }
        Ok(dim as usize)
    }
}

/// `omega^k` for k = 0..d, with omega = exp(2 pi i / d).
pub fn roots_of_unity(d: Modulus) -> Vec<Complex64> {
    let d = d.get();
    (0..d)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    d: Modulus,
    n: usize,
    m: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn zeros(d: Modulus, n: usize, cap: DenseCap) -> Result<Self> {
        let dim = cap.check(d, n)?;
        Ok(DenseOperator {
            d,
            n,
            m: DMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(d: Modulus, n: usize, cap: DenseCap) -> Result<Self> {
        let dim = cap.check(d, n)?;
        Ok(DenseOperator {
            d,
            n,
            m: DMatrix::identity(dim, dim),
        })
    }

    pub fn from_matrix(d: Modulus, n: usize, m: DMatrix<Complex64>) -> Result<Self> {
        let dim = (d.get() as usize).pow(n as u32);
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(DenseOperator { d, n, m })
    }

    pub fn modulus(&self) -> Modulus {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    fn with(&self, m: DMatrix<Complex64>) -> DenseOperator {
        DenseOperator {
            d: self.d,
            n: self.n,
            m,
        }
    }

    pub fn mul(&self, other: &DenseOperator) -> DenseOperator {
        self.with(&self.m * &other.m)
    }

    pub fn add(&self, other: &DenseOperator) -> DenseOperator {
        self.with(&self.m + &other.m)
    }

    pub fn sub(&self, other: &DenseOperator) -> DenseOperator {
        self.with(&self.m - &other.m)
    }

    pub fn scale(&self, c: Complex64) -> DenseOperator {
        self.with(&self.m * c)
    }

    pub fn adjoint(&self) -> DenseOperator {
        self.with(self.m.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &DenseOperator) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.m[(i, j)] * other.m[(j, i)];
            }
        }
        acc
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &DenseOperator, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        ev
    }

    /// Row-major `[re, im]` pairs, the interchange format for dense operators.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.m[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn from_pairs(d: Modulus, n: usize, rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let dim = (d.get() as usize).pow(n as u32);
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
        Ok(DenseOperator { d, n, m })
    }
}
