//! Superoperators acting on row-major vectorized matrices.
//!
//! `vec(rho)[i * d + j] = rho[(i, j)]`, so `vec(A rho B) = (A ⊗ B^T) vec(rho)`.

use nalgebra::DVector;

use super::linalg::{self, CMatrix, C64, I, ONE, ZERO};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

pub fn vectorize(m: &CMatrix) -> DVector<C64> {
    let d = m.nrows();
    DVector::from_fn(d * d, |k, _| m[(k / d, k % d)])
}

pub fn unvectorize(v: &DVector<C64>, d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d, "vector length does not match dimension");
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// A `d^2 x d^2` matrix acting on vectorized `d x d` operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    matrix: CMatrix,
    dim: usize,
}

impl Superoperator {
    pub fn from_matrix(matrix: CMatrix, dim: usize) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator {}x{} for system dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, dim })
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim * dim, dim * dim), dim }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim * dim), dim }
    }

    /// `rho -> a rho b`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        let dim = a.nrows();
        Self { matrix: linalg::kron(a, &b.transpose()), dim }
    }

    pub fn left(a: &CMatrix) -> Self {
        Self::sandwich(a, &linalg::identity(a.nrows()))
    }

    pub fn right(b: &CMatrix) -> Self {
        Self::sandwich(&linalg::identity(b.nrows()), b)
    }

    /// `rho -> -i [h, rho]`.
    pub fn hamiltonian(h: &CMatrix) -> Self {
        let l = Self::left(h).matrix - Self::right(h).matrix;
        Self { matrix: l.map(|z| z * -I), dim: h.nrows() }
    }

    /// Tabulates a linear map by its action on the matrix units `E_ij`.
    pub fn from_map<F: FnMut(&CMatrix) -> CMatrix>(dim: usize, mut f: F) -> Self {
        let n = dim * dim;
        let mut matrix = CMatrix::zeros(n, n);
        let mut unit = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                unit[(i, j)] = ONE;
                let img = vectorize(&f(&unit));
                matrix.set_column(i * dim + j, &img);
                unit[(i, j)] = ZERO;
            }
        }
        Self { matrix, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(m)), self.dim)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_evolved(self.apply(rho.matrix()), rho.basis_dims().to_vec())
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix, dim: self.dim }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix + &other.matrix, dim: self.dim }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { matrix: self.matrix.map(|z| z * s), dim: self.dim }
    }

    /// `exp(self * t)`.
    pub fn exp(&self, t: f64) -> Self {
        Self { matrix: linalg::matrix_exp(&self.matrix.map(|z| z * t)), dim: self.dim }
    }

    /// Largest modulus of `vec(I)^T L`; zero for trace-preserving generators.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        let mut worst = 0.0_f64;
        for col in 0..n {
            let s: C64 = (0..d).map(|i| self.matrix[(i * d + i, col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        general_eigenvalues(&self.matrix)
    }
}

/// Eigenvalues of a general complex matrix via the Schur form.
fn general_eigenvalues(m: &CMatrix) -> Vec<C64> {
    let schur = nalgebra::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}
