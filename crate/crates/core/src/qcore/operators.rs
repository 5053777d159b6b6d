//! Hermitian operators and the two-level Pauli algebra.
//!
//! Two-level systems use index 0 for the excited state, so `sigma_z = diag(1, -1)`
//! and `sigma_plus = |0><1|` raises the ground state.

use super::linalg::{self, CMatrix, SpectralDecomposition, C64, I, ONE, ZERO};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

/// Places a single-qubit operator on `site` of an `n`-qubit register.
pub fn embed(op: &CMatrix, site: usize, n: usize) -> CMatrix {
    assert!(site < n, "site {site} out of range for {n} qubits");
    let mut out = CMatrix::identity(1, 1);
    for k in 0..n {
        let factor = if k == site { op.clone() } else { linalg::identity(op.nrows()) };
        out = linalg::kron(&out, &factor);
    }
    out
}

/// A Hermitian matrix with a free-form label and subsystem structure.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMatrix,
    label: String,
    basis_dims: Vec<usize>,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        let dims = vec![matrix.nrows()];
        Self::with_dims(matrix, label, dims)
    }

    pub fn with_dims(matrix: CMatrix, label: impl Into<String>, basis_dims: Vec<usize>) -> Result<Self> {
        let label = label.into();
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "operator `{label}` is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if basis_dims.iter().product::<usize>() != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "basis dims {basis_dims:?} do not multiply to {}",
                matrix.nrows()
            )));
        }
        let deviation = linalg::hermiticity_error(&matrix);
        if deviation > linalg::HERMITIAN_TOL * linalg::max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { label, deviation });
        }
        Ok(Self { matrix: linalg::hermitize(&matrix), label, basis_dims })
    }

    /// Two-level `(omega/2) sigma_z`.
    pub fn qubit(omega: f64, label: impl Into<String>) -> Self {
        Self::new(sigma_z().scale(omega / 2.0), label).expect("sigma_z is Hermitian")
    }

    pub fn zeros(dim: usize, label: impl Into<String>) -> Self {
        Self::new(CMatrix::zeros(dim, dim), label).expect("zero is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn basis_dims(&self) -> &[usize] {
        &self.basis_dims
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale(s), label: self.label.clone(), basis_dims: self.basis_dims.clone() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.basis_dims.clone();
        dims.extend_from_slice(&other.basis_dims);
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            label: format!("{}⊗{}", self.label, other.label),
            basis_dims: dims,
        }
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        SpectralDecomposition::new(&self.matrix).expect("stored operator is Hermitian")
    }

    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        expectation(&self.matrix, rho.matrix())
    }
}

/// `Re tr(h rho)` without forming the product.
pub fn expectation(h: &CMatrix, rho: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += h[(i, j)] * rho[(j, i)];
        }
    }
    acc.re
}
