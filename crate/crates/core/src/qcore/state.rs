//! Density matrices.

use super::linalg::{self, CMatrix, SpectralDecomposition, C64};
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted; anything in `[-EIG_TOL, 0)` is clipped.
pub const EIG_TOL: f64 = 1e-9;

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
    basis_dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::with_dims(matrix, vec![d])
    }

    pub fn with_dims(matrix: CMatrix, basis_dims: Vec<usize>) -> Result<Self> {
        check_state_matrix(&matrix, &basis_dims)?;
        Ok(Self { matrix: linalg::hermitize(&matrix), basis_dims })
    }

    /// Accepts integrator output: renormalizes the trace and Hermitizes
    /// before validating.
    pub fn from_evolved(matrix: CMatrix, basis_dims: Vec<usize>) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if !tr.is_finite() || tr.abs() < 0.5 {
            return Err(Error::InvalidState(format!("trace {tr} after evolution")));
        }
        Self::with_dims(linalg::hermitize(&matrix).unscale(tr), basis_dims)
    }

    pub fn pure(ket: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(ket);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let v = v.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: linalg::identity(d).unscale(d as f64), basis_dims: vec![d] }
    }

    /// Diagonal state from populations (index 0 first).
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = populations.len();
        let m = CMatrix::from_fn(d, d, |i, j| if i == j { C64::new(populations[i], 0.0) } else { linalg::ZERO });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn basis_dims(&self) -> &[usize] {
        &self.basis_dims
    }

    pub fn with_basis_dims(self, basis_dims: Vec<usize>) -> Result<Self> {
        Self::with_dims(self.matrix, basis_dims)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.basis_dims.clone();
        dims.extend_from_slice(&other.basis_dims);
        Self { matrix: linalg::kron(&self.matrix, &other.matrix), basis_dims: dims }
    }

    pub fn population(&self, i: usize) -> f64 {
        self.matrix[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    /// Largest off-diagonal modulus in the stored basis.
    pub fn max_offdiag(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        check_state_matrix(&self.matrix, &self.basis_dims)
    }

    /// Spectrum with eigenvalues in `[-EIG_TOL, 0)` clipped to zero and renormalized.
    pub fn clipped_spectrum(&self) -> Result<SpectralDecomposition> {
        let mut sd = SpectralDecomposition::new(&self.matrix)?;
        if let Some(&lo) = sd.eigenvalues.first() {
            if lo < -EIG_TOL {
                return Err(Error::InvalidState(format!("eigenvalue {lo:e} below tolerance")));
            }
        }
        for x in sd.eigenvalues.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = sd.eigenvalues.iter().sum();
        for x in sd.eigenvalues.iter_mut() {
            *x /= total;
        }
        Ok(sd)
    }
}

fn check_state_matrix(m: &CMatrix, dims: &[usize]) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!("state matrix is {}x{}", m.nrows(), m.ncols())));
    }
    if dims.iter().product::<usize>() != m.nrows() {
        return Err(Error::DimensionMismatch(format!("basis dims {dims:?} do not multiply to {}", m.nrows())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let herm = linalg::hermiticity_error(m);
    if herm > linalg::HERMITIAN_TOL {
        return Err(Error::InvalidState(format!("Hermiticity deviation {herm:e}")));
    }
    let tr = linalg::trace(m).re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr}")));
    }
    let sd = SpectralDecomposition::new(&linalg::hermitize(m))?;
    let lo = sd.eigenvalues[0];
    if lo < -EIG_TOL {
        return Err(Error::InvalidState(format!("minimum eigenvalue {lo:e}")));
    }
    Ok(())
}
