//! Dense complex linear algebra on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Largest entrywise deviation `max |a - a^dagger|`.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Largest entrywise modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().fold(0.0_f64, |m, &s| m.max(s))
}

/// Matrix exponential by Pade scaling and squaring.
pub fn matrix_exp(m: &CMatrix) -> CMatrix {
    assert!(m.is_square(), "matrix_exp needs a square matrix");
    if m.nrows() == 0 {
        return m.clone();
    }
    m.clone().exp()
}

/// `exp(z * h)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, z: C64) -> Result<CMatrix> {
    let sd = SpectralDecomposition::new(h)?;
    Ok(sd.map(|x| (z * x).exp()))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, ordered like `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigendecomposition of a {}x{} matrix",
                h.nrows(),
                h.ncols()
            )));
        }
        let dev = hermiticity_error(h);
        let scale = max_abs(h).max(1.0);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { label: "matrix".into(), deviation: dev });
        }
        let eig = hermitize(h).symmetric_eigen();
        let n = h.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut eigenvectors = CMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            eigenvectors.set_column(col, &eig.eigenvectors.column(k));
        }
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `f(H)` for a scalar function `f`.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| C64::new(x, 0.0))
    }

    pub fn reconstruction_error(&self, h: &CMatrix) -> f64 {
        max_abs(&(self.reconstruct() - h))
    }

    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.eigenvectors.adjoint() * &self.eigenvectors - identity(n)))
    }

    /// Projectors onto eigenspaces, grouping eigenvalues closer than `tol`.
    pub fn eigenprojectors(&self, tol: f64) -> Vec<(f64, CMatrix)> {
        let n = self.dim();
        let mut out: Vec<(f64, CMatrix)> = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.eigenvalues[end] - self.eigenvalues[end - 1] <= tol {
                end += 1;
            }
            let cols = self.eigenvectors.columns(start, end - start);
            let proj = cols * cols.adjoint();
            let mean = self.eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
            out.push((mean, proj));
            start = end;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(entries: &[(f64, f64)], n: usize) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(entries[i * n + j].0, entries[i * n + j].1));
        hermitize(&m)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = CMatrix::zeros(3, 3);
        assert!(max_abs(&(matrix_exp(&z) - identity(3))) < 1e-15);
    }

    #[test]
    fn exp_of_jordan_block() {
        let a = C64::new(-0.3, 0.7);
        let m = CMatrix::from_row_slice(2, 2, &[a, ONE, ZERO, a]);
        let e = matrix_exp(&m);
        let want = CMatrix::from_row_slice(2, 2, &[a.exp(), a.exp(), ZERO, a.exp()]);
        assert!(max_abs(&(e - want)) < 1e-14);
    }

    #[test]
    fn exp_pade_matches_spectral_route() {
        let h = herm(
            &[
                (1.0, 0.0),
                (0.3, -0.2),
                (0.0, 0.5),
                (0.1, 0.4),
                (-2.0, 0.0),
                (0.7, 0.0),
                (0.2, 0.0),
                (0.0, 0.0),
                (0.5, 0.0),
            ],
            3,
        );
        let z = C64::new(0.0, -1.7);
        let a = matrix_exp(&h.map(|x| x * z));
        let b = expm_hermitian(&h, z).unwrap();
        assert!(max_abs(&(a - b)) < 1e-12);
    }

    #[test]
    fn eigenvalues_ascending_and_reconstruct() {
        let h = herm(&[(2.0, 0.0), (0.0, 1.0), (0.0, -1.0), (-1.0, 0.0)], 2);
        let sd = SpectralDecomposition::new(&h).unwrap();
        assert!(sd.eigenvalues[0] <= sd.eigenvalues[1]);
        assert!(sd.reconstruction_error(&h) < 1e-12);
        assert!(sd.orthonormality_error() < 1e-12);
    }

    #[test]
    fn degenerate_projectors_are_grouped() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        let sd = SpectralDecomposition::new(&h).unwrap();
        let p = sd.eigenprojectors(1e-9);
        assert_eq!(p.len(), 2);
        assert!((trace(&p[1].1).re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(SpectralDecomposition::new(&m).is_err());
    }
}
