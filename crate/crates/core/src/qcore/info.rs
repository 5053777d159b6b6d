//! Thermal states, entropies, ergotropy and distances.

use super::linalg::{self, CMatrix, SpectralDecomposition};
use super::operators::HermitianOperator;
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Eigenvalues below this weight contribute nothing to entropies.
const ENTROPY_CUTOFF: f64 = 1e-14;

/// Partial trace of a raw matrix over every subsystem not listed in `keep`.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let count = dims.len();
    for &k in keep {
        if k >= count {
            return Err(Error::InvalidSubsystem { index: k, count });
        }
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let total: usize = dims.iter().product();
    if total != m.nrows() {
        return Err(Error::DimensionMismatch(format!("dims {dims:?} vs matrix {}", m.nrows())));
    }
    let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();

    // Split every full index into (kept index, traced index).
    let mut kept_of = vec![0usize; total];
    let mut traced_of = vec![0usize; total];
    for idx in 0..total {
        let mut rem = idx;
        let mut digits = vec![0usize; count];
        for s in (0..count).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let (mut kp, mut tr) = (0usize, 0usize);
        for s in 0..count {
            if keep_sorted.binary_search(&s).is_ok() {
                kp = kp * dims[s] + digits[s];
            } else {
                tr = tr * dims[s] + digits[s];
            }
        }
        kept_of[idx] = kp;
        traced_of[idx] = tr;
    }

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for i in 0..total {
        for j in 0..total {
            if traced_of[i] == traced_of[j] {
                out[(kept_of[i], kept_of[j])] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.basis_dims();
    let out = partial_trace_matrix(rho.matrix(), dims, keep)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let new_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let new_dims = if new_dims.is_empty() { vec![1] } else { new_dims };
    DensityMatrix::from_evolved(out, new_dims)
}

/// `exp(-beta H) / Z`; negative `beta` gives population inversion.
pub fn thermal_state(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("inverse temperature {beta}")));
    }
    let sd = h.spectral();
    let exponents: Vec<f64> = sd.eigenvalues.iter().map(|&e| -beta * e).collect();
    let shift = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|x| (x - shift).exp()).collect();
    let z: f64 = weights.iter().sum();
    let w =
        SpectralDecomposition { eigenvalues: weights.iter().map(|x| x / z).collect(), eigenvectors: sd.eigenvectors };
    let m = w.reconstruct();
    DensityMatrix::with_dims(m, h.basis_dims().to_vec())
}

/// Maximum work extractable by a unitary.
pub fn ergotropy(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!("state {} vs operator {}", rho.dim(), h.dim())));
    }
    let r = rho.clipped_spectrum()?;
    let e = h.spectral();
    let energy = h.expectation(rho);
    // Largest populations on the lowest levels.
    let passive: f64 = r.eigenvalues.iter().rev().zip(e.eigenvalues.iter()).map(|(p, x)| p * x).sum();
    Ok((energy - passive).max(0.0))
}

fn entropy_of(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&p| p > ENTROPY_CUTOFF).map(|&p| -p * p.ln()).sum()
}

/// Von Neumann entropy in nats.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of(&rho.clipped_spectrum()?.eigenvalues))
}

/// `S(A) + S(B) - S(AB)` where `A` is the list of subsystems in `part_a`.
pub fn mutual_information(rho: &DensityMatrix, part_a: &[usize]) -> Result<f64> {
    let n = rho.basis_dims().len();
    let part_b: Vec<usize> = (0..n).filter(|k| !part_a.contains(k)).collect();
    let sa = vn_entropy(&partial_trace(rho, part_a)?)?;
    let sb = vn_entropy(&partial_trace(rho, &part_b)?)?;
    let sab = vn_entropy(rho)?;
    Ok((sa + sb - sab).max(0.0))
}

/// Block-dephases `rho` in the eigenspaces of `h`.
pub fn dephase_in(rho: &CMatrix, h: &HermitianOperator) -> CMatrix {
    let scale = linalg::max_abs(h.matrix()).max(1.0);
    let projectors = h.spectral().eigenprojectors(1e-9 * scale);
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (_, p) in &projectors {
        out += p * rho * p;
    }
    out
}

/// Relative entropy of coherence with respect to the energy basis of `h`.
pub fn rel_entropy_coherence(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!("state {} vs operator {}", rho.dim(), h.dim())));
    }
    let deph = DensityMatrix::from_evolved(dephase_in(rho.matrix(), h), rho.basis_dims().to_vec())?;
    Ok((vn_entropy(&deph)? - vn_entropy(rho)?).max(0.0))
}

/// `0.5 * ||rho - sigma||_1`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    Ok(trace_distance_matrix(rho.matrix(), sigma.matrix()))
}

pub fn trace_distance_matrix(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = linalg::hermitize(&(a - b));
    let sd = SpectralDecomposition::new(&diff).expect("difference of Hermitian matrices");
    0.5 * sd.eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

/// Expectation value `tr(h rho)`.
pub fn energy(rho: &DensityMatrix, h: &HermitianOperator) -> f64 {
    h.expectation(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{max_abs, ONE, ZERO};
    use crate::qcore::operators::{sigma_x, sigma_z};

    fn qubit(omega: f64) -> HermitianOperator {
        HermitianOperator::qubit(omega, "H")
    }

    #[test]
    fn trace_out_product() {
        let a = DensityMatrix::diagonal(&[0.2, 0.8]).unwrap();
        let b = DensityMatrix::pure(&[ONE, ONE]).unwrap();
        let ab = a.kron(&b);
        let back = partial_trace(&ab, &[0]).unwrap();
        assert!(max_abs(&(back.matrix() - a.matrix())) < 1e-15);
        let other = partial_trace(&ab, &[1]).unwrap();
        assert!(max_abs(&(other.matrix() - b.matrix())) < 1e-15);
    }

    #[test]
    fn bell_marginal_is_mixed() {
        let phi = DensityMatrix::pure(&[ONE, ZERO, ZERO, ONE]).unwrap().with_basis_dims(vec![2, 2]).unwrap();
        let m = partial_trace(&phi, &[0]).unwrap();
        assert!(max_abs(&(m.matrix() - linalg::identity(2).unscale(2.0))) < 1e-15);
        assert!((mutual_information(&phi, &[0]).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn invalid_subsystem() {
        let rho = DensityMatrix::maximally_mixed(4).with_basis_dims(vec![2, 2]).unwrap();
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidSubsystem { .. })));
    }

    #[test]
    fn thermal_limits() {
        let h = qubit(1.5);
        let inf = thermal_state(&h, 0.0).unwrap();
        assert!((inf.population(0) - 0.5).abs() < 1e-15);
        let cold = thermal_state(&h, 1e4).unwrap();
        assert!((cold.population(1) - 1.0).abs() < 1e-15);
        let warm = thermal_state(&h, 1.0).unwrap();
        let want = (-0.75f64).exp() / ((0.75f64).exp() + (-0.75f64).exp());
        assert!((warm.population(0) - want).abs() < 1e-14);
        let inverted = thermal_state(&h, -1.0).unwrap();
        assert!((inverted.population(1) - want).abs() < 1e-14);
        assert!(thermal_state(&h, f64::NAN).is_err());
    }

    #[test]
    fn ergotropy_of_inverted_qubit() {
        let omega = 1.5;
        let beta = 0.8;
        let h = qubit(omega);
        let rho = thermal_state(&h, -beta).unwrap();
        let want = omega * (beta * omega / 2.0).tanh();
        assert!((ergotropy(&rho, &h).unwrap() - want).abs() < 1e-12);
        assert!(ergotropy(&thermal_state(&h, beta).unwrap(), &h).unwrap() < 1e-14);
        assert!(ergotropy(&DensityMatrix::maximally_mixed(2), &h).unwrap() < 1e-14);
    }

    #[test]
    fn coherence_of_plus_state() {
        let plus = DensityMatrix::pure(&[ONE, ONE]).unwrap();
        let h = HermitianOperator::new(sigma_z(), "z").unwrap();
        assert!((rel_entropy_coherence(&plus, &h).unwrap() - 2f64.ln()).abs() < 1e-12);
        let hx = HermitianOperator::new(sigma_x(), "x").unwrap();
        assert!(rel_entropy_coherence(&plus, &hx).unwrap() < 1e-12);
    }

    #[test]
    fn classical_correlation() {
        let rho = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap().with_basis_dims(vec![2, 2]).unwrap();
        assert!((mutual_information(&rho, &[0]).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn distance_between_orthogonal_pure_states() {
        let a = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }
}
