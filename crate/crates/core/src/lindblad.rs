//! Markovian generator of the collision model and its steady states.

use crate::collision::CollisionSpec;
use crate::error::{Error, Result};
use crate::qcore::info::partial_trace_matrix;
use crate::qcore::linalg::{self, CMatrix, C64};
use crate::qcore::operators::HermitianOperator;
use crate::qcore::state::DensityMatrix;
use crate::qcore::superop::{unvectorize, vectorize, Superoperator};

/// Relative singular-value threshold for kernel membership.
pub const KERNEL_TOL: f64 = 1e-10;
/// Singular values between `KERNEL_TOL` and this (relative) make the kernel ill-conditioned.
pub const ILL_CONDITIONED_TOL: f64 = 1e-8;

/// `rho -> -1/2 tr_R [V, [V, rho ⊗ tau]]` with `V` already scaled.
pub fn double_commutator_dissipator(v: &CMatrix, tau: &CMatrix, ds: usize, dr: usize) -> Result<Superoperator> {
    if v.nrows() != ds * dr || tau.nrows() != dr {
        return Err(Error::DimensionMismatch(format!(
            "V is {}x{}, tau is {}x{}, expected {} and {dr}",
            v.nrows(),
            v.ncols(),
            tau.nrows(),
            tau.ncols(),
            ds * dr
        )));
    }
    let vv = v * v;
    let dims = [ds, dr];
    let mut failure = None;
    let map = Superoperator::from_map(ds, |unit| {
        let x = linalg::kron(unit, tau);
        let dc = &vv * &x - (v * &x * v).scale(2.0) + &x * &vv;
        match partial_trace_matrix(&dc, &dims, &[0]) {
            Ok(m) => m.scale(-0.5),
            Err(e) => {
                failure = Some(e);
                CMatrix::zeros(ds, ds)
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(map),
    }
}

pub fn dissipator(spec: &CollisionSpec) -> Result<Superoperator> {
    spec.validate()?;
    let tau = spec.ancilla_state()?;
    let v = spec.v_unscaled.matrix().scale(spec.epsilon);
    double_commutator_dissipator(&v, tau.matrix(), spec.system_dim(), spec.ancilla_dim())
}

/// A time-independent generator `L = -i[H, .] + D`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    generator: Superoperator,
    spec: Option<CollisionSpec>,
}

impl Liouvillian {
    pub fn from_superoperator(generator: Superoperator) -> Self {
        Self { generator, spec: None }
    }

    pub fn hamiltonian_only(h: &HermitianOperator) -> Self {
        Self::from_superoperator(Superoperator::hamiltonian(h.matrix()))
    }

    pub fn generator(&self) -> &Superoperator {
        &self.generator
    }

    pub fn system_dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn spec(&self) -> Option<&CollisionSpec> {
        self.spec.as_ref()
    }

    pub fn propagator(&self, t: f64) -> Superoperator {
        self.generator.exp(t)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.generator.eigenvalues()
    }

    /// Checks trace preservation, a zero mode and no growing modes.
    pub fn check_invariants(&self) -> Result<()> {
        let tp = self.generator.trace_preservation_error();
        if tp > 1e-10 {
            return Err(Error::Numerical(format!("generator not trace preserving ({tp:e})")));
        }
        let ev = self.eigenvalues();
        let scale = linalg::max_abs(self.generator.matrix()).max(1.0);
        let min_abs = ev.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if min_abs > 1e-10 * scale {
            return Err(Error::Numerical(format!("no zero eigenvalue (closest {min_abs:e})")));
        }
        let max_re = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re > 1e-10 * scale {
            return Err(Error::Numerical(format!("growing mode with real part {max_re:e}")));
        }
        Ok(())
    }
}

pub fn liouvillian(spec: &CollisionSpec) -> Result<Liouvillian> {
    let d = dissipator(spec)?;
    let h = Superoperator::hamiltonian(spec.h_s.matrix());
    Ok(Liouvillian { generator: h.add(&d), spec: Some(spec.clone()) })
}

pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("propagation time {t}")));
    }
    if rho0.dim() != l.system_dim() {
        return Err(Error::DimensionMismatch(format!("state {} vs generator {}", rho0.dim(), l.system_dim())));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    l.propagator(t).apply_state(rho0)
}

/// Kernel of a generator, split into valid states and indefinite directions.
#[derive(Debug, Clone)]
pub struct SteadyStates {
    pub states: Vec<DensityMatrix>,
    pub kernel_dim: usize,
    pub indefinite_directions: usize,
    pub unique: bool,
    pub ill_conditioned: bool,
    /// Smallest singular value outside the kernel, relative to the largest.
    pub relative_gap: f64,
}

impl SteadyStates {
    pub fn state(&self) -> Option<&DensityMatrix> {
        if self.unique {
            self.states.first()
        } else {
            None
        }
    }
}

pub fn steady_states(l: &Liouvillian) -> Result<SteadyStates> {
    let d = l.system_dim();
    let m = l.generator().matrix().clone();
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD without right singular vectors".into()))?;
    let sv = &svd.singular_values;
    let norm = sv.iter().cloned().fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let mut kernel = Vec::new();
    let mut relative_gap = f64::INFINITY;
    let mut ill_conditioned = false;
    for (k, &s) in sv.iter().enumerate() {
        let rel = s / norm;
        if rel < KERNEL_TOL {
            kernel.push(v_t.row(k).adjoint());
        } else {
            relative_gap = relative_gap.min(rel);
            if rel < ILL_CONDITIONED_TOL {
                ill_conditioned = true;
            }
        }
    }

    // Hermitian real basis of the kernel.
    let mut basis: Vec<nalgebra::DVector<C64>> = Vec::new();
    for v in &kernel {
        let x = unvectorize(v, d);
        let h1 = linalg::hermitize(&x);
        let h2 = (&x - x.adjoint()).map(|z| z * C64::new(0.0, -0.5));
        for h in [h1, h2] {
            let mut w = vectorize(&h);
            for b in &basis {
                let c = b.dotc(&w).re;
                w -= b.scale(c);
            }
            let n = w.norm();
            if n > 1e-8 && basis.len() < kernel.len() {
                basis.push(w.unscale(n));
            }
        }
    }

    let mut states = Vec::new();
    let mut indefinite = 0;
    for b in &basis {
        let h = linalg::hermitize(&unvectorize(b, d));
        let tr = linalg::trace(&h).re;
        if tr.abs() < 1e-8 {
            indefinite += 1;
            continue;
        }
        match DensityMatrix::new(h.unscale(tr)) {
            Ok(s) => states.push(s),
            Err(_) => indefinite += 1,
        }
    }
    let kernel_dim = kernel.len();
    Ok(SteadyStates {
        unique: kernel_dim == 1 && states.len() == 1,
        states,
        kernel_dim,
        indefinite_directions: indefinite,
        ill_conditioned,
        relative_gap,
    })
}

/// Residual norms `(||[H_S, H0]||, ||[V, H0 ⊗ I + I ⊗ H_R]||)` in spectral norm.
pub fn verify_h0(
    h_s: &HermitianOperator,
    h_r: &HermitianOperator,
    v: &HermitianOperator,
    h0: &HermitianOperator,
) -> Result<(f64, f64)> {
    if h0.dim() != h_s.dim() || v.dim() != h_s.dim() * h_r.dim() {
        return Err(Error::DimensionMismatch("verify_h0 operands".into()));
    }
    let r1 = linalg::op_norm(&linalg::commutator(h_s.matrix(), h0.matrix()));
    let k = linalg::kron(h0.matrix(), &linalg::identity(h_r.dim()))
        + linalg::kron(&linalg::identity(h0.dim()), h_r.matrix());
    let r2 = linalg::op_norm(&linalg::commutator(v.matrix(), &k));
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{collide, free_evolution};
    use crate::qcore::info::{thermal_state, trace_distance};
    use crate::qcore::operators::{sigma_minus, sigma_plus};

    fn single(epsilon: f64, omega: f64, beta: f64) -> CollisionSpec {
        let v = linalg::kron(&sigma_plus(), &sigma_plus()) + linalg::kron(&sigma_minus(), &sigma_minus());
        CollisionSpec::new(
            HermitianOperator::qubit(omega, "H_S"),
            HermitianOperator::qubit(omega, "H_R"),
            HermitianOperator::with_dims(v, "V", vec![2, 2]).unwrap(),
            epsilon,
            1e-3,
            beta,
        )
        .unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero_dissipator() {
        let mut s = single(0.5, 1.5, 1.0);
        s.v_unscaled = HermitianOperator::zeros(4, "0");
        assert!(linalg::max_abs(dissipator(&s).unwrap().matrix()) == 0.0);
    }

    #[test]
    fn jump_rates() {
        let (eps, omega, beta) = (0.5_f64, 1.5_f64, 1.0_f64);
        let d = dissipator(&single(eps, omega, beta)).unwrap();
        let z = 2.0 * (beta * omega / 2.0).cosh();
        let up = eps * eps * (beta * omega / 2.0).exp() / z;
        let down = eps * eps * (-beta * omega / 2.0).exp() / z;
        // Column 3 is rho_11 (ground); row 0 is rho_00 (excited).
        assert!((d.matrix()[(0, 3)].re - up).abs() < 1e-14);
        assert!((d.matrix()[(3, 0)].re - down).abs() < 1e-14);
        assert!((d.matrix()[(1, 1)].re + eps * eps / 2.0).abs() < 1e-14);
    }

    #[test]
    fn dissipator_is_collision_limit() {
        let s = single(0.5, 1.5, 1.0).with_delta_t(1e-6).unwrap();
        let rho = DensityMatrix::pure(&[C64::new(0.6, 0.0), C64::new(0.3, 0.74162)]).unwrap();
        let (after, _) = collide(&rho, &s).unwrap();
        let free = free_evolution(&rho, &s.h_s, 1e-6).unwrap();
        let fd = (after.matrix() - free.matrix()).unscale(1e-6);
        let exact = dissipator(&s).unwrap().apply(rho.matrix());
        assert!(linalg::max_abs(&(fd - exact)) < 1e-4);
    }

    #[test]
    fn unique_negative_temperature_steady_state() {
        let s = single(0.5, 1.5, 1.0);
        let l = liouvillian(&s).unwrap();
        l.check_invariants().unwrap();
        let ss = steady_states(&l).unwrap();
        assert!(ss.unique && !ss.ill_conditioned);
        let want = thermal_state(&s.h_s, -1.0).unwrap();
        assert!(trace_distance(ss.state().unwrap(), &want).unwrap() < 1e-10);
    }

    #[test]
    fn uncoupled_generator_has_degenerate_kernel() {
        let l = Liouvillian::hamiltonian_only(&HermitianOperator::qubit(1.5, "H"));
        let ss = steady_states(&l).unwrap();
        assert_eq!(ss.kernel_dim, 2);
        assert!(!ss.unique);
    }

    #[test]
    fn population_relaxation_rate() {
        let eps: f64 = 0.5;
        let l = liouvillian(&single(eps, 1.5, 1.0)).unwrap();
        let ev = l.eigenvalues();
        let real: Vec<&C64> = ev.iter().filter(|z| z.im.abs() < 1e-9).collect();
        assert!(real.iter().any(|z| (z.re + eps * eps).abs() < 1e-8));
        assert!(ev.iter().any(|z| (z.re + eps * eps / 2.0).abs() < 1e-8 && (z.im.abs() - 1.5).abs() < 1e-8));
    }

    #[test]
    fn h0_commutation() {
        let s = single(0.5, 1.5, 1.0);
        let minus = s.h_s.scaled(-1.0);
        let (a, b) = verify_h0(&s.h_s, &s.h_r, &s.v_unscaled, &minus).unwrap();
        assert!(a < 1e-12 && b < 1e-12);
        let (_, bad) = verify_h0(&s.h_s, &s.h_r, &s.v_unscaled, &s.h_s).unwrap();
        assert!(bad > 0.1);
    }

    #[test]
    fn zero_time_propagation() {
        let l = liouvillian(&single(0.5, 1.5, 1.0)).unwrap();
        let rho = DensityMatrix::diagonal(&[0.1, 0.9]).unwrap();
        let out = propagate(&l, &rho, 0.0).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
        assert!(propagate(&l, &rho, -1.0).is_err());
    }
}
