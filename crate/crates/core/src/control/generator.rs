use nalgebra::{Matrix2, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::linalg::{CMatrix, C64, I, ZERO};
use crate::qcore::operators::HermitianOperator;
use crate::qcore::superop::Superoperator;

pub type Vec4 = SVector<C64, 4>;
pub type Mat4 = SMatrix<C64, 4, 4>;

/// Battery gap, coupling and bath inverse temperature for the driven qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega: f64,
    pub epsilon: f64,
    pub beta: f64,
}

impl DriveParams {
    pub fn new(omega: f64, epsilon: f64, beta: f64) -> Result<Self> {
        let p = Self { omega, epsilon, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega = {}", self.omega)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon = {}", self.epsilon)));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta = {}", self.beta)));
        }
        Ok(())
    }

    pub fn eps2(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    pub fn z1(&self) -> f64 {
        2.0 * (self.beta * self.omega / 2.0).cosh()
    }

    /// `eps^2 e^{beta omega / 2} / Z`: the rate that feeds the excited state.
    pub fn rate_up(&self) -> f64 {
        self.eps2() * (self.beta * self.omega / 2.0).exp() / self.z1()
    }

    /// `eps^2 e^{-beta omega / 2} / Z`.
    pub fn rate_down(&self) -> f64 {
        self.eps2() * (-self.beta * self.omega / 2.0).exp() / self.z1()
    }

    /// Excited population of the charged (inverted) steady state.
    pub fn excited_target(&self) -> f64 {
        (self.beta * self.omega / 2.0).exp() / self.z1()
    }

    /// Excited population of the thermal (empty) state.
    pub fn excited_thermal(&self) -> f64 {
        (-self.beta * self.omega / 2.0).exp() / self.z1()
    }

    /// Decay rate of the populations towards the target.
    pub fn population_rate(&self) -> f64 {
        self.eps2() / 2.0
    }

    pub fn empty_state(&self) -> Vec4 {
        let p = self.excited_thermal();
        Vec4::new(C64::new(p, 0.0), ZERO, ZERO, C64::new(1.0 - p, 0.0))
    }

    pub fn full_state(&self) -> Vec4 {
        let p = self.excited_target();
        Vec4::new(C64::new(p, 0.0), ZERO, ZERO, C64::new(1.0 - p, 0.0))
    }

    /// Bare energy `(omega/2) sigma_z` of the empty state.
    pub fn e_empty(&self) -> f64 {
        -self.omega / 2.0 * (self.beta * self.omega / 2.0).tanh()
    }

    pub fn e_full(&self) -> f64 {
        -self.e_empty()
    }
}

/// `(omega/2) (alpha sigma_x + (1 - alpha) sigma_z)`.
pub fn h_alpha(alpha: f64, omega: f64) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
    }
    let m = h_alpha2(alpha, omega);
    HermitianOperator::new(CMatrix::from_fn(2, 2, |i, j| m[(i, j)]), "H_alpha")
}

pub(crate) fn h_alpha2(alpha: f64, omega: f64) -> Matrix2<C64> {
    let a = C64::new(omega / 2.0 * alpha, 0.0);
    let z = C64::new(omega / 2.0 * (1.0 - alpha), 0.0);
    Matrix2::new(z, a, a, -z)
}

/// The 4x4 generator in the `(rho00, rho01, rho10, rho11)` convention.
pub fn generator(alpha: f64, params: &DriveParams) -> Superoperator {
    let g = generator4(alpha, params);
    let m = CMatrix::from_fn(4, 4, |i, j| g[(i, j)]);
    Superoperator::from_matrix(m, 2).expect("4x4 for a qubit")
}

pub(crate) fn generator4(alpha: f64, p: &DriveParams) -> Mat4 {
    let w = p.omega;
    let up = C64::new(p.rate_up() / 2.0, 0.0);
    let dn = C64::new(p.rate_down() / 2.0, 0.0);
    let c = C64::new(p.eps2() / 4.0, 0.0);
    let a = I * (w * alpha / 2.0);
    let z = I * (w * (1.0 - alpha));
    #[rustfmt::skip]
    let m = Mat4::new(
        -dn,  a,      -a,     up,
        a,    -c - z, ZERO,   -a,
        -a,   ZERO,   -c + z, a,
        dn,   -a,     a,      -up,
    );
    m
}

/// Dissipative part of [`generator4`]; independent of `alpha`.
pub(crate) fn dissipator4(p: &DriveParams) -> Mat4 {
    generator4(0.0, p) - hamiltonian4(0.0, p.omega)
}

/// `rho -> -i [H(alpha), rho]`.
pub(crate) fn hamiltonian4(alpha: f64, omega: f64) -> Mat4 {
    let h = h_alpha2(alpha, omega);
    let id = Matrix2::<C64>::identity();
    // Row-major vectorization: vec(A X B) = (A ⊗ B^T) vec(X).
    let left = h.kronecker(&id);
    let right = id.kronecker(&h.transpose());
    (left - right) * (-I)
}

/// Energy functional `x -> tr(H(alpha) X)` as a row over vectorized `X`.
pub(crate) fn energy_row(alpha: f64, omega: f64) -> SMatrix<C64, 1, 4> {
    let h = h_alpha2(alpha, omega);
    // tr(H X) = sum_ij H_ji X_ij.
    SMatrix::<C64, 1, 4>::new(h[(0, 0)], h[(1, 0)], h[(0, 1)], h[(1, 1)])
}

pub(crate) fn energy(alpha: f64, omega: f64, v: &Vec4) -> f64 {
    (energy_row(alpha, omega) * v)[(0, 0)].re
}

/// `exp(m)` for a 4x4 matrix: Taylor series (truncated once the terms drop
/// below double precision) after scaling the 1-norm below 1/2, then repeated squaring.
pub(crate) fn expm4(m: &Mat4) -> Mat4 {
    let norm = (0..4).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * C64::new(scale, 0.0);
    let mut term = Mat4::identity();
    let mut sum = Mat4::identity();
    for k in 1..=20 {
        term = term * a / C64::new(k as f64, 0.0);
        sum += term;
        if term.iter().all(|z| z.norm() < 1e-17) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

pub(crate) fn to_matrix(v: &Vec4) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[v[0], v[1], v[2], v[3]])
}

pub(crate) fn from_matrix(m: &CMatrix) -> Vec4 {
    Vec4::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}
