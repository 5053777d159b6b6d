//! Repeated interactions with fresh thermal ancillas.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::qcore::info::{self, partial_trace_matrix, thermal_state};
use crate::qcore::linalg::{self, CMatrix, C64, I};
use crate::qcore::operators::{expectation, HermitianOperator};
use crate::qcore::state::DensityMatrix;
use crate::qcore::superop::{vectorize, Superoperator};

/// One battery-ancilla interaction, `V` scaled by `epsilon / sqrt(delta_t)` at use.
#[derive(Debug, Clone)]
pub struct CollisionSpec {
    pub h_s: HermitianOperator,
    pub h_r: HermitianOperator,
    pub v_unscaled: HermitianOperator,
    pub epsilon: f64,
    pub delta_t: f64,
    pub beta: f64,
}

impl CollisionSpec {
    pub fn new(
        h_s: HermitianOperator,
        h_r: HermitianOperator,
        v_unscaled: HermitianOperator,
        epsilon: f64,
        delta_t: f64,
        beta: f64,
    ) -> Result<Self> {
        let spec = Self { h_s, h_r, v_unscaled, epsilon, delta_t, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_unscaled.dim() != self.h_s.dim() * self.h_r.dim() {
            return Err(Error::DimensionMismatch(format!(
                "V has dimension {} but H_S ⊗ H_R has {}",
                self.v_unscaled.dim(),
                self.h_s.dim() * self.h_r.dim()
            )));
        }
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta_t = {}", self.delta_t)));
        }
        if !self.epsilon.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidParameter("non-finite epsilon or beta".into()));
        }
        Ok(())
    }

    pub fn with_delta_t(&self, delta_t: f64) -> Result<Self> {
        let mut s = self.clone();
        s.delta_t = delta_t;
        s.validate()?;
        Ok(s)
    }

    pub fn system_dim(&self) -> usize {
        self.h_s.dim()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.h_r.dim()
    }

    /// `H_S ⊗ I + I ⊗ H_R`.
    pub fn bare_hamiltonian(&self) -> CMatrix {
        let ds = self.system_dim();
        let dr = self.ancilla_dim();
        linalg::kron(self.h_s.matrix(), &linalg::identity(dr)) + linalg::kron(&linalg::identity(ds), self.h_r.matrix())
    }

    pub fn ancilla_state(&self) -> Result<DensityMatrix> {
        thermal_state(&self.h_r, self.beta)
    }

    /// Joint unitary for one collision.
    pub fn unitary(&self) -> Result<CMatrix> {
        let g = self.epsilon / self.delta_t.sqrt();
        let h = self.bare_hamiltonian() + self.v_unscaled.matrix().scale(g);
        linalg::expm_hermitian(&h, C64::new(0.0, -self.delta_t))
    }
}

/// Energy bookkeeping for one collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub d_e_system: f64,
    /// Energy deposited into the ancilla.
    pub heat: f64,
    /// Change of the bare joint energy over the collision.
    pub work: f64,
}

impl StepRecord {
    pub fn first_law_residual(&self) -> f64 {
        self.work - self.d_e_system - self.heat
    }
}

/// Cumulative work and heat; heat is positive when it flows into the bath.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThermoLedger {
    pub work: f64,
    pub heat: f64,
    pub d_e_system: f64,
    pub steps: usize,
    /// Largest per-step first-law residual seen.
    pub max_residual: f64,
}

impl ThermoLedger {
    pub fn record(&mut self, step: &StepRecord) {
        self.work += step.work;
        self.heat += step.heat;
        self.d_e_system += step.d_e_system;
        self.steps += 1;
        self.max_residual = self.max_residual.max(step.first_law_residual().abs());
    }

    pub fn first_law_residual(&self) -> f64 {
        self.work - self.d_e_system - self.heat
    }
}

/// Joint state after one collision, before tracing out the ancilla.
pub fn collide_joint(rho_s: &DensityMatrix, spec: &CollisionSpec) -> Result<(CMatrix, CMatrix)> {
    if rho_s.dim() != spec.system_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs system dimension {}",
            rho_s.dim(),
            spec.system_dim()
        )));
    }
    let tau = spec.ancilla_state()?;
    let before = linalg::kron(rho_s.matrix(), tau.matrix());
    let u = spec.unitary()?;
    let after = &u * &before * u.adjoint();
    Ok((before, after))
}

pub fn collide(rho_s: &DensityMatrix, spec: &CollisionSpec) -> Result<(DensityMatrix, StepRecord)> {
    let (before, after) = collide_joint(rho_s, spec)?;
    let dims = [spec.system_dim(), spec.ancilla_dim()];
    let rho_s_new = partial_trace_matrix(&after, &dims, &[0])?;
    let rho_r_new = partial_trace_matrix(&after, &dims, &[1])?;
    let tau = partial_trace_matrix(&before, &dims, &[1])?;
    let h0 = spec.bare_hamiltonian();
    let step = StepRecord {
        d_e_system: expectation(spec.h_s.matrix(), &rho_s_new) - expectation(spec.h_s.matrix(), rho_s.matrix()),
        heat: expectation(spec.h_r.matrix(), &rho_r_new) - expectation(spec.h_r.matrix(), &tau),
        work: expectation(&h0, &after) - expectation(&h0, &before),
    };
    let out = DensityMatrix::from_evolved(rho_s_new, rho_s.basis_dims().to_vec())?;
    Ok((out, step))
}

/// The reduced collision map tabulated once, with its energy functionals.
#[derive(Debug, Clone)]
pub struct CollisionChannel {
    pub map: Superoperator,
    d_e_system: DVector<C64>,
    heat: DVector<C64>,
    work: DVector<C64>,
}

impl CollisionChannel {
    pub fn new(spec: &CollisionSpec) -> Result<Self> {
        spec.validate()?;
        let ds = spec.system_dim();
        let dr = spec.ancilla_dim();
        let dims = [ds, dr];
        let tau = spec.ancilla_state()?;
        let u = spec.unitary()?;
        let ud = u.adjoint();
        let h0 = spec.bare_hamiltonian();
        let n = ds * ds;
        let mut map = CMatrix::zeros(n, n);
        let mut f_s = DVector::zeros(n);
        let mut f_r = DVector::zeros(n);
        let mut f_w = DVector::zeros(n);
        let mut unit = CMatrix::zeros(ds, ds);
        for i in 0..ds {
            for j in 0..ds {
                unit[(i, j)] = linalg::ONE;
                let before = linalg::kron(&unit, tau.matrix());
                let after = &u * &before * &ud;
                let s_new = partial_trace_matrix(&after, &dims, &[0])?;
                let r_new = partial_trace_matrix(&after, &dims, &[1])?;
                let r_old = partial_trace_matrix(&before, &dims, &[1])?;
                let col = i * ds + j;
                map.set_column(col, &vectorize(&s_new));
                f_s[col] = linear_energy(spec.h_s.matrix(), &s_new) - linear_energy(spec.h_s.matrix(), &unit);
                f_r[col] = linear_energy(spec.h_r.matrix(), &r_new) - linear_energy(spec.h_r.matrix(), &r_old);
                f_w[col] = linear_energy(&h0, &after) - linear_energy(&h0, &before);
                unit[(i, j)] = linalg::ZERO;
            }
        }
        Ok(Self { map: Superoperator::from_matrix(map, ds)?, d_e_system: f_s, heat: f_r, work: f_w })
    }

    pub fn step(&self, rho: &CMatrix) -> (CMatrix, StepRecord) {
        let v = vectorize(rho);
        let rec = StepRecord {
            d_e_system: self.d_e_system.dot(&v).re,
            heat: self.heat.dot(&v).re,
            work: self.work.dot(&v).re,
        };
        (self.map.apply(rho), rec)
    }
}

/// `tr(h m)` kept complex so it stays linear on non-Hermitian matrix units.
fn linear_energy(h: &CMatrix, m: &CMatrix) -> C64 {
    let n = h.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            acc += h[(a, b)] * m[(b, a)];
        }
    }
    acc
}

#[derive(Debug, Clone)]
pub struct CollisionRun {
    /// States after 0, 1, ..., n collisions.
    pub trajectory: Vec<DensityMatrix>,
    pub ledger: ThermoLedger,
}

impl CollisionRun {
    pub fn final_state(&self) -> &DensityMatrix {
        self.trajectory.last().expect("trajectory holds the initial state")
    }
}

pub fn run_repeated(rho0: &DensityMatrix, spec: &CollisionSpec, n_steps: usize) -> Result<CollisionRun> {
    run_repeated_sampled(rho0, spec, n_steps, 1)
}

/// Like [`run_repeated`] but keeps every `stride`-th state (plus the last).
pub fn run_repeated_sampled(
    rho0: &DensityMatrix,
    spec: &CollisionSpec,
    n_steps: usize,
    stride: usize,
) -> Result<CollisionRun> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    if rho0.dim() != spec.system_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs system dimension {}",
            rho0.dim(),
            spec.system_dim()
        )));
    }
    let stride = stride.max(1);
    let channel = CollisionChannel::new(spec)?;
    let dims = rho0.basis_dims().to_vec();
    let mut ledger = ThermoLedger::default();
    let mut trajectory = vec![rho0.clone()];
    let mut rho = rho0.matrix().clone();
    for k in 1..=n_steps {
        let (next, rec) = channel.step(&rho);
        ledger.record(&rec);
        rho = next;
        if k % stride == 0 || k == n_steps {
            trajectory.push(DensityMatrix::from_evolved(rho.clone(), dims.clone())?);
        }
    }
    Ok(CollisionRun { trajectory, ledger })
}

/// Outcome of [`charging_efficiency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChargingEfficiency {
    Charged {
        /// `1 - Q / W`.
        eta_heat: f64,
        /// Final ergotropy over the work spent.
        eta_ergo: f64,
    },
    /// The protocol did not spend positive work.
    NoCharging { work: f64 },
}

impl ChargingEfficiency {
    pub fn eta_heat(&self) -> Option<f64> {
        match self {
            Self::Charged { eta_heat, .. } => Some(*eta_heat),
            Self::NoCharging { .. } => None,
        }
    }

    pub fn eta_ergo(&self) -> Option<f64> {
        match self {
            Self::Charged { eta_ergo, .. } => Some(*eta_ergo),
            Self::NoCharging { .. } => None,
        }
    }
}

pub fn charging_efficiency(
    ledger: &ThermoLedger,
    rho_final: &DensityMatrix,
    h_s: &HermitianOperator,
) -> Result<ChargingEfficiency> {
    if ledger.work <= 0.0 {
        return Ok(ChargingEfficiency::NoCharging { work: ledger.work });
    }
    let erg = info::ergotropy(rho_final, h_s)?;
    Ok(ChargingEfficiency::Charged { eta_heat: 1.0 - ledger.heat / ledger.work, eta_ergo: erg / ledger.work })
}

/// `exp(-i H t)`-conjugation of `rho`: what a collision does when `V = 0`.
pub fn free_evolution(rho: &DensityMatrix, h: &HermitianOperator, t: f64) -> Result<DensityMatrix> {
    let u = linalg::expm_hermitian(h.matrix(), -I * t)?;
    DensityMatrix::from_evolved(&u * rho.matrix() * u.adjoint(), rho.basis_dims().to_vec())
}
