use std::collections::HashMap;

use nalgebra::SMatrix;

use super::generator::{
    dissipator4, energy, energy_row, expm4, from_matrix, generator4, h_alpha2, to_matrix, DriveParams, Mat4, Vec4,
};
use super::protocol::Protocol;
use crate::error::{Error, Result};
use crate::qcore::info::dephase_in;
use crate::qcore::linalg::{CMatrix, C64};
use crate::qcore::operators::HermitianOperator;
use crate::qcore::state::DensityMatrix;

/// Dephasing `(1 - p/2) rho + (p/2) sum_i P_i rho P_i` in the eigenbasis of `h`.
pub fn dephase(rho: &DensityMatrix, p: f64, h: &HermitianOperator) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("dephasing probability {p} outside [0, 1]")));
    }
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!("state {} vs operator {}", rho.dim(), h.dim())));
    }
    let blocks = dephase_in(rho.matrix(), h);
    let out = rho.matrix().scale(1.0 - p / 2.0) + blocks.scale(p / 2.0);
    DensityMatrix::from_evolved(out, rho.basis_dims().to_vec())
}

/// Dephasing as a superoperator on the vectorized qubit for `H(alpha)`.
fn dephase4(alpha: f64, omega: f64, p: f64) -> Mat4 {
    let h = HermitianOperator::new(CMatrix::from_fn(2, 2, |i, j| h_alpha2(alpha, omega)[(i, j)]), "H_alpha")
        .expect("H(alpha) is Hermitian");
    let mut m = Mat4::zeros();
    let mut unit = CMatrix::zeros(2, 2);
    for col in 0..4 {
        unit[(col / 2, col % 2)] = C64::new(1.0, 0.0);
        let img = unit.scale(1.0 - p / 2.0) + dephase_in(&unit, &h).scale(p / 2.0);
        m.set_column(col, &from_matrix(&img));
        unit[(col / 2, col % 2)] = C64::new(0.0, 0.0);
    }
    m
}

/// Work and heat under driving; heat is positive into the bath.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct DrivenLedger {
    /// Work done by sudden changes of the Hamiltonian.
    pub w_drive: f64,
    /// Work done by switching the system-bath coupling.
    pub w_interaction: f64,
    pub q: f64,
    /// Energy change measured with the instantaneous Hamiltonian.
    pub d_e: f64,
    /// Ergotropy with respect to the undriven Hamiltonian.
    pub ergotropy_final: f64,
}

impl DrivenLedger {
    pub fn work(&self) -> f64 {
        self.w_drive + self.w_interaction
    }

    pub fn first_law_residual(&self) -> f64 {
        self.w_drive + self.w_interaction - self.d_e - self.q
    }
}

/// Qubit ergotropy for `H = (omega/2) sigma_z`.
pub(crate) fn ergotropy4(v: &Vec4, omega: f64) -> f64 {
    let z = (v[0] - v[3]).re;
    let x = 2.0 * v[1].re;
    let y = -2.0 * v[1].im;
    let r = (x * x + y * y + z * z).sqrt();
    (omega / 2.0 * (z + r)).max(0.0)
}

fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// Relative entropy of coherence of a qubit in the `sigma_z` basis.
pub(crate) fn coherence4(v: &Vec4) -> f64 {
    let z = (v[0] - v[3]).re;
    let r = (z * z + 4.0 * v[1].norm_sqr()).sqrt().min(1.0);
    (binary_entropy(0.5 * (1.0 + z.abs())) - binary_entropy(0.5 * (1.0 + r))).max(0.0)
}

/// A sample of a driven run.
#[derive(Debug, Clone, Copy)]
pub struct DrivenSample {
    pub t: f64,
    pub alpha: f64,
    pub(crate) state: Vec4,
    pub ledger: DrivenLedger,
}

impl DrivenSample {
    pub fn state(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_evolved(to_matrix(&self.state), vec![2])
    }

    /// Excited-state population.
    pub fn excited(&self) -> f64 {
        self.state[0].re
    }

    /// Energy with respect to the undriven Hamiltonian.
    pub fn bare_energy(&self, omega: f64) -> f64 {
        energy(0.0, omega, &self.state)
    }

    /// Relative entropy of coherence in the bare energy basis.
    pub fn coherence(&self) -> f64 {
        coherence4(&self.state)
    }

    pub fn max_offdiag(&self) -> f64 {
        self.state[1].norm()
    }
}

#[derive(Debug, Clone)]
pub struct DrivenRun {
    pub params: DriveParams,
    pub samples: Vec<DrivenSample>,
}

impl DrivenRun {
    pub fn last(&self) -> &DrivenSample {
        self.samples.last().expect("runs hold the initial sample")
    }

    pub fn ledger(&self) -> DrivenLedger {
        self.last().ledger
    }

    pub fn final_state(&self) -> Result<DensityMatrix> {
        self.last().state()
    }

    /// Largest first-law residual over all samples.
    pub fn max_first_law_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.ledger.first_law_residual().abs()).fold(0.0, f64::max)
    }

    /// Stored-energy fraction `(E - E_empty) / (E_full - E_empty)`.
    pub fn energy_fraction(&self, sample: &DrivenSample) -> f64 {
        let p = &self.params;
        (sample.bare_energy(p.omega) - p.e_empty()) / (p.e_full() - p.e_empty())
    }
}

/// How often the dephasing map is applied during a driven run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Dephasing {
    pub p: f64,
    /// Interval between applications; `None` picks `1e-2 min(1/omega, 1/eps^2)`.
    pub cadence: Option<f64>,
}

impl Dephasing {
    pub const NONE: Self = Self { p: 0.0, cadence: None };

    pub fn new(p: f64) -> Self {
        Self { p, cadence: None }
    }

    pub fn interval(&self, params: &DriveParams) -> f64 {
        self.cadence.unwrap_or_else(|| default_cadence(params))
    }
}

pub fn default_cadence(params: &DriveParams) -> f64 {
    let eps2 = params.eps2();
    let slow = if eps2 > 0.0 { (1.0 / params.omega).min(1.0 / eps2) } else { 1.0 / params.omega };
    1e-2 * slow
}

/// Propagator and its time integral for a constant generator.
#[derive(Debug, Clone, Copy)]
struct StepPropagator {
    p: Mat4,
    j: Mat4,
}

fn step_propagator(m: &Mat4, dt: f64) -> StepPropagator {
    let mut a = SMatrix::<C64, 8, 8>::zeros();
    a.fixed_view_mut::<4, 4>(0, 0).copy_from(&(m * C64::new(dt, 0.0)));
    for i in 0..4 {
        a[(4 + i, i)] = C64::new(dt, 0.0);
    }
    let e = a.exp();
    StepPropagator { p: e.fixed_view::<4, 4>(0, 0).into(), j: e.fixed_view::<4, 4>(4, 0).into() }
}

/// `exp(M(alpha) dt)` on the vectorized qubit.
pub(crate) fn propagator4(alpha: f64, dt: f64, params: &DriveParams) -> Mat4 {
    expm4(&(generator4(alpha, params) * C64::new(dt, 0.0)))
}

/// Integrates a protocol with optional dephasing and records the ledger.
pub fn driven_run(protocol: &Protocol, params: &DriveParams, dephasing: Dephasing) -> Result<DrivenRun> {
    driven_run_from(protocol, params, dephasing, params.empty_state())
}

pub(crate) fn driven_run_from(
    protocol: &Protocol,
    params: &DriveParams,
    dephasing: Dephasing,
    rho0: Vec4,
) -> Result<DrivenRun> {
    protocol.validate()?;
    params.validate()?;
    if !(0.0..=1.0).contains(&dephasing.p) {
        return Err(Error::InvalidParameter(format!("dephasing probability {} outside [0, 1]", dephasing.p)));
    }
    let h_max = dephasing.interval(params);
    if !(h_max > 0.0) {
        return Err(Error::InvalidParameter(format!("dephasing cadence {h_max}")));
    }
    let omega = params.omega;
    let diss = dissipator4(params);
    let q_rate = omega * params.population_rate();
    let target = params.excited_target();

    let mut cache: HashMap<(u64, u64), StepPropagator> = HashMap::new();
    let mut deph_cache: HashMap<u64, Mat4> = HashMap::new();
    let mut v = rho0;
    let e0 = energy(0.0, omega, &v);
    let mut ledger = DrivenLedger { ergotropy_final: ergotropy4(&v, omega), ..Default::default() };
    let mut t = 0.0;
    let mut alpha_now = 0.0;
    let mut samples = vec![DrivenSample { t, alpha: alpha_now, state: v, ledger }];

    for seg in &protocol.segments {
        if seg.alpha != alpha_now {
            let dw = energy(seg.alpha, omega, &v) - energy(alpha_now, omega, &v);
            ledger.w_drive += dw;
            alpha_now = seg.alpha;
        }
        let n_sub = (seg.dt / h_max).ceil().max(1.0) as usize;
        let h = seg.dt / n_sub as f64;
        let key = (seg.alpha.to_bits(), h.to_bits());
        let prop = *cache.entry(key).or_insert_with(|| step_propagator(&generator4(seg.alpha, params), h));
        let row = energy_row(seg.alpha, omega);
        for _ in 0..n_sub {
            let integral = prop.j * v;
            v = prop.p * v;
            let q = q_rate * (target * h - integral[0].re);
            let e_diss = (row * diss * integral)[(0, 0)].re;
            ledger.q += q;
            ledger.w_interaction += e_diss + q;
            if dephasing.p > 0.0 {
                let d =
                    deph_cache.entry(seg.alpha.to_bits()).or_insert_with(|| dephase4(seg.alpha, omega, dephasing.p));
                v = *d * v;
            }
            t += h;
            ledger.d_e = energy(alpha_now, omega, &v) - e0;
            ledger.ergotropy_final = ergotropy4(&v, omega);
            samples.push(DrivenSample { t, alpha: alpha_now, state: v, ledger });
        }
    }
    if alpha_now != 0.0 {
        // Closing quench back to H(0) at the end of the schedule.
        ledger.w_drive += energy(0.0, omega, &v) - energy(alpha_now, omega, &v);
        ledger.d_e = energy(0.0, omega, &v) - e0;
        let last = samples.last_mut().expect("initial sample");
        last.alpha = 0.0;
        last.ledger = ledger;
    }
    Ok(DrivenRun { params: *params, samples })
}

/// States after each segment (the initial state first).
pub fn propagate_protocol(
    protocol: &Protocol,
    rho0: &DensityMatrix,
    params: &DriveParams,
) -> Result<Vec<DensityMatrix>> {
    protocol.validate()?;
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("driven battery is a qubit, got dimension {}", rho0.dim())));
    }
    let mut v = from_matrix(rho0.matrix());
    let mut out = vec![rho0.clone()];
    for seg in &protocol.segments {
        v = propagator4(seg.alpha, seg.dt, params) * v;
        out.push(DensityMatrix::from_evolved(to_matrix(&v), vec![2])?);
    }
    Ok(out)
}

/// Power and efficiencies at the time the stored energy reaches `1 - delta`
/// of the charged value.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChargeMetrics {
    pub t_charge: f64,
    pub stored_energy: f64,
    pub power: f64,
    pub work: f64,
    pub heat: f64,
    pub ergotropy: f64,
    pub eta_heat: f64,
    pub eta_ergo: f64,
}

pub fn charge_metrics(run: &DrivenRun, delta: f64) -> Result<ChargeMetrics> {
    let target = 1.0 - delta;
    let idx = run
        .samples
        .iter()
        .position(|s| s.alpha == 0.0 && run.energy_fraction(s) >= target)
        .ok_or_else(|| Error::Unreachable(format!("stored energy never reaches {target} of the charged value")))?;
    let s1 = &run.samples[idx];
    let (t, ledger, stored) = if idx == 0 {
        (s1.t, s1.ledger, run.energy_fraction(s1))
    } else {
        let s0 = &run.samples[idx - 1];
        let f0 = run.energy_fraction(s0);
        let f1 = run.energy_fraction(s1);
        let w = if f1 > f0 && s0.alpha == s1.alpha { ((target - f0) / (f1 - f0)).clamp(0.0, 1.0) } else { 1.0 };
        let lerp = |a: f64, b: f64| a + w * (b - a);
        let l = DrivenLedger {
            w_drive: lerp(s0.ledger.w_drive, s1.ledger.w_drive),
            w_interaction: lerp(s0.ledger.w_interaction, s1.ledger.w_interaction),
            q: lerp(s0.ledger.q, s1.ledger.q),
            d_e: lerp(s0.ledger.d_e, s1.ledger.d_e),
            ergotropy_final: lerp(s0.ledger.ergotropy_final, s1.ledger.ergotropy_final),
        };
        (lerp(s0.t, s1.t), l, lerp(f0, f1))
    };
    let p = &run.params;
    let stored_energy = stored * (p.e_full() - p.e_empty());
    let work = ledger.work();
    Ok(ChargeMetrics {
        t_charge: t,
        stored_energy,
        power: if t > 0.0 { stored_energy / t } else { f64::INFINITY },
        work,
        heat: ledger.q,
        ergotropy: ledger.ergotropy_final,
        eta_heat: 1.0 - ledger.q / work,
        eta_ergo: ledger.ergotropy_final / work,
    })
}

/// Runs `protocol` followed by an undriven tail long enough to charge.
pub fn charge_with(
    protocol: &Protocol,
    params: &DriveParams,
    dephasing: Dephasing,
    delta: f64,
) -> Result<(DrivenRun, ChargeMetrics)> {
    let relax = 2.0 * (1.0 / delta).ln() / params.population_rate();
    let full = protocol.extended_to(protocol.total_time() + relax)?;
    let run = driven_run(&full, params, dephasing)?;
    let m = charge_metrics(&run, delta)?;
    Ok((run, m))
}
