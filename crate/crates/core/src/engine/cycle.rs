use serde::{Deserialize, Serialize};

use crate::control::{
    coherence4, driven_run_from, energy, to_matrix, Dephasing, DriveParams, DrivenRun, Mat4, Protocol, Vec4,
};
use crate::error::{Error, Result};
use crate::qcore::linalg::C64;
use crate::qcore::state::DensityMatrix;

/// Largest number of plain cycle iterations tried when the fixed-point solve
/// does not close the cycle.
pub const MAX_CYCLES: usize = 10_000;
/// Trace distance between the start and end of a cycle accepted as periodic.
pub const CYCLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Coherent,
    Dephased,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Coherent => "coherent",
            Variant::Dephased => "dephased",
        }
    }
}

/// Parameters of the five-stroke cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSpec {
    pub omega_c: f64,
    pub omega_h: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub epsilon: f64,
    /// Length of the `alpha = 1` segment of the cold stroke.
    pub t_d: f64,
    pub t_cycle: f64,
    pub coherent: bool,
    /// Dephasing strength of the dephased variant.
    pub dephasing_p: f64,
    /// Share of `t_cycle` given to the cold stroke; the hot stroke gets the rest.
    pub cold_fraction: f64,
}

impl CycleSpec {
    pub fn new(
        omega_c: f64,
        omega_h: f64,
        beta_c: f64,
        beta_h: f64,
        epsilon: f64,
        t_d: f64,
        t_cycle: f64,
    ) -> Result<Self> {
        let s = Self {
            omega_c,
            omega_h,
            beta_c,
            beta_h,
            epsilon,
            t_d,
            t_cycle,
            coherent: true,
            dephasing_p: 1.0,
            cold_fraction: 0.5,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.omega_c > 0.0) || !(self.omega_h >= self.omega_c) || !self.omega_h.is_finite() {
            return bad(format!("need omega_h >= omega_c > 0, got {} and {}", self.omega_h, self.omega_c));
        }
        // Equal temperatures are admitted so the degenerate cycle can be run.
        if !(self.beta_h > 0.0) || !(self.beta_c >= self.beta_h) || !self.beta_c.is_finite() {
            return bad(format!("need beta_c >= beta_h > 0, got {} and {}", self.beta_c, self.beta_h));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon = {}", self.epsilon));
        }
        if !(self.t_d >= 0.0) || !self.t_d.is_finite() {
            return bad(format!("t_d = {}", self.t_d));
        }
        if !(self.t_cycle > 0.0) || !self.t_cycle.is_finite() {
            return bad(format!("t_cycle = {}", self.t_cycle));
        }
        if !(0.0..=1.0).contains(&self.dephasing_p) {
            return bad(format!("dephasing_p = {}", self.dephasing_p));
        }
        if !(self.cold_fraction > 0.0 && self.cold_fraction < 1.0) {
            return bad(format!("cold_fraction = {}", self.cold_fraction));
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        if self.coherent {
            Variant::Coherent
        } else {
            Variant::Dephased
        }
    }

    pub fn with_variant(mut self, v: Variant) -> Self {
        self.coherent = v == Variant::Coherent;
        self
    }

    pub fn with_t_cycle(mut self, t_cycle: f64) -> Self {
        self.t_cycle = t_cycle;
        self
    }

    pub fn with_hot(mut self, omega_h: f64, beta_h: f64) -> Self {
        self.omega_h = omega_h;
        self.beta_h = beta_h;
        self
    }

    pub fn cold_params(&self) -> Result<DriveParams> {
        DriveParams::new(self.omega_c, self.epsilon, self.beta_c)
    }

    pub fn hot_params(&self) -> Result<DriveParams> {
        DriveParams::new(self.omega_h, self.epsilon, self.beta_h)
    }

    pub fn t_cold(&self) -> f64 {
        self.cold_fraction * self.t_cycle
    }

    pub fn t_hot(&self) -> f64 {
        self.t_cycle - self.t_cold()
    }

    fn dephasing(&self) -> Dephasing {
        if self.coherent {
            Dephasing::NONE
        } else {
            Dephasing::new(self.dephasing_p)
        }
    }
}

pub fn otto_efficiency(omega_c: f64, omega_h: f64) -> f64 {
    1.0 - omega_c / omega_h
}

/// Per-cycle thermodynamics. Works are counted positive when extracted;
/// `q_h` is drawn from the hot bath and `q_c` is released into the cold bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleLedger {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub q_h: f64,
    pub q_c: f64,
    pub w_net: f64,
    pub eta: f64,
    pub power: f64,
    /// Largest relative entropy of coherence (bare energy basis) along the cycle.
    pub coherence_max: f64,
    /// Bare system energy change over one period.
    pub d_e_period: f64,
    pub converged: bool,
    /// Cycles iterated after the fixed-point solve (0 when the solve closed the cycle).
    pub cycles: usize,
    /// Trace distance between the state at the start and the end of the cycle.
    pub closure: f64,
}

impl CycleLedger {
    /// True when the cycle delivers net work.
    pub fn is_engine(&self) -> bool {
        self.w_net > 0.0
    }

    /// `sum W - Q_h + Q_c + dE`, zero when the books close.
    pub fn energy_residual(&self) -> f64 {
        self.w_net - self.q_h + self.q_c + self.d_e_period
    }
}

/// A limit cycle with the trajectories of its open strokes.
#[derive(Debug, Clone)]
pub struct CycleRun {
    pub spec: CycleSpec,
    pub ledger: CycleLedger,
    states: [Vec4; 5],
    end: Vec4,
    pub cold: DrivenRun,
    pub hot: DrivenRun,
}

impl CycleRun {
    /// State at the start of stroke `k` (1-based).
    pub fn state(&self, k: usize) -> Result<DensityMatrix> {
        if !(1..=5).contains(&k) {
            return Err(Error::InvalidParameter(format!("stroke {k} outside 1..=5")));
        }
        DensityMatrix::from_evolved(to_matrix(&self.states[k - 1]), vec![2])
    }

    pub fn final_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_evolved(to_matrix(&self.end), vec![2])
    }
}

fn invert(v: &Vec4) -> Vec4 {
    Vec4::new(v[3], v[2], v[1], v[0])
}

pub(crate) fn qubit_trace_distance(a: &Vec4, b: &Vec4) -> f64 {
    let d = a - b;
    let z = 0.5 * (d[0] - d[3]).re;
    (z * z + d[1].norm_sqr()).sqrt()
}

struct Pass {
    states: [Vec4; 5],
    end: Vec4,
    cold: DrivenRun,
    hot: DrivenRun,
}

fn pass(spec: &CycleSpec, cold_p: &DriveParams, hot_p: &DriveParams, rho1: Vec4) -> Result<Pass> {
    let rho2 = invert(&rho1);
    let cold_protocol = Protocol::double_quench(spec.t_d, spec.t_cold())?;
    let cold = driven_run_from(&cold_protocol, cold_p, spec.dephasing(), rho2)?;
    let rho4 = cold.last().state;
    let hot = driven_run_from(&Protocol::constant(0.0, spec.t_hot(), 1)?, hot_p, spec.dephasing(), rho4)?;
    let end = hot.last().state;
    Ok(Pass { states: [rho1, rho2, rho2, rho4, rho4], end, cold, hot })
}

/// Fixed point of the (linear, trace-preserving) cycle map.
fn fixed_point(spec: &CycleSpec, cold_p: &DriveParams, hot_p: &DriveParams) -> Result<Option<Vec4>> {
    let mut map = Mat4::zeros();
    for k in 0..4 {
        let mut e = Vec4::zeros();
        e[k] = C64::new(1.0, 0.0);
        map.set_column(k, &pass(spec, cold_p, hot_p, e)?.end);
    }
    let mut a = map - Mat4::identity();
    let one = C64::new(1.0, 0.0);
    a.set_row(3, &nalgebra::RowVector4::new(one, C64::new(0.0, 0.0), C64::new(0.0, 0.0), one));
    let rhs = Vec4::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), one);
    Ok(a.lu().solve(&rhs).map(|v| {
        let off = 0.5 * (v[1] + v[2].conj());
        let p = 0.5 * (v[0].re + 1.0 - v[3].re);
        Vec4::new(C64::new(p, 0.0), off, off.conj(), C64::new(1.0 - p, 0.0))
    }))
}

/// Runs the cycle at its periodic steady state and books every stroke.
pub fn run_cycle(spec: &CycleSpec) -> Result<CycleRun> {
    spec.validate()?;
    let cold_p = spec.cold_params()?;
    let hot_p = spec.hot_params()?;
    let mut rho1 = match fixed_point(spec, &cold_p, &hot_p)? {
        Some(v) if v[0].re >= -1e-12 && v[3].re >= -1e-12 => v,
        _ => hot_p.full_state(),
    };
    let mut cycles = 0;
    let mut p = pass(spec, &cold_p, &hot_p, rho1)?;
    let mut closure = qubit_trace_distance(&p.end, &rho1);
    while closure > CYCLE_TOL && cycles < MAX_CYCLES {
        rho1 = p.end;
        p = pass(spec, &cold_p, &hot_p, rho1)?;
        closure = qubit_trace_distance(&p.end, &rho1);
        cycles += 1;
    }
    let converged = closure <= CYCLE_TOL;
    if !converged {
        log::warn!("cycle not periodic after {cycles} iterations (closure {closure:.3e})");
    }

    let (wh, wc) = (spec.omega_h, spec.omega_c);
    let [r1, r2, _, r4, _] = p.states;
    let w1 = energy(0.0, wh, &r1) - energy(0.0, wh, &r2);
    let w2 = energy(0.0, wh, &r2) - energy(0.0, wc, &r2);
    let cold = p.cold.ledger();
    let w3 = -cold.work();
    let q_c = cold.q;
    let w4 = energy(0.0, wc, &r4) - energy(0.0, wh, &r4);
    let hot = p.hot.ledger();
    let w5 = -hot.work();
    let q_h = -hot.q;
    let w_net = w1 + w2 + w3 + w4 + w5;
    let coherence_max = p.cold.samples.iter().chain(&p.hot.samples).map(|s| coherence4(&s.state)).fold(0.0, f64::max);
    let ledger = CycleLedger {
        w1,
        w2,
        w3,
        w4,
        w5,
        q_h,
        q_c,
        w_net,
        eta: w_net / q_h.abs(),
        power: w_net / spec.t_cycle,
        coherence_max,
        d_e_period: energy(0.0, wh, &p.end) - energy(0.0, wh, &r1),
        converged,
        cycles,
        closure,
    };
    Ok(CycleRun { spec: *spec, ledger, states: p.states, end: p.end, cold: p.cold, hot: p.hot })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::info::{rel_entropy_coherence, thermal_state, trace_distance};
    use crate::qcore::operators::HermitianOperator;

    fn grid_point(omega_h: f64, beta_h: f64) -> CycleSpec {
        CycleSpec::new(1.0, omega_h, 10.0, beta_h, 0.5, 2.0, 20.0).unwrap()
    }

    #[test]
    fn otto_values() {
        assert_eq!(otto_efficiency(1.0, 2.0), 0.5);
        assert_eq!(otto_efficiency(1.0, 1.0), 0.0);
        assert!((otto_efficiency(1.0, 1.5) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(CycleSpec::new(1.0, 0.5, 10.0, 0.1, 0.5, 2.0, 20.0).is_err());
        assert!(CycleSpec::new(1.0, 2.0, 0.1, 1.0, 0.5, 2.0, 20.0).is_err());
        assert!(CycleSpec::new(1.0, 2.0, 10.0, 0.1, 0.5, 2.0, 0.0).is_err());
        let mut s = grid_point(2.0, 0.1);
        s.cold_fraction = 1.0;
        assert!(run_cycle(&s).is_err());
    }

    #[test]
    fn books_close() {
        for v in [Variant::Coherent, Variant::Dephased] {
            for t in [0.5, 20.0] {
                let run = run_cycle(&grid_point(2.0, 0.3).with_variant(v).with_t_cycle(t)).unwrap();
                let l = run.ledger;
                assert!(l.converged, "{v:?} {t}");
                assert!(l.energy_residual().abs() < 1e-8, "{v:?} {t}: {}", l.energy_residual());
                assert!((l.w5 - 2.0 * l.q_h).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unitary_strokes() {
        let spec = grid_point(2.0, 0.3);
        let run = run_cycle(&spec).unwrap();
        let (r2, r3) = (run.state(2).unwrap(), run.state(3).unwrap());
        assert!(trace_distance(&r2, &r3).unwrap() < 1e-12);
        assert!(trace_distance(&run.state(4).unwrap(), &run.state(5).unwrap()).unwrap() < 1e-12);
        // The inversion maps the negative-temperature state to the thermal one.
        let hh = HermitianOperator::qubit(spec.omega_h, "H_h");
        let hot_neg = thermal_state(&hh, -spec.beta_h).unwrap();
        let hot_pos = thermal_state(&hh, spec.beta_h).unwrap();
        let p = pass(
            &spec,
            &spec.cold_params().unwrap(),
            &spec.hot_params().unwrap(),
            crate::control::from_matrix(hot_neg.matrix()),
        )
        .unwrap();
        let out = DensityMatrix::from_evolved(to_matrix(&p.states[1]), vec![2]).unwrap();
        assert!(trace_distance(&out, &hot_pos).unwrap() < 1e-12);
    }

    #[test]
    fn long_cycle_closes_on_hot_steady_state() {
        let spec = grid_point(2.0, 0.5).with_t_cycle(400.0);
        let run = run_cycle(&spec).unwrap();
        let hh = HermitianOperator::qubit(spec.omega_h, "H_h");
        let target = thermal_state(&hh, -spec.beta_h).unwrap();
        assert!(trace_distance(&run.state(1).unwrap(), &target).unwrap() < 1e-6);
        let l = run.ledger;
        assert!(l.w_net > 0.0 && l.eta < otto_efficiency(1.0, 2.0));
    }

    #[test]
    fn dephased_cycle_has_no_bare_coherence() {
        // Coherence regrows between dephasing kicks, so it is only suppressed to O(cadence).
        let run = run_cycle(&grid_point(2.5, 0.3).with_variant(Variant::Dephased)).unwrap();
        let coherent = run_cycle(&grid_point(2.5, 0.3)).unwrap().ledger.coherence_max;
        assert!(coherent > 1e-2);
        assert!(run.ledger.coherence_max < 1e-3 * coherent, "{}", run.ledger.coherence_max);
        let worst = run.cold.samples.iter().chain(&run.hot.samples).map(|s| s.max_offdiag()).fold(0.0, f64::max);
        assert!(worst <= 1e-2, "{worst}");
    }

    #[test]
    fn coherence_matches_general_formula() {
        let v = Vec4::new(C64::new(0.7, 0.0), C64::new(0.2, -0.1), C64::new(0.2, 0.1), C64::new(0.3, 0.0));
        let rho = DensityMatrix::from_evolved(to_matrix(&v), vec![2]).unwrap();
        let hz = HermitianOperator::qubit(1.0, "H");
        assert!((coherence4(&v) - rel_entropy_coherence(&rho, &hz).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycle_extracts_nothing() {
        let spec = CycleSpec::new(1.0, 1.0, 1.0, 1.0, 0.5, 2.0, 400.0).unwrap();
        let l = run_cycle(&spec).unwrap().ledger;
        assert!(l.q_h.abs() < 1e-8);
        assert!(l.w_net <= 0.0);
        assert!((l.w_net + l.q_c).abs() < 1e-8);
    }
}
