//! Closed-form heats and efficiency for long cycles.

use std::f64::consts::PI;

use super::cycle::CycleSpec;
use crate::error::{Error, Result};

/// Largest `eps^2 / omega_c` accepted by the weak-coupling forms.
pub const WEAK_LIMIT: f64 = 0.3;
/// Above this ratio the weak-coupling forms log a warning.
pub const WEAK_WARN: f64 = 0.1;

/// Excited population of the thermal state at `beta` for gap `omega`.
fn excited(omega: f64, beta: f64) -> f64 {
    1.0 / (1.0 + (beta * omega).exp())
}

/// Excited population entering the cold stroke (thermal at the hot temperature).
pub fn initial_excited(spec: &CycleSpec) -> f64 {
    excited(spec.omega_h, spec.beta_h)
}

/// Excited population of the cold negative-temperature steady state.
pub fn cold_target(spec: &CycleSpec) -> f64 {
    excited(spec.omega_c, -spec.beta_c)
}

/// Heat drawn from the hot bath per long cycle.
pub fn analytic_qh(spec: &CycleSpec) -> f64 {
    spec.omega_h / 2.0 * ((spec.beta_c * spec.omega_c / 2.0).tanh() - (spec.beta_h * spec.omega_h / 2.0).tanh())
}

/// Damped Rabi solution of the excited population under `alpha = 1`:
/// `offset + exp(-a t) (b cos(w t) + c sin(w t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiRelaxation {
    pub decay: f64,
    pub frequency: f64,
    pub offset: f64,
    pub b: f64,
    pub c: f64,
}

impl RabiRelaxation {
    pub fn new(spec: &CycleSpec) -> Result<Self> {
        spec.validate()?;
        let (w, e2) = (spec.omega_c, spec.epsilon * spec.epsilon);
        let e4 = e2 * e2;
        let disc = w * w - e4 / 64.0;
        if !(disc > 0.0) {
            return Err(Error::UnsupportedRegime(format!("overdamped drive: omega_c^2 - eps^4/64 = {disc}")));
        }
        let frequency = disc.sqrt();
        let decay = 3.0 * e2 / 8.0;
        let target = cold_target(spec);
        let offset = (4.0 * w * w + e4 * target) / (8.0 * w * w + e4);
        let p0 = initial_excited(spec);
        let b = p0 - offset;
        let c = (e2 / 2.0 * (target - p0) + decay * b) / frequency;
        Ok(Self { decay, frequency, offset, b, c })
    }

    pub fn at(&self, t: f64) -> f64 {
        let (s, c) = (self.frequency * t).sin_cos();
        self.offset + (-self.decay * t).exp() * (self.b * c + self.c * s)
    }

    /// Form without the sine term.
    pub fn secular_at(&self, t: f64) -> f64 {
        self.offset + (-self.decay * t).exp() * self.b * (self.frequency * t).cos()
    }

    /// `int_0^t` of the excited population.
    pub fn integral(&self, t: f64) -> f64 {
        let (a, w) = (self.decay, self.frequency);
        let (s, c) = (w * t).sin_cos();
        let e = (-a * t).exp();
        let n = a * a + w * w;
        let int_cos = (a - e * (a * c - w * s)) / n;
        let int_sin = (w - e * (a * s + w * c)) / n;
        self.offset * t + self.b * int_cos + self.c * int_sin
    }
}

/// Excited population at time `t` after switching on `alpha = 1` in the cold stroke.
pub fn analytic_rho00_x(t: f64, spec: &CycleSpec) -> Result<f64> {
    Ok(RabiRelaxation::new(spec)?.at(t))
}

pub fn rho00_x_secular(t: f64, spec: &CycleSpec) -> Result<f64> {
    Ok(RabiRelaxation::new(spec)?.secular_at(t))
}

/// Heat released into the cold bath during a long cold stroke with switch time `t_d`.
pub fn analytic_qc_full(spec: &CycleSpec) -> Result<f64> {
    let r = RabiRelaxation::new(spec)?;
    let target = cold_target(spec);
    let rate = spec.epsilon * spec.epsilon / 2.0;
    let driven = rate * (target * spec.t_d - r.integral(spec.t_d));
    Ok(spec.omega_c * (target - r.at(spec.t_d) + driven))
}

fn weak_regime(spec: &CycleSpec) -> Result<()> {
    spec.validate()?;
    let ratio = spec.epsilon * spec.epsilon / spec.omega_c;
    if ratio > WEAK_LIMIT {
        return Err(Error::UnsupportedRegime(format!("eps^2/omega_c = {ratio} exceeds {WEAK_LIMIT}")));
    }
    if ratio > WEAK_WARN {
        log::warn!("weak-coupling forms used at eps^2/omega_c = {ratio}");
    }
    Ok(())
}

/// First-order cold heat for a switch at half a Rabi period, `t_d = pi / omega_c`.
pub fn analytic_qc_weak(spec: &CycleSpec) -> Result<f64> {
    weak_regime(spec)?;
    let (p0, target) = (initial_excited(spec), cold_target(spec));
    let e2 = spec.epsilon * spec.epsilon;
    Ok(spec.omega_c * (target - (1.0 - p0)) - PI * e2 * (6.0 * p0 - 8.0 * target + 1.0) / 16.0)
}

pub fn efficiency_weak(spec: &CycleSpec) -> Result<f64> {
    let qc = analytic_qc_weak(spec)?;
    Ok(1.0 - qc / analytic_qh(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{Dephasing, DriveParams, Protocol};
    use crate::engine::cycle::{otto_efficiency, run_cycle};

    fn spec(eps2: f64, t_d: f64) -> CycleSpec {
        CycleSpec::new(1.0, 1.5, 10.0, 0.1, eps2.sqrt(), t_d, 400.0).unwrap()
    }

    #[test]
    fn qh_values() {
        let s = spec(0.25, 2.0);
        assert!((analytic_qh(&s) - 0.75 * (5f64.tanh() - 0.075f64.tanh())).abs() < 1e-15);
        let flat = CycleSpec::new(1.0, 1.0, 2.0, 2.0, 0.5, 2.0, 10.0).unwrap();
        assert_eq!(analytic_qh(&flat), 0.0);
    }

    #[test]
    fn rabi_starts_at_initial_population() {
        let s = spec(0.25, 2.0);
        let r = RabiRelaxation::new(&s).unwrap();
        assert!((r.at(0.0) - initial_excited(&s)).abs() < 1e-15);
        assert!((r.secular_at(0.0) - initial_excited(&s)).abs() < 1e-15);
        let free = RabiRelaxation::new(&spec(0.0, 2.0)).unwrap();
        assert_eq!(free.frequency, 1.0);
        assert_eq!(free.decay, 0.0);
    }

    #[test]
    fn rabi_matches_propagation() {
        let s = spec(0.25, 2.0);
        let r = RabiRelaxation::new(&s).unwrap();
        let p = DriveParams::new(s.omega_c, s.epsilon, s.beta_c).unwrap();
        let mut rho0 = p.empty_state();
        rho0[0] = crate::qcore::linalg::C64::new(initial_excited(&s), 0.0);
        rho0[3] = crate::qcore::linalg::C64::new(1.0 - initial_excited(&s), 0.0);
        let run = crate::control::driven_run_from(&Protocol::constant(1.0, 2.0, 1).unwrap(), &p, Dephasing::NONE, rho0)
            .unwrap();
        let worst = run.samples.iter().map(|smp| (smp.excited() - r.at(smp.t)).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn integral_matches_quadrature() {
        let r = RabiRelaxation::new(&spec(0.25, 2.0)).unwrap();
        let n = 20_000;
        let h = 2.0 / n as f64;
        let trap: f64 = (0..n).map(|k| 0.5 * h * (r.at(k as f64 * h) + r.at((k + 1) as f64 * h))).sum();
        assert!((trap - r.integral(2.0)).abs() < 1e-8);
    }

    #[test]
    fn qc_matches_long_cycle() {
        let s = spec(0.25, 2.0);
        let l = run_cycle(&s).unwrap().ledger;
        assert!((analytic_qc_full(&s).unwrap() - l.q_c).abs() < 2e-3);
        assert!((analytic_qh(&s) - l.q_h).abs() < 1e-4);
    }

    #[test]
    fn qc_matches_heat_rate_quadrature() {
        let s = spec(0.25, 2.0);
        let run = run_cycle(&s).unwrap();
        let (target, rate) = (cold_target(&s), s.epsilon * s.epsilon / 2.0);
        let q_dot = |x: f64| s.omega_c * rate * (target - x);
        let quad: f64 = run
            .cold
            .samples
            .windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (q_dot(w[0].excited()) + q_dot(w[1].excited())))
            .sum();
        let full = analytic_qc_full(&s).unwrap();
        assert!(((full - quad) / full).abs() < 1e-3, "{full} vs {quad}");
    }

    #[test]
    fn weak_form_is_first_order() {
        let gap = |e2: f64| {
            let s = spec(e2, PI);
            (analytic_qc_full(&s).unwrap() - analytic_qc_weak(&s).unwrap()).abs()
        };
        for (a, b) in [(0.1, 0.05), (0.2, 0.1)] {
            let ratio = gap(a) / gap(b);
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn weak_efficiency() {
        let s = spec(0.1, PI);
        let eta = efficiency_weak(&s).unwrap();
        assert!(eta <= otto_efficiency(1.0, 1.5));
        let l = run_cycle(&s).unwrap().ledger;
        assert!((eta - l.eta).abs() <= 0.02, "{eta} vs {}", l.eta);
        let zero = spec(0.0, PI);
        assert!((efficiency_weak(&zero).unwrap() - otto_efficiency(1.0, 1.5)).abs() < 1e-12);
        assert!(analytic_qc_weak(&spec(0.5, PI)).is_err());
        assert!(cold_target(&s) - 0.5 > 0.0);
    }
}
