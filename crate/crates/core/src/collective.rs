//! Parallel and collective charging of `N` batteries.
//!
//! Qubit ordering on the joint space is `(S_1..S_N, R_1..R_N)`. A register
//! basis state `s` is an `N`-bit integer with `S_1` as the most significant
//! bit and bit value 0 meaning excited.

use crate::collision::CollisionSpec;
use crate::error::{Error, Result};
use crate::lindblad::{liouvillian, Liouvillian};
use crate::qcore::info::{mutual_information, thermal_state};
use crate::qcore::linalg::{self, CMatrix, C64};
use crate::qcore::operators::{embed, sigma_minus, sigma_plus, sigma_z, HermitianOperator};
use crate::qcore::state::DensityMatrix;
use crate::qcore::superop::Superoperator;

/// Tolerance for the operator-norm fairness check.
pub const NORM_TOL: f64 = 1e-9;
/// Relative bracket width at which root solving stops.
pub const ROOT_TOL: f64 = 1e-10;
/// Off-diagonal magnitude below which a state counts as diagonal.
pub const DIAGONAL_TOL: f64 = 1e-10;
/// Largest register size for dense generators.
pub const DENSE_MAX_N: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryEnsembleSpec {
    pub n: usize,
    pub omega: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub delta: f64,
}

impl BatteryEnsembleSpec {
    pub fn new(n: usize, omega: f64, epsilon: f64, beta: f64, delta: f64) -> Result<Self> {
        let s = Self { n, omega, epsilon, beta, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega = {}", self.omega)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {}", self.epsilon)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta = {} must be positive", self.beta)));
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..*self }
    }

    /// Single-battery partition function `2 cosh(beta omega / 2)`.
    pub fn z1(&self) -> f64 {
        2.0 * (self.beta * self.omega / 2.0).cosh()
    }

    /// Thermal energy of the register.
    pub fn e_empty(&self) -> f64 {
        -(self.n as f64) * self.omega / 2.0 * (self.beta * self.omega / 2.0).tanh()
    }

    /// Negative-temperature energy the register relaxes to.
    pub fn e_full(&self) -> f64 {
        -self.e_empty()
    }

    pub fn target_energy(&self) -> f64 {
        self.e_full() * (1.0 - self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Parallel,
    Collective,
}

/// How the collective exchange pairs register states of complementary energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExchangePairing {
    /// `|s, s><s̄, s̄|` with `s̄` the bitwise complement: each state of level `k`
    /// exchanges with exactly one state of level `N - k`.
    Complement,
    /// Every state of level `k` paired with every state of level `N - k`.
    AllPairs,
}

/// `sum_i (omega/2) sigma_z` on `N` qubits.
pub fn register_hamiltonian(n: usize, omega: f64) -> HermitianOperator {
    let mut m = CMatrix::zeros(1 << n, 1 << n);
    for i in 0..n {
        m += embed(&sigma_z(), i, n).scale(omega / 2.0);
    }
    HermitianOperator::with_dims(m, "H_S", vec![2; n]).expect("sum of sigma_z is Hermitian")
}

/// `sum_i sigma+_{S_i} sigma+_{R_i} + h.c.` on `2N` qubits.
pub fn build_parallel_v(n: usize) -> HermitianOperator {
    let total = 2 * n;
    let mut m = CMatrix::zeros(1 << total, 1 << total);
    for i in 0..n {
        let up = embed(&sigma_plus(), i, total) * embed(&sigma_plus(), n + i, total);
        let down = embed(&sigma_minus(), i, total) * embed(&sigma_minus(), n + i, total);
        m += up + down;
    }
    HermitianOperator::with_dims(m, "V_parallel", vec![2; total]).expect("exchange sum is Hermitian")
}

/// Collective interaction with the complement pairing, norm-checked against [`build_parallel_v`].
pub fn build_collective_v(n: usize) -> Result<HermitianOperator> {
    let (v, factor) = build_collective_v_with(n, ExchangePairing::Complement)?;
    debug_assert!((factor - 1.0).abs() < NORM_TOL);
    Ok(v)
}

/// Builds the collective interaction for a given pairing. The result is
/// rescaled so its spectral norm equals the parallel one; the applied factor is
/// returned alongside (1 for the complement pairing).
pub fn build_collective_v_with(n: usize, pairing: ExchangePairing) -> Result<(HermitianOperator, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let ds = 1usize << n;
    let full = ds - 1;
    let joint = |s: usize| s * ds + s;
    let mut m = CMatrix::zeros(ds * ds, ds * ds);
    let nf = C64::new(n as f64, 0.0);
    match pairing {
        ExchangePairing::Complement => {
            for s in 0..ds {
                m[(joint(s), joint(s ^ full))] += nf;
            }
        }
        ExchangePairing::AllPairs => {
            for a in 0..ds {
                for b in 0..ds {
                    let ka = excited_count(a, n);
                    let kb = excited_count(b, n);
                    if a != b && ka + kb == n {
                        m[(joint(a), joint(b))] += nf;
                    }
                }
            }
        }
    }
    let parallel = n as f64;
    let norm = linalg::op_norm(&m);
    let factor = parallel / norm;
    let label = match pairing {
        ExchangePairing::Complement => "V_collective",
        ExchangePairing::AllPairs => "V_collective_all_pairs",
    };
    let m = m.scale(factor);
    if pairing == ExchangePairing::Complement && (factor - 1.0).abs() > NORM_TOL {
        return Err(Error::NormMismatch { collective: norm, parallel });
    }
    let check = linalg::op_norm(&m);
    if (check - parallel).abs() > NORM_TOL * parallel {
        return Err(Error::NormMismatch { collective: check, parallel });
    }
    Ok((HermitianOperator::with_dims(m, label, vec![2; 2 * n])?, factor))
}

/// Number of excited qubits in register state `s` (bit 0 means excited).
pub fn excited_count(s: usize, n: usize) -> usize {
    n - (s.count_ones() as usize)
}

/// Collision spec for the `N`-battery process, with `H_R = H_S`.
pub fn collision_spec(spec: &BatteryEnsembleSpec, process: Process, delta_t: f64) -> Result<CollisionSpec> {
    spec.validate()?;
    let h = register_hamiltonian(spec.n, spec.omega);
    let v = match process {
        Process::Parallel => build_parallel_v(spec.n),
        Process::Collective => build_collective_v(spec.n)?,
    };
    CollisionSpec::new(h.clone(), h.relabel("H_R"), v, spec.epsilon, delta_t, spec.beta)
}

/// Population dynamics of the collective process, one channel per level pair.
#[derive(Debug, Clone)]
pub struct SectorDynamics {
    pub n: usize,
    pub beta: f64,
    pub energies: Vec<f64>,
    pub degeneracies: Vec<u64>,
    pub tau: Vec<f64>,
    z_n: f64,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

pub fn sector_dynamics(spec: &BatteryEnsembleSpec) -> SectorDynamics {
    let n = spec.n;
    let eps2 = spec.epsilon * spec.epsilon;
    let z_n = spec.z1().powi(n as i32);
    let energies: Vec<f64> = (0..=n).map(|k| spec.omega * (2.0 * k as f64 - n as f64) / 2.0).collect();
    let degeneracies = (0..=n).map(|k| binomial(n, k)).collect();
    let tau = energies.iter().map(|&e| z_n / (2.0 * (spec.beta * e).cosh() * (n * n) as f64 * eps2)).collect();
    SectorDynamics { n, beta: spec.beta, energies, degeneracies, tau, z_n }
}

impl SectorDynamics {
    /// Population of a single register state of level `k` at time `t`.
    pub fn population(&self, k: usize, t: f64) -> f64 {
        let e = self.energies[k];
        let b = self.beta;
        ((-b * e).exp() - (b * e).exp()) / self.z_n * (-t / self.tau[k]).exp() + (b * e).exp() / self.z_n
    }

    pub fn populations(&self, t: f64) -> Vec<f64> {
        (0..=self.n).map(|k| self.population(k, t)).collect()
    }

    pub fn total_probability(&self, t: f64) -> f64 {
        (0..=self.n).map(|k| self.degeneracies[k] as f64 * self.population(k, t)).sum()
    }

    pub fn energy(&self, t: f64) -> f64 {
        (0..=self.n).map(|k| self.degeneracies[k] as f64 * self.population(k, t) * self.energies[k]).sum()
    }

    /// Slowest time scale among transitions that move energy.
    pub fn slowest_tau(&self) -> f64 {
        (0..=self.n).filter(|&k| self.energies[k].abs() > 0.0).map(|k| self.tau[k]).fold(0.0, f64::max)
    }

    pub fn fastest_tau(&self) -> f64 {
        self.tau.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Register energy under parallel charging.
pub fn parallel_energy(spec: &BatteryEnsembleSpec, t: f64) -> f64 {
    let eps2 = spec.epsilon * spec.epsilon;
    spec.e_full() + (spec.e_empty() - spec.e_full()) * (-eps2 * t).exp()
}

/// Smallest `t` with `energy(t) >= target`, for a non-decreasing `energy`.
pub fn first_crossing<F: FnMut(f64) -> f64>(mut energy: F, target: f64, t_guess: f64) -> Result<f64> {
    if energy(0.0) >= target {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = t_guess.max(f64::MIN_POSITIVE);
    let mut doublings = 0;
    while energy(hi) < target {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::Unreachable(format!("energy never reaches {target:.6e}")));
        }
    }
    while hi - lo > ROOT_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if energy(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_reachable(spec: &BatteryEnsembleSpec) -> Result<()> {
    spec.validate()?;
    let target = spec.target_energy();
    if !(target < spec.e_full()) {
        return Err(Error::Unreachable(format!(
            "target {target:.6e} is not below the asymptotic energy {:.6e} (delta too small)",
            spec.e_full()
        )));
    }
    Ok(())
}

/// Time to reach `E_full (1 - delta)` from the thermal state.
pub fn charge_time(spec: &BatteryEnsembleSpec, process: Process) -> Result<f64> {
    check_reachable(spec)?;
    match process {
        Process::Parallel => {
            let eps2 = spec.epsilon * spec.epsilon;
            Ok(((spec.e_full() - spec.e_empty()) / (spec.delta * spec.e_full())).ln() / eps2)
        }
        Process::Collective => {
            let sd = sector_dynamics(spec);
            first_crossing(|t| sd.energy(t), spec.target_energy(), sd.fastest_tau())
        }
    }
}

/// Register energy `tr(H_S rho(t))` from the dense generator, for `N <= 3`.
pub struct DenseEnsemble {
    pub spec: BatteryEnsembleSpec,
    pub liouvillian: Liouvillian,
    pub h_s: HermitianOperator,
    pub rho_empty: DensityMatrix,
}

impl DenseEnsemble {
    pub fn new(spec: &BatteryEnsembleSpec, process: Process) -> Result<Self> {
        if spec.n > DENSE_MAX_N {
            return Err(Error::InvalidParameter(format!("dense generator limited to N <= {DENSE_MAX_N}")));
        }
        let cs = collision_spec(spec, process, 1.0)?;
        let l = liouvillian(&cs)?;
        let rho_empty = thermal_state(&cs.h_s, spec.beta)?;
        Ok(Self { spec: *spec, h_s: cs.h_s.clone(), rho_empty, liouvillian: l })
    }

    pub fn state(&self, t: f64) -> Result<DensityMatrix> {
        crate::lindblad::propagate(&self.liouvillian, &self.rho_empty, t)
    }

    pub fn energy(&self, t: f64) -> Result<f64> {
        Ok(self.h_s.expectation(&self.state(t)?))
    }

    pub fn charge_time(&self) -> Result<f64> {
        check_reachable(&self.spec)?;
        let sd = sector_dynamics(&self.spec);
        let mut failure = None;
        let t = first_crossing(
            |t| match self.energy(t) {
                Ok(e) => e,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            },
            self.spec.target_energy(),
            sd.fastest_tau().min(1.0 / (self.spec.epsilon * self.spec.epsilon)),
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(t),
        }
    }

    pub fn energy_curve(&self, times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.energy(t)).collect()
    }
}

/// Collective advantage `T_parallel / T_collective`.
pub fn advantage(spec: &BatteryEnsembleSpec) -> Result<f64> {
    Ok(charge_time(spec, Process::Parallel)? / charge_time(spec, Process::Collective)?)
}

/// Two-battery advantage `2 (1 + tanh^2(beta omega / 2))`.
pub fn gamma_two(beta_omega: f64) -> f64 {
    2.0 * (1.0 + (beta_omega / 2.0).tanh().powi(2))
}

/// Largest mutual information between two collectively charged batteries.
pub fn mutual_info_max_closed(spec: &BatteryEnsembleSpec) -> Result<f64> {
    if spec.n != 2 {
        return Err(Error::InvalidParameter(format!("closed form needs N = 2, got {}", spec.n)));
    }
    let z = spec.z1().powi(2);
    Ok(2.0 * 2f64.ln() + ((z - 2.0) / z) * ((z - 2.0) / (2.0 * z)).ln() - (2.0 / z) * z.ln())
}

/// The same maximum written in terms of the two-battery advantage.
pub fn mutual_info_max_gamma(gamma: f64) -> f64 {
    let tail = 1.0 - gamma / 4.0;
    let tail_term = if tail > 0.0 { tail * (0.5 - gamma / 8.0).ln() } else { 0.0 };
    2.0 * 2f64.ln() + gamma / 4.0 * (gamma / 8.0).ln() + tail_term
}

/// Numerical maximum over time of the inter-battery mutual information for
/// collective charging of two batteries.
pub fn mutual_info_max_numeric(spec: &BatteryEnsembleSpec) -> Result<(f64, f64)> {
    if spec.n != 2 {
        return Err(Error::InvalidParameter(format!("N = 2 required, got {}", spec.n)));
    }
    let ens = DenseEnsemble::new(spec, Process::Collective)?;
    let info_at = |t: f64| -> Result<f64> { mutual_information(&ens.state(t)?, &[0]) };
    let t_end = 10.0 * sector_dynamics(spec).slowest_tau();
    let samples = 400;
    let mut best = (0.0, info_at(0.0)?);
    for i in 1..=samples {
        let t = t_end * i as f64 / samples as f64;
        let v = info_at(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    // Golden-section refinement around the best grid point.
    let h = t_end / samples as f64;
    let (mut a, mut b) = ((best.0 - h).max(0.0), best.0 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (info_at(c)?, info_at(d)?);
    while b - a > 1e-9 * t_end {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = info_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = info_at(d)?;
        }
    }
    let t = 0.5 * (a + b);
    let v = info_at(t)?;
    Ok(if v > best.1 { (t, v) } else { best })
}

/// Whether every state is diagonal in the stored product basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalityReport {
    pub classical: bool,
    pub max_offdiag: f64,
}

pub fn classicality_check(trajectory: &[DensityMatrix]) -> ClassicalityReport {
    let max_offdiag = trajectory.iter().map(DensityMatrix::max_offdiag).fold(0.0, f64::max);
    ClassicalityReport { classical: max_offdiag <= DIAGONAL_TOL, max_offdiag }
}

/// Advantage when the register is charged as `N / k` independent collective blocks.
pub fn partitioned_advantage(spec: &BatteryEnsembleSpec, k: usize) -> Result<f64> {
    spec.validate()?;
    if k == 0 || !spec.n.is_multiple_of(k) {
        return Err(Error::InvalidParameter(format!("block size {k} does not divide N = {}", spec.n)));
    }
    check_reachable(spec)?;
    let blocks = (spec.n / k) as f64;
    let block = sector_dynamics(&spec.with_n(k));
    let t_blocks = first_crossing(|t| blocks * block.energy(t), spec.target_energy(), block.fastest_tau())?;
    Ok(charge_time(spec, Process::Parallel)? / t_blocks)
}

/// Collective generator built from the sector rates, for states diagonal in
/// the register basis (used to cross-check the dense generator).
pub fn sector_rate_generator(spec: &BatteryEnsembleSpec) -> Superoperator {
    let n = spec.n;
    let ds = 1usize << n;
    let full = ds - 1;
    let z_n = spec.z1().powi(n as i32);
    let rate = (n * n) as f64 * spec.epsilon * spec.epsilon;
    Superoperator::from_map(ds, |unit| {
        let mut out = CMatrix::zeros(ds, ds);
        for s in 0..ds {
            let e = spec.omega * (2.0 * excited_count(s, n) as f64 - n as f64) / 2.0;
            // Population leaves s at the ancilla weight of its complement.
            let w = (-spec.beta * e).exp() / z_n;
            let p = unit[(s, s)];
            out[(s, s)] -= p * rate * w;
            out[(s ^ full, s ^ full)] += p * rate * w;
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{steady_states, verify_h0};
    use crate::qcore::info::trace_distance;
    use crate::qcore::operators::sigma_x;

    fn spec(n: usize, beta_omega: f64) -> BatteryEnsembleSpec {
        BatteryEnsembleSpec::new(n, 1.5, 0.5, beta_omega / 1.5, 0.01).unwrap()
    }

    #[test]
    fn two_battery_collective_is_literal_pauli_form() {
        let total = 4;
        let sp = |i| embed(&sigma_plus(), i, total);
        let sm = |i| embed(&sigma_minus(), i, total);
        // Sites: S1 = 0, S2 = 1, R1 = 2, R2 = 3.
        let a = &sp(0) * &sp(2) * &sp(1) * &sp(3);
        let b = &sp(0) * &sp(2) * &sm(1) * &sm(3);
        let literal = (&a + &b + a.adjoint() + b.adjoint()).scale(2.0);
        let built = build_collective_v(2).unwrap();
        assert!(linalg::max_abs(&(built.matrix() - literal)) < 1e-15);
    }

    #[test]
    fn single_battery_forms_coincide() {
        let c = build_collective_v(1).unwrap();
        let p = build_parallel_v(1);
        assert!(linalg::max_abs(&(c.matrix() - p.matrix())) < 1e-15);
    }

    #[test]
    fn norms_match_parallel() {
        for n in 1..=3 {
            let c = build_collective_v(n).unwrap();
            let p = build_parallel_v(n);
            assert!((linalg::op_norm(c.matrix()) - linalg::op_norm(p.matrix())).abs() < 1e-9);
        }
    }

    #[test]
    fn all_pairs_needs_rescaling() {
        let (_, f2) = build_collective_v_with(2, ExchangePairing::AllPairs).unwrap();
        assert!((f2 - 1.0).abs() < 1e-12);
        let (_, f3) = build_collective_v_with(3, ExchangePairing::AllPairs).unwrap();
        assert!((f3 - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn energy_conserving_h0() {
        for n in 2..=3 {
            let h = register_hamiltonian(n, 1.5);
            let (a, b) = verify_h0(&h, &h, &build_collective_v(n).unwrap(), &h.scaled(-1.0)).unwrap();
            assert!(a < 1e-10 && b < 1e-10);
            let (a, b) = verify_h0(&h, &h, &build_parallel_v(n), &h.scaled(-1.0)).unwrap();
            assert!(a < 1e-10 && b < 1e-10);
        }
    }

    #[test]
    fn sector_dynamics_endpoints_and_symmetry() {
        let s = spec(4, 2.0);
        let sd = sector_dynamics(&s);
        assert!((sd.energy(0.0) - s.e_empty()).abs() < 1e-12);
        assert!((sd.energy(1e6) - s.e_full()).abs() < 1e-12);
        for k in 0..=4 {
            assert!((sd.tau[k] - sd.tau[4 - k]).abs() < 1e-12 * sd.tau[k]);
            assert_eq!(sd.degeneracies[k], sd.degeneracies[4 - k]);
        }
        for t in [0.0, 0.1, 1.0, 10.0] {
            assert!((sd.total_probability(t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_battery_time_scale() {
        let s = spec(2, 3.0);
        let sd = sector_dynamics(&s);
        let eps2 = s.epsilon * s.epsilon;
        let want = 1.0 / (2.0 * eps2 * (1.0 + (s.beta * s.omega / 2.0).tanh().powi(2)));
        assert!((sd.tau[0] - want).abs() < 1e-12 * want);
    }

    #[test]
    fn gamma_two_batteries() {
        assert!((gamma_two(0.0) - 2.0).abs() < 1e-15);
        for bw in [0.1, 1.0, 3.0, 10.0] {
            let g = advantage(&spec(2, bw)).unwrap();
            assert!((g - gamma_two(bw)).abs() < 1e-8 * g, "bw {bw}: {g}");
        }
    }

    #[test]
    fn parallel_closed_form_matches_root() {
        let s = spec(3, 2.0);
        let t = charge_time(&s, Process::Parallel).unwrap();
        let r = first_crossing(|t| parallel_energy(&s, t), s.target_energy(), 0.1).unwrap();
        assert!((t - r).abs() < 1e-8 * t);
    }

    #[test]
    fn sector_matches_dense_for_three() {
        let s = spec(3, 10.0);
        let dense = DenseEnsemble::new(&s, Process::Collective).unwrap();
        let sd = sector_dynamics(&s);
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
        let curve = dense.energy_curve(&times).unwrap();
        for (t, e) in times.iter().zip(curve) {
            assert!((e - sd.energy(*t)).abs() < 1e-9, "t = {t}");
            assert!((dense.energy(*t).unwrap() - sd.energy(*t)).abs() < 1e-9);
        }
    }

    #[test]
    fn rate_generator_agrees_on_diagonal_states() {
        let s = spec(2, 1.0);
        let cs = collision_spec(&s, Process::Collective, 1.0).unwrap();
        let l = liouvillian(&cs).unwrap();
        let r = sector_rate_generator(&s);
        let rho = thermal_state(&cs.h_s, s.beta).unwrap();
        let a = l.generator().apply(rho.matrix());
        let b = r.apply(rho.matrix());
        assert!(linalg::max_abs(&(a - b)) < 1e-12);
    }

    #[test]
    fn collective_kernel_is_degenerate() {
        let s = spec(2, 1.0);
        let ens = DenseEnsemble::new(&s, Process::Collective).unwrap();
        let ss = steady_states(&ens.liouvillian).unwrap();
        assert!(!ss.unique);
        // Thermal start still reaches the product of inverted thermals.
        let h1 = HermitianOperator::qubit(s.omega, "H");
        let inv = thermal_state(&h1, -s.beta).unwrap();
        let full = inv.kron(&inv);
        let late = ens.state(200.0).unwrap();
        assert!(trace_distance(&late, &full).unwrap() < 1e-9);
    }

    #[test]
    fn mutual_information_closed_forms() {
        let s = spec(2, 0.0001);
        let z = mutual_info_max_closed(&s).unwrap();
        assert!(z.abs() < 1e-6);
        assert!(mutual_info_max_gamma(2.0).abs() < 1e-15);
        assert!((mutual_info_max_gamma(4.0) - 2f64.ln()).abs() < 1e-15);
        for bw in [0.5, 2.0, 5.0] {
            let s = spec(2, bw);
            let a = mutual_info_max_closed(&s).unwrap();
            let b = mutual_info_max_gamma(gamma_two(bw));
            assert!((a - b).abs() < 1e-12);
        }
        assert!(mutual_info_max_closed(&spec(3, 1.0)).is_err());
    }

    #[test]
    fn classicality() {
        let s = spec(2, 2.0);
        let ens = DenseEnsemble::new(&s, Process::Collective).unwrap();
        let traj: Vec<DensityMatrix> = (0..10).map(|i| ens.state(i as f64 * 0.3).unwrap()).collect();
        assert!(classicality_check(&traj).classical);
        let had = linalg::kron(&sigma_x(), &linalg::identity(2)) + linalg::kron(&sigma_z(), &linalg::identity(2));
        let had = had.unscale(2f64.sqrt());
        let rotated: Vec<DensityMatrix> =
            traj.iter().map(|r| DensityMatrix::new(&had * r.matrix() * had.adjoint()).unwrap()).collect();
        assert!(!classicality_check(&rotated).classical);
    }

    #[test]
    fn partitions() {
        let s = spec(4, 10.0);
        assert!((partitioned_advantage(&s, 1).unwrap() - 1.0).abs() < 1e-8);
        assert!((partitioned_advantage(&s, 4).unwrap() - advantage(&s).unwrap()).abs() < 1e-8);
        let two = advantage(&spec(2, 10.0)).unwrap();
        assert!((partitioned_advantage(&s, 2).unwrap() - two).abs() < 1e-6);
        assert!(partitioned_advantage(&s, 3).is_err());
    }

    #[test]
    fn unreachable_target() {
        let mut s = spec(2, 1.0);
        s.delta = 1e-18;
        assert!(matches!(charge_time(&s, Process::Collective), Err(Error::Unreachable(_))));
    }
}
