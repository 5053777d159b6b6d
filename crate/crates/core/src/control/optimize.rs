use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::driven::propagator4;
use super::generator::{DriveParams, Mat4, Vec4};
use super::protocol::Protocol;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n_segments: usize,
    /// Step size. The update is `alpha_k += zeta * g_k / dt`, i.e. it follows the
    /// gradient per unit time so the same `zeta` works for any segment count.
    pub zeta: f64,
    pub max_iter: usize,
    /// Stop once the largest projected gradient component is below this.
    pub tol: f64,
    pub fd_step: f64,
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { n_segments: 100, zeta: 0.5, max_iter: 100_000, tol: 1e-6, fd_step: 1e-6, restarts: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationRun {
    pub seed: u64,
    pub protocol: Protocol,
    /// Excited population at the end of the protocol.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub best: OptimizationRun,
    pub runs: Vec<OptimizationRun>,
}

impl OptimizationReport {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.converged)
    }
}

fn segment_props(alphas: &[f64], dt: f64, params: &DriveParams) -> Vec<Mat4> {
    alphas.iter().map(|&a| propagator4(a, dt, params)).collect()
}

/// Excited population after the piecewise-constant drive, from the thermal state.
pub fn objective(alphas: &[f64], t_n: f64, params: &DriveParams) -> f64 {
    let dt = t_n / alphas.len() as f64;
    let mut v = params.empty_state();
    for &a in alphas {
        v = propagator4(a, dt, params) * v;
    }
    v[0].re
}

/// Central differences of the objective with respect to each `alpha_k`.
/// The objective is linear in each segment propagator, so only that factor is differenced.
pub fn gradient(alphas: &[f64], t_n: f64, params: &DriveParams, step: f64) -> Vec<f64> {
    let n = alphas.len();
    let dt = t_n / n as f64;
    let props = segment_props(alphas, dt, params);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(params.empty_state());
    for p in &props {
        let next = p * prefix.last().expect("non-empty");
        prefix.push(next);
    }
    // suffix[k] = e0^T P_{n-1} ... P_k
    let mut suffix = vec![Vec4::zeros().transpose(); n + 1];
    suffix[n][0] = num_complex::Complex64::new(1.0, 0.0);
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * props[k];
    }
    (0..n)
        .map(|k| {
            let a = alphas[k];
            let d = (propagator4(a + step, dt, params) - propagator4(a - step, dt, params))
                / num_complex::Complex64::new(2.0 * step, 0.0);
            (suffix[k + 1] * d * prefix[k])[(0, 0)].re
        })
        .collect()
}

/// Brute-force central differences of the whole objective.
pub fn gradient_full_difference(alphas: &[f64], t_n: f64, params: &DriveParams, step: f64) -> Vec<f64> {
    let mut work = alphas.to_vec();
    (0..alphas.len())
        .map(|k| {
            work[k] = alphas[k] + step;
            let up = objective(&work, t_n, params);
            work[k] = alphas[k] - step;
            let down = objective(&work, t_n, params);
            work[k] = alphas[k];
            (up - down) / (2.0 * step)
        })
        .collect()
}

fn projected_max(alphas: &[f64], g: &[f64]) -> f64 {
    alphas
        .iter()
        .zip(g)
        .map(|(&a, &gk)| if (a <= 0.0 && gk < 0.0) || (a >= 1.0 && gk > 0.0) { 0.0 } else { gk.abs() })
        .fold(0.0, f64::max)
}

fn ascend(t_n: f64, params: &DriveParams, config: &OptimizerConfig, seed: u64) -> OptimizationRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alphas: Vec<f64> = (0..config.n_segments).map(|_| rng.random::<f64>()).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut max_gradient = f64::INFINITY;
    let step = config.zeta * config.n_segments as f64 / t_n;
    while iterations < config.max_iter {
        let g = gradient(&alphas, t_n, params, config.fd_step);
        max_gradient = projected_max(&alphas, &g);
        if max_gradient < config.tol {
            converged = true;
            break;
        }
        for (a, gk) in alphas.iter_mut().zip(&g) {
            *a = (*a + step * gk).clamp(0.0, 1.0);
        }
        iterations += 1;
    }
    let objective = objective(&alphas, t_n, params);
    let protocol = Protocol::from_alphas(&alphas, t_n).expect("clipped alphas are valid");
    OptimizationRun { seed, protocol, objective, iterations, converged, max_gradient }
}

/// Gradient ascent on the final excited population with the default settings.
pub fn optimize_protocol(
    t_n: f64,
    n_segments: usize,
    params: &DriveParams,
    zeta: f64,
    seed: u64,
) -> Result<OptimizationReport> {
    let config = OptimizerConfig { n_segments, zeta, ..OptimizerConfig::default() };
    optimize_protocol_with(t_n, params, &config, seed)
}

pub fn optimize_protocol_with(
    t_n: f64,
    params: &DriveParams,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationReport> {
    params.validate()?;
    if config.n_segments < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 segments, got {}", config.n_segments)));
    }
    if !(t_n > 0.0) || !t_n.is_finite() {
        return Err(Error::InvalidParameter(format!("t_N = {t_n}")));
    }
    if !(config.zeta > 0.0) || config.restarts == 0 {
        return Err(Error::InvalidParameter("zeta must be positive and restarts at least 1".into()));
    }
    let seeds: Vec<u64> =
        (0..config.restarts as u64).map(|k| seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15))).collect();
    let runs: Vec<OptimizationRun> = seeds.par_iter().map(|&s| ascend(t_n, params, config, s)).collect();
    let best = runs.iter().max_by(|a, b| a.objective.total_cmp(&b.objective)).cloned().expect("at least one restart");
    Ok(OptimizationReport { best, runs })
}
