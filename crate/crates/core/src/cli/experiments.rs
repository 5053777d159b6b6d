use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::params::{optional, required, Kind, ParamSpec, Resolved};
use crate::collective::{charge_time, BatteryEnsembleSpec, Process};
use crate::control::{
    charge_with, driven_run, optimize_protocol_with, Dephasing, DriveParams, OptimizerConfig, Protocol,
};
use crate::engine::{cycle_grid, finite_time_sweep, spearman, CycleSpec};
use crate::error::Result;

/// Driven-run ledgers must close to this.
const LEDGER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CollectiveAdvantage,
    AdvantageVsBeta,
    ChargeSingle,
    OptimizeProtocol,
    DephasingSweep,
    CycleSweep,
    FiniteTimeCycle,
    CoherenceCorrelation,
}

const ENSEMBLE: &[ParamSpec] = &[
    required("epsilon", Kind::Real),
    required("omega", Kind::Real),
    optional("delta", Kind::Real, "0.01").within(0.0, 1.0),
    required("beta", Kind::RealList).non_negative(),
    required("n", Kind::IntList),
];

const CHARGE: &[ParamSpec] = &[
    required("omega", Kind::Real),
    required("epsilon", Kind::Real),
    required("beta", Kind::Real),
    required("t_d", Kind::Real).non_negative(),
    required("t_final", Kind::Real),
    optional("protocol", Kind::Text, "\"double-quench\""),
    optional("p", Kind::Real, "0.0").non_negative().within(0.0, 1.0),
    optional("stride", Kind::Int, "10"),
];

const OPTIMIZE: &[ParamSpec] = &[
    required("omega", Kind::Real),
    required("epsilon", Kind::Real),
    required("beta", Kind::Real),
    required("t_n", Kind::Real),
    optional("n_segments", Kind::Int, "100"),
    optional("zeta", Kind::Real, "0.5"),
    optional("restarts", Kind::Int, "10"),
    optional("max_iter", Kind::Int, "100000"),
    optional("tol", Kind::Real, "1e-6"),
    optional("fd_step", Kind::Real, "1e-6"),
];

const DEPHASING: &[ParamSpec] = &[
    required("omega", Kind::Real),
    required("epsilon", Kind::Real),
    required("beta", Kind::Real),
    required("t_d", Kind::Real).non_negative(),
    optional("delta", Kind::Real, "0.01").within(0.0, 1.0),
    required("p", Kind::RealList).non_negative().within(0.0, 1.0),
];

const GRID: &[ParamSpec] = &[
    required("omega_c", Kind::Real),
    required("beta_c", Kind::Real),
    required("epsilon", Kind::Real),
    required("t_d", Kind::Real).non_negative(),
    required("t_cycle", Kind::Real),
    required("omega_h", Kind::RealList),
    required("beta_h", Kind::RealList),
    optional("dephasing_p", Kind::Real, "1.0").non_negative().within(0.0, 1.0),
    optional("cold_fraction", Kind::Real, "0.5").within(0.0, 1.0),
];

const FINITE: &[ParamSpec] = &[
    required("omega_c", Kind::Real),
    required("omega_h", Kind::Real),
    required("beta_c", Kind::Real),
    required("beta_h", Kind::Real),
    required("epsilon", Kind::Real),
    required("t_d", Kind::Real).non_negative(),
    required("t_cycle", Kind::RealList),
    optional("dephasing_p", Kind::Real, "1.0").non_negative().within(0.0, 1.0),
    optional("cold_fraction", Kind::Real, "0.5").within(0.0, 1.0),
];

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::CollectiveAdvantage,
        Experiment::AdvantageVsBeta,
        Experiment::ChargeSingle,
        Experiment::OptimizeProtocol,
        Experiment::DephasingSweep,
        Experiment::CycleSweep,
        Experiment::FiniteTimeCycle,
        Experiment::CoherenceCorrelation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::CollectiveAdvantage => "collective-advantage",
            Experiment::AdvantageVsBeta => "advantage-vs-beta",
            Experiment::ChargeSingle => "charge-single",
            Experiment::OptimizeProtocol => "optimize-protocol",
            Experiment::DephasingSweep => "dephasing-sweep",
            Experiment::CycleSweep => "cycle-sweep",
            Experiment::FiniteTimeCycle => "finite-time-cycle",
            Experiment::CoherenceCorrelation => "coherence-correlation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Plot recipe that consumes this experiment's CSV.
    pub fn figure(&self) -> &'static str {
        match self {
            Experiment::CollectiveAdvantage => "fig2",
            Experiment::AdvantageVsBeta => "fig3",
            Experiment::ChargeSingle | Experiment::OptimizeProtocol => "fig4",
            Experiment::DephasingSweep => "fig5",
            Experiment::CycleSweep => "fig7",
            Experiment::FiniteTimeCycle => "fig8",
            Experiment::CoherenceCorrelation => "fig7-coherence",
        }
    }

    pub fn summary(&self) -> &'static str {
        match self {
            Experiment::CollectiveAdvantage => "charge times and advantage of collective over parallel charging vs N",
            Experiment::AdvantageVsBeta => "collective advantage vs inverse temperature",
            Experiment::ChargeSingle => "time trace of a driven single-battery charge",
            Experiment::OptimizeProtocol => "gradient-ascent drive protocol with restarts",
            Experiment::DephasingSweep => "double-quench charging under dephasing noise",
            Experiment::CycleSweep => "engine efficiency and power over hot-bath gap and temperature",
            Experiment::FiniteTimeCycle => "engine limit cycles vs cycle duration",
            Experiment::CoherenceCorrelation => "maximum coherence vs coherent power gain of the engine",
        }
    }

    pub fn params(&self) -> &'static [ParamSpec] {
        match self {
            Experiment::CollectiveAdvantage | Experiment::AdvantageVsBeta => ENSEMBLE,
            Experiment::ChargeSingle => CHARGE,
            Experiment::OptimizeProtocol => OPTIMIZE,
            Experiment::DephasingSweep => DEPHASING,
            Experiment::CycleSweep | Experiment::CoherenceCorrelation => GRID,
            Experiment::FiniteTimeCycle => FINITE,
        }
    }

    pub fn header(&self) -> &'static [&'static str] {
        match self {
            Experiment::CollectiveAdvantage | Experiment::AdvantageVsBeta => {
                &["N", "beta", "omega", "epsilon", "delta", "T_parallel", "T_collective", "gamma"]
            }
            Experiment::ChargeSingle => &["t", "E_frac", "coherence", "W", "Q", "eta_heat", "eta_ergo"],
            Experiment::OptimizeProtocol => &["k", "t", "dt", "alpha"],
            Experiment::DephasingSweep => {
                &["p", "t_charge", "power", "eta_heat", "eta_ergo", "power_ratio", "eta_ratio"]
            }
            Experiment::CycleSweep => {
                &["omega_h", "beta_h", "variant", "eta", "power", "C_max", "W1", "W2", "W4", "W5", "Qh", "Qc"]
            }
            Experiment::FiniteTimeCycle => &["t_cycle", "variant", "eta", "power", "converged"],
            Experiment::CoherenceCorrelation => &["omega_h", "beta_h", "C_max", "power_gap"],
        }
    }

    pub(crate) fn run(&self, p: &Resolved, seed: u64) -> Result<Outcome> {
        match self {
            Experiment::CollectiveAdvantage | Experiment::AdvantageVsBeta => ensemble(p),
            Experiment::ChargeSingle => charge_single(p),
            Experiment::OptimizeProtocol => optimize(p, seed),
            Experiment::DephasingSweep => dephasing_sweep(p),
            Experiment::CycleSweep => cycle_sweep(p),
            Experiment::FiniteTimeCycle => finite_time(p),
            Experiment::CoherenceCorrelation => coherence(p),
        }
    }
}

/// Rows and diagnostics of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Outcome {
    pub rows: Vec<Vec<String>>,
    pub converged: bool,
    pub diagnostics: Value,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn ensemble(p: &Resolved) -> Result<Outcome> {
    let (eps, omega, delta) = (p.real("epsilon"), p.real("omega"), p.real("delta"));
    let mut cells = Vec::new();
    for n in p.ints("n") {
        for beta in p.reals("beta") {
            cells.push(BatteryEnsembleSpec::new(n, omega, eps, beta, delta)?);
        }
    }
    let rows = cells
        .par_iter()
        .map(|s| {
            let tp = charge_time(s, Process::Parallel)?;
            let tc = charge_time(s, Process::Collective)?;
            Ok(vec![s.n.to_string(), num(s.beta), num(omega), num(eps), num(delta), num(tp), num(tc), num(tp / tc)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome { rows, converged: true, diagnostics: json!({}) })
}

fn drive_params(p: &Resolved) -> Result<DriveParams> {
    DriveParams::new(p.real("omega"), p.real("epsilon"), p.real("beta"))
}

fn charge_single(p: &Resolved) -> Result<Outcome> {
    let params = drive_params(p)?;
    let (t_d, t_final) = (p.real("t_d"), p.real("t_final"));
    let protocol = match p.text("protocol") {
        "double-quench" => Protocol::double_quench(t_d, t_final)?,
        "constant" => Protocol::constant(0.0, t_final, 1)?,
        other => {
            return Err(crate::Error::Config(format!(
                "`protocol` must be \"double-quench\" or \"constant\", got \"{other}\""
            )))
        }
    };
    let run = driven_run(&protocol, &params, Dephasing::new(p.real("p")))?;
    let stride = p.int("stride").max(1) as usize;
    let last = run.samples.len() - 1;
    let rows = run
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| k % stride == 0 || *k == last)
        .map(|(_, s)| {
            let l = s.ledger;
            let w = l.work();
            vec![
                num(s.t),
                num(run.energy_fraction(s)),
                num(s.coherence()),
                num(w),
                num(l.q),
                num(l.d_e / w),
                num(l.ergotropy_final / w),
            ]
        })
        .collect();
    let residual = run.max_first_law_residual();
    Ok(Outcome {
        rows,
        converged: residual <= LEDGER_TOL,
        diagnostics: json!({ "max_first_law_residual": residual, "samples": run.samples.len() }),
    })
}

fn optimize(p: &Resolved, seed: u64) -> Result<Outcome> {
    let params = drive_params(p)?;
    let config = OptimizerConfig {
        n_segments: p.int("n_segments") as usize,
        zeta: p.real("zeta"),
        max_iter: p.int("max_iter") as usize,
        tol: p.real("tol"),
        fd_step: p.real("fd_step"),
        restarts: p.int("restarts") as usize,
    };
    let report = optimize_protocol_with(p.real("t_n"), &params, &config, seed)?;
    let mut t = 0.0;
    let rows = report
        .best
        .protocol
        .segments
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let row = vec![k.to_string(), num(t), num(s.dt), num(s.alpha)];
            t += s.dt;
            row
        })
        .collect();
    let runs: Vec<Value> = report
        .runs
        .iter()
        .map(|r| {
            json!({
                "seed": r.seed,
                "objective": r.objective,
                "iterations": r.iterations,
                "converged": r.converged,
                "max_gradient": r.max_gradient,
                "switch_time": r.protocol.switch_time(),
            })
        })
        .collect();
    Ok(Outcome {
        rows,
        converged: report.all_converged(),
        diagnostics: json!({
            "best_objective": report.best.objective,
            "switch_time": report.best.protocol.switch_time(),
            "restarts": runs,
        }),
    })
}

fn dephasing_sweep(p: &Resolved) -> Result<Outcome> {
    let params = drive_params(p)?;
    let (t_d, delta) = (p.real("t_d"), p.real("delta"));
    let (_, idle) = charge_with(&Protocol::default(), &params, Dephasing::NONE, delta)?;
    let protocol = Protocol::double_quench(t_d, t_d)?;
    let ps = p.reals("p");
    let results = ps
        .par_iter()
        .map(|&pp| {
            let (run, m) = charge_with(&protocol, &params, Dephasing::new(pp), delta)?;
            Ok((pp, m, run.max_first_law_residual()))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let rows = results
        .iter()
        .map(|(pp, m, _)| {
            vec![
                num(*pp),
                num(m.t_charge),
                num(m.power),
                num(m.eta_heat),
                num(m.eta_ergo),
                num(m.power / idle.power),
                num(m.eta_ergo / idle.eta_ergo),
            ]
        })
        .collect();
    Ok(Outcome {
        rows,
        converged: worst <= LEDGER_TOL,
        diagnostics: json!({
            "constant_power": idle.power,
            "constant_eta_ergo": idle.eta_ergo,
            "max_first_law_residual": worst,
        }),
    })
}

fn grid_base(p: &Resolved) -> Result<CycleSpec> {
    let hs = p.reals("omega_h");
    let bs = p.reals("beta_h");
    let mut s = CycleSpec::new(
        p.real("omega_c"),
        hs[0],
        p.real("beta_c"),
        bs[0],
        p.real("epsilon"),
        p.real("t_d"),
        p.real("t_cycle"),
    )?;
    s.dephasing_p = p.real("dephasing_p");
    s.cold_fraction = p.real("cold_fraction");
    s.validate()?;
    Ok(s)
}

fn cycle_sweep(p: &Resolved) -> Result<Outcome> {
    let base = grid_base(p)?;
    let rows = cycle_grid(&base, &p.reals("omega_h"), &p.reals("beta_h"))?;
    let converged = rows.iter().all(|r| r.ledger.converged && r.ledger.energy_residual().abs() <= LEDGER_TOL);
    let worst = rows.iter().map(|r| r.ledger.energy_residual().abs()).fold(0.0, f64::max);
    let out = rows
        .iter()
        .map(|r| {
            let l = &r.ledger;
            vec![
                num(r.omega_h),
                num(r.beta_h),
                r.variant.as_str().to_string(),
                num(l.eta),
                num(l.power),
                num(l.coherence_max),
                num(l.w1),
                num(l.w2),
                num(l.w4),
                num(l.w5),
                num(l.q_h),
                num(l.q_c),
            ]
        })
        .collect();
    Ok(Outcome { rows: out, converged, diagnostics: json!({ "max_energy_residual": worst }) })
}

fn finite_time(p: &Resolved) -> Result<Outcome> {
    let mut base = CycleSpec::new(
        p.real("omega_c"),
        p.real("omega_h"),
        p.real("beta_c"),
        p.real("beta_h"),
        p.real("epsilon"),
        p.real("t_d"),
        1.0,
    )?;
    base.dephasing_p = p.real("dephasing_p");
    base.cold_fraction = p.real("cold_fraction");
    base.validate()?;
    let table = finite_time_sweep(&base, &p.reals("t_cycle"))?;
    let converged = table.rows.iter().all(|r| r.ledger.converged);
    let rows = table
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.t_cycle),
                r.variant.as_str().to_string(),
                num(r.ledger.eta),
                num(r.ledger.power),
                r.ledger.converged.to_string(),
            ]
        })
        .collect();
    Ok(Outcome { rows, converged, diagnostics: json!({ "coherent_only": table.coherent_only }) })
}

fn coherence(p: &Resolved) -> Result<Outcome> {
    let base = grid_base(p)?;
    let grid = cycle_grid(&base, &p.reals("omega_h"), &p.reals("beta_h"))?;
    let converged = grid.iter().all(|r| r.ledger.converged);
    let mut rows = Vec::new();
    let (mut c, mut gap) = (Vec::new(), Vec::new());
    for pair in grid.chunks(2) {
        let (coh, deph) = (&pair[0], &pair[1]);
        let g = coh.ledger.power - deph.ledger.power;
        rows.push(vec![num(coh.omega_h), num(coh.beta_h), num(coh.ledger.coherence_max), num(g)]);
        c.push(coh.ledger.coherence_max);
        gap.push(g);
    }
    Ok(Outcome { rows, converged, diagnostics: json!({ "spearman": spearman(&c, &gap) }) })
}
