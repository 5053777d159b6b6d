//! Five-stroke engine between negative-temperature steady states.

mod analytic;
mod cycle;
mod sweep;

pub use analytic::{
    analytic_qc_full, analytic_qc_weak, analytic_qh, analytic_rho00_x, cold_target, efficiency_weak, initial_excited,
    rho00_x_secular, RabiRelaxation, WEAK_LIMIT, WEAK_WARN,
};
pub use cycle::{otto_efficiency, run_cycle, CycleLedger, CycleRun, CycleSpec, Variant, CYCLE_TOL, MAX_CYCLES};
pub use sweep::{
    coherence_power_correlation, cycle_grid, finite_time_sweep, spearman, CoherenceCorrelation, CoherencePoint,
    CycleRow, FiniteTimeTable,
};
