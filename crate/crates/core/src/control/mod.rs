//! Driven charging of a single battery.

mod driven;
mod generator;
mod optimize;
mod protocol;

pub use driven::{
    charge_metrics, charge_with, default_cadence, dephase, driven_run, propagate_protocol, ChargeMetrics, Dephasing,
    DrivenLedger, DrivenRun, DrivenSample,
};
pub use generator::{generator, h_alpha, DriveParams};
pub use optimize::{
    gradient, gradient_full_difference, objective, optimize_protocol, optimize_protocol_with, OptimizationReport,
    OptimizationRun, OptimizerConfig,
};
pub use protocol::{Protocol, Segment};

pub(crate) use driven::{coherence4, driven_run_from};
#[cfg(test)]
pub(crate) use generator::from_matrix;
pub(crate) use generator::{energy, to_matrix, Mat4, Vec4};
