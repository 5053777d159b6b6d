//! Linear algebra and quantum-information primitives.

pub mod info;
pub mod linalg;
pub mod operators;
pub mod state;
pub mod superop;

pub use info::{
    ergotropy, mutual_information, partial_trace, rel_entropy_coherence, thermal_state, trace_distance, vn_entropy,
};
pub use linalg::{kron, matrix_exp, CMatrix, SpectralDecomposition, C64};
pub use operators::HermitianOperator;
pub use state::DensityMatrix;
pub use superop::Superoperator;
