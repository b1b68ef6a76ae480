// SPDX-License-Identifier: Apache-2.0

//! Dense density-matrix kernel: states over named legs, Kraus channels,
//! Choi matrices and channel comparison.

mod channel;
pub mod matrix;
mod state;

use thiserror::Error;

pub use channel::{apply_channel, channel_distance, channels_equal, ChoiMatrix, QuantumChannel};
pub use matrix::CMatrix;
pub use state::{max_qubits, set_max_qubits, total_dim, total_qubits, DensityState, Leg, DEFAULT_MAX_QUBITS};

/// Tolerance for structural checks such as Kraus completeness.
pub const STRUCTURAL_TOL: f64 = 1e-9;
/// Default Choi trace-distance tolerance for channel equality.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("leg mismatch: {0}")]
    LegMismatch(String),
    #[error("leg `{0}` appears twice")]
    LegCollision(String),
    #[error("unknown leg `{0}`")]
    UnknownLeg(String),
    #[error("{requested} qubits exceed the dense-simulation cap of {cap}")]
    QubitCap { requested: u32, cap: u32 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
}
