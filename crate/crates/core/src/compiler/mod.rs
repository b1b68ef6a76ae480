// SPDX-License-Identifier: Apache-2.0

//! Gate removal by teleportation, and transfer of gate-free circuits to
//! other spacetimes with the same coarse causal structure.

pub mod annotation;
mod removal;
pub mod render;
mod transfer;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitError, PointId, Step};
use crate::quantum::QuantumError;

pub use annotation::{AnnotatedSystem, AnnotationError, KeyKind, KeyTag, Part};
pub use removal::{remove_all_gates, script_of, Compilation, ResourceReport};
pub use render::{latex_point, normalize_trace_line, Naming};
pub use transfer::{relocate, transfer};

/// A teleportation protocol in global order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub steps: Vec<Step>,
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("annotation: {0}")]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("gate `{gate}` needs a key or system at `{point}`, which is not one of its roots")]
    HypothesisViolated { gate: PointId, point: PointId },
    #[error("gate `{0}` can never be absorbed (cycle)")]
    CycleDetected(PointId),
    #[error("point `{0}` must carry a Kraus channel to be compiled")]
    NotKraus(PointId),
    #[error("circuit still has gate points: {0:?}")]
    GatePointsPresent(Vec<PointId>),
    #[error("coarse causal structure differs: {0}")]
    CoarseMismatch(String),
    #[error("internal compiler error: {0}")]
    Internal(String),
}
