// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{PointId, SystemId};
use crate::quantum::QuantumChannel;

/// One primitive action of a teleportation protocol.
///
/// `key` is a protocol-wide identifier of a teleportation event. A decrypt
/// step undoes the newest layer on each listed system whose key was made at
/// `key_point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    /// Apply the channel of point `source` at point `at`.
    ApplyChannel { at: PointId, source: PointId, channel: QuantumChannel },
    NormalTeleport { systems: Vec<SystemId>, from: PointId, to: PointId, key: u64 },
    PortTeleport { systems: Vec<SystemId>, from: PointId, to: PointId, key: u64 },
    NormalDecrypt { systems: Vec<SystemId>, at: PointId, key_point: PointId },
    PortDecrypt { systems: Vec<SystemId>, at: PointId, key_point: PointId },
    /// Bookkeeping only: the listed systems are from now on handled as one unit.
    Merge { systems: Vec<SystemId>, at: PointId },
    SendPlain { systems: Vec<SystemId>, from: PointId, to: PointId },
    EmitOutput { systems: Vec<SystemId>, at: PointId },
}

impl Step {
    /// The point whose agent performs the step.
    pub fn actor(&self) -> &PointId {
        match self {
            Step::ApplyChannel { at, .. }
            | Step::NormalDecrypt { at, .. }
            | Step::PortDecrypt { at, .. }
            | Step::Merge { at, .. }
            | Step::EmitOutput { at, .. } => at,
            Step::NormalTeleport { from, .. } | Step::PortTeleport { from, .. } | Step::SendPlain { from, .. } => from,
        }
    }

    /// A classical or quantum signal this step needs from another point,
    /// as `(source, destination)`.
    pub fn signal(&self) -> Option<(&PointId, &PointId)> {
        match self {
            Step::SendPlain { from, to, .. } => Some((from, to)),
            Step::NormalDecrypt { at, key_point, .. } | Step::PortDecrypt { at, key_point, .. } if key_point != at => {
                Some((key_point, at))
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Step::ApplyChannel { .. } => "apply_channel",
            Step::NormalTeleport { .. } => "normal_teleport",
            Step::PortTeleport { .. } => "port_teleport",
            Step::NormalDecrypt { .. } => "normal_decrypt",
            Step::PortDecrypt { .. } => "port_decrypt",
            Step::Merge { .. } => "merge",
            Step::SendPlain { .. } => "send_plain",
            Step::EmitOutput { .. } => "emit_output",
        }
    }
}

/// A step together with its position in the global protocol order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub seq: u64,
    #[serde(flatten)]
    pub step: Step,
}
