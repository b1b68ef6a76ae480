// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::{
    CircuitError, CircuitPoint, PointChannel, PointId, Role, SpacetimeCircuit, SystemId, SystemKind, SystemLabel,
};
use crate::geometry::{Point, Spacetime};
use crate::quantum::{CMatrix, DensityState, Leg, QuantumChannel, QuantumError};

/// Default id of the input system at `p`.
pub fn input_id(p: &str) -> SystemId {
    SystemId(format!("I:{p}"))
}

pub fn output_id(p: &str) -> SystemId {
    SystemId(format!("O:{p}"))
}

pub fn transit_id(from: &str, to: &str) -> SystemId {
    SystemId(format!("E:{from}->{to}"))
}

pub fn ancilla_id(p: &str) -> SystemId {
    SystemId(format!("R:{p}"))
}

/// Incremental construction of circuits with the default system naming.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    circ: SpacetimeCircuit,
}

impl CircuitBuilder {
    pub fn new(spacetime: Spacetime) -> Self {
        CircuitBuilder {
            circ: SpacetimeCircuit {
                spacetime,
                points: Vec::new(),
                edges: Vec::new(),
                systems: Vec::new(),
                ancilla_state: None,
                channels: BTreeMap::new(),
            },
        }
    }

    fn point(&mut self, id: &str, role: Role, at: Point) {
        self.circ.points.push(CircuitPoint { id: id.into(), role, at });
    }

    fn system(&mut self, id: SystemId, kind: SystemKind, qubits: u32) {
        self.circ.systems.push(SystemLabel { id, kind, qubits });
    }

    pub fn input(&mut self, id: &str, at: Point, qubits: u32) -> &mut Self {
        self.point(id, Role::Input, at);
        self.system(input_id(id), SystemKind::Input { point: id.into() }, qubits);
        self
    }

    pub fn gate(&mut self, id: &str, at: Point) -> &mut Self {
        self.point(id, Role::Gate, at);
        self
    }

    pub fn output(&mut self, id: &str, at: Point, qubits: u32) -> &mut Self {
        self.point(id, Role::Output, at);
        self.system(output_id(id), SystemKind::Output { point: id.into() }, qubits);
        self
    }

    pub fn edge(&mut self, from: &str, to: &str, qubits: u32) -> &mut Self {
        self.circ.edges.push((from.into(), to.into()));
        self.system(transit_id(from, to), SystemKind::Transit { from: from.into(), to: to.into() }, qubits);
        self
    }

    pub fn ancilla(&mut self, at: &str, qubits: u32) -> &mut Self {
        self.system(ancilla_id(at), SystemKind::Ancilla { point: at.into() }, qubits);
        self
    }

    /// The joint ancilla state; its legs must be the ancilla system ids.
    pub fn ancilla_state(&mut self, st: DensityState) -> &mut Self {
        self.circ.ancilla_state = Some(st);
        self
    }

    fn legs(&self, ids: &[SystemId]) -> Result<Vec<Leg>, CircuitError> {
        ids.iter()
            .map(|id| self.circ.system(id).map(SystemLabel::leg).ok_or_else(|| CircuitError::UnknownSystem(id.clone())))
            .collect()
    }

    /// Installs a Kraus channel at `p` with explicitly ordered legs.
    pub fn channel(
        &mut self,
        p: &str,
        ins: &[SystemId],
        outs: &[SystemId],
        kraus: Vec<CMatrix>,
    ) -> Result<&mut Self, CircuitError> {
        let ch = QuantumChannel::new(self.legs(ins)?, self.legs(outs)?, kraus).map_err(|e| invalid(p, e))?;
        self.circ.channels.insert(p.into(), PointChannel::Kraus(ch));
        Ok(self)
    }

    pub fn channel_obj(&mut self, p: &str, ch: QuantumChannel) -> &mut Self {
        self.circ.channels.insert(p.into(), PointChannel::Kraus(ch));
        self
    }

    /// Identity from `S_in(p)` to `S_out(p)` in their default orders.
    pub fn identity_channel(&mut self, p: &str) -> Result<&mut Self, CircuitError> {
        let pid = PointId::from(p);
        let ins: Vec<Leg> = self.circ.s_in(&pid).iter().map(|s| s.leg()).collect();
        let outs: Vec<Leg> = self.circ.s_out(&pid).iter().map(|s| s.leg()).collect();
        let ch = QuantumChannel::identity(ins, outs).map_err(|e| invalid(p, e))?;
        self.circ.channels.insert(pid, PointChannel::Kraus(ch));
        Ok(self)
    }

    pub fn current(&self) -> &SpacetimeCircuit {
        &self.circ
    }

    pub fn build(self) -> Result<SpacetimeCircuit, CircuitError> {
        self.circ.check()?;
        Ok(self.circ)
    }

    pub fn build_unchecked(self) -> SpacetimeCircuit {
        self.circ
    }
}

fn invalid(p: &str, e: QuantumError) -> CircuitError {
    CircuitError::Invalid(super::ValidationReport {
        issues: vec![super::Issue::ChannelNotCptp { point: p.into(), reason: e.to_string() }],
    })
}
