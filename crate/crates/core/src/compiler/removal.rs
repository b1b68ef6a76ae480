// SPDX-License-Identifier: Apache-2.0

//! Gate absorption and total gate removal.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::annotation::{AnnotatedSystem, KeyKind, KeyTag};
use super::render::Naming;
use super::{CompileError, Script};
use crate::circuit::{
    CircuitPoint, PointChannel, PointId, Role, ScriptEntry, SpacetimeCircuit, Step, SystemId, SystemKind, SystemLabel,
};
use crate::quantum::QuantumChannel;

/// Teleportation traffic of a compiled protocol. Counts only; nothing here
/// is optimised.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub normal_teleports: usize,
    pub port_teleports: usize,
    pub max_port_depth: usize,
    /// Bell pairs consumed by normal teleportation (one per qubit moved).
    pub bell_pairs_ideal: usize,
    /// Keys that have to be sent to another point.
    pub classical_broadcasts: usize,
}

/// Result of total gate removal.
#[derive(Debug, Clone)]
pub struct Compilation {
    pub circuit: SpacetimeCircuit,
    pub script: Script,
    pub resources: ResourceReport,
    /// Annotation states in protocol order, one rendered line per event.
    pub trace: Vec<String>,
}

struct Compiler<'a> {
    circ: &'a SpacetimeCircuit,
    naming: Naming,
    steps: Vec<Step>,
    trace: Vec<String>,
    next_key: u64,
    /// Units waiting at input points for a later gate.
    pending: Vec<AnnotatedSystem>,
    /// Units that have been sent to an output point.
    arrived: BTreeMap<PointId, Vec<AnnotatedSystem>>,
    absorbed: BTreeSet<PointId>,
    finalized: BTreeSet<PointId>,
    resources: ResourceReport,
    ancilla_owner: BTreeMap<SystemId, PointId>,
}

/// Replaces every gate point by teleportation traffic between input points
/// so that the effective channel is unchanged.
pub fn remove_all_gates(circ: &SpacetimeCircuit) -> Result<Compilation, CompileError> {
    circ.check()?;
    if circ.is_gate_free() {
        return Ok(Compilation {
            circuit: circ.clone(),
            script: Script::default(),
            resources: ResourceReport::default(),
            trace: Vec::new(),
        });
    }
    for p in &circ.points {
        if matches!(circ.channels.get(&p.id), Some(PointChannel::Program { .. })) {
            return Err(CompileError::NotKraus(p.id.clone()));
        }
    }
    let c = Compiler {
        circ,
        naming: Naming::new(circ),
        steps: Vec::new(),
        trace: Vec::new(),
        next_key: 1,
        pending: Vec::new(),
        arrived: BTreeMap::new(),
        absorbed: BTreeSet::new(),
        finalized: BTreeSet::new(),
        resources: ResourceReport::default(),
        ancilla_owner: BTreeMap::new(),
    };
    c.run()
}

impl<'a> Compiler<'a> {
    fn kraus(&self, p: &PointId) -> Result<&'a QuantumChannel, CompileError> {
        match self.circ.channels.get(p) {
            Some(PointChannel::Kraus(ch)) => Ok(ch),
            _ => Err(CompileError::NotKraus(p.clone())),
        }
    }

    fn precedes(&self, a: &PointId, b: &PointId) -> bool {
        match (self.circ.point(a), self.circ.point(b)) {
            (Some(pa), Some(pb)) => self.circ.spacetime.precedes(&pa.at, &pb.at).unwrap_or(false),
            _ => false,
        }
    }

    fn key(&mut self) -> u64 {
        let k = self.next_key;
        self.next_key += 1;
        k
    }

    fn qubits(&self, systems: &[SystemId]) -> usize {
        systems.iter().filter_map(|s| self.circ.system(s)).map(|s| s.qubits as usize).sum()
    }

    fn emit(&mut self, step: Step) {
        match &step {
            Step::NormalTeleport { systems, .. } => {
                self.resources.normal_teleports += 1;
                self.resources.bell_pairs_ideal += self.qubits(systems);
            }
            Step::PortTeleport { .. } => self.resources.port_teleports += 1,
            _ => {}
        }
        if matches!(step, Step::NormalDecrypt { .. } | Step::PortDecrypt { .. }) && step.signal().is_some() {
            self.resources.classical_broadcasts += 1;
        }
        self.steps.push(step);
    }

    fn note(&mut self, unit: &AnnotatedSystem) {
        self.resources.max_port_depth = self.resources.max_port_depth.max(unit.port_prefix.len());
        self.trace.push(self.naming.line(unit));
    }

    fn ancillas_at(&self, p: &PointId) -> Vec<SystemId> {
        self.circ
            .systems
            .iter()
            .filter(|s| matches!(&s.kind, SystemKind::Ancilla { point } if point == p))
            .map(|s| s.id.clone())
            .collect()
    }

    fn transit_dest(&self, s: &SystemId) -> Option<PointId> {
        match self.circ.system(s).map(|l| &l.kind) {
            Some(SystemKind::Transit { to, .. }) => Some(to.clone()),
            _ => None,
        }
    }

    fn run(mut self) -> Result<Compilation, CompileError> {
        for c in self.circ.inputs() {
            let ch = self.kraus(&c)?;
            for a in self.ancillas_at(&c) {
                self.ancilla_owner.insert(a, c.clone());
            }
            self.emit(Step::ApplyChannel { at: c.clone(), source: c.clone(), channel: ch.clone() });
            let outs: Vec<SystemId> = ch.out_legs.iter().map(|l| SystemId(l.name.clone())).collect();
            self.route(AnnotatedSystem::new(outs, c.clone()))?;
        }
        for r in self.circ.outputs() {
            for a in self.ancillas_at(&r) {
                self.ancilla_owner.insert(a, r.clone());
            }
        }
        self.finalize_ready()?;
        let gates = self.circ.gates();
        while self.absorbed.len() < gates.len() {
            let next = gates.iter().find(|g| {
                !self.absorbed.contains(*g)
                    && self
                        .circ
                        .in_set(g)
                        .map(|ins| ins.iter().all(|q| self.circ.role(q) == Some(Role::Input) || self.absorbed.contains(q)))
                        .unwrap_or(false)
            });
            let Some(g) = next.cloned() else {
                let stuck = gates.iter().find(|g| !self.absorbed.contains(*g)).expect("gate left");
                return Err(CompileError::CycleDetected(stuck.clone()));
            };
            self.absorb(&g)?;
            self.absorbed.insert(g);
            self.finalize_ready()?;
        }
        if let Some(r) = self.circ.outputs().into_iter().find(|r| !self.finalized.contains(r)) {
            return Err(CompileError::Internal(format!("output `{r}` never became ready")));
        }
        self.finish()
    }

    /// Sends output-bound systems of a plain unit at an input point to
    /// their outputs and keeps the rest pending.
    fn route(&mut self, unit: AnnotatedSystem) -> Result<(), CompileError> {
        let mut unit = unit;
        for r in self.circ.outputs() {
            let to_r: Vec<SystemId> =
                unit.systems().into_iter().filter(|s| self.transit_dest(s).as_ref() == Some(&r)).collect();
            if to_r.is_empty() {
                continue;
            }
            let (piece, rest) = unit.split(&to_r);
            self.emit(Step::SendPlain { systems: to_r, from: unit.location.clone(), to: r.clone() });
            let sent = piece.send(&r);
            if !sent.port_prefix.is_empty() {
                self.note(&sent);
            }
            self.arrived.entry(r).or_default().push(sent);
            unit = rest;
        }
        if !unit.parts.is_empty() {
            self.pending.push(unit);
        }
        Ok(())
    }

    fn take_pending(&mut self, wanted: &[SystemId]) -> Result<Vec<AnnotatedSystem>, CompileError> {
        let mut pieces = Vec::new();
        for s in wanted {
            if pieces.iter().any(|p: &AnnotatedSystem| p.contains(s)) {
                continue;
            }
            let idx = self
                .pending
                .iter()
                .position(|u| u.contains(s))
                .ok_or_else(|| CompileError::Internal(format!("system `{s}` is not available")))?;
            let unit = self.pending.remove(idx);
            let (taken, rest) = unit.split(wanted);
            if !rest.parts.is_empty() {
                self.pending.insert(idx, rest);
            }
            pieces.push(taken);
        }
        Ok(pieces)
    }

    fn absorb(&mut self, g: &PointId) -> Result<(), CompileError> {
        let ch = self.kraus(g)?;
        let ins: Vec<SystemId> = ch.in_legs.iter().map(|l| SystemId(l.name.clone())).collect();
        let outs: Vec<SystemId> = ch.out_legs.iter().map(|l| SystemId(l.name.clone())).collect();
        let ancillas = self.ancillas_at(g);
        let carried: Vec<SystemId> = ins.iter().filter(|s| !ancillas.contains(s)).cloned().collect();
        let roots: BTreeSet<PointId> = self.circ.roots(g)?.into_iter().collect();

        let mut pieces = self.take_pending(&carried)?;
        for piece in &pieces {
            for p in std::iter::once(piece.location.clone()).chain(piece.key_points()) {
                if !roots.contains(&p) {
                    return Err(CompileError::HypothesisViolated { gate: g.clone(), point: p });
                }
            }
        }
        let mut locations: Vec<PointId> = Vec::new();
        for piece in &pieces {
            if !locations.contains(&piece.location) {
                locations.push(piece.location.clone());
            }
        }
        let gather = locations.last().cloned().ok_or_else(|| CompileError::Internal(format!("gate `{g}` has no inputs")))?;
        for a in ancillas {
            self.ancilla_owner.insert(a.clone(), gather.clone());
            pieces.push(AnnotatedSystem::new(vec![a], gather.clone()));
        }

        // Gather everything at the last location by chained normal teleports.
        let mut unit: Option<AnnotatedSystem> = None;
        for (i, loc) in locations.iter().enumerate() {
            let mut here: Option<AnnotatedSystem> = unit.take().map(|u| {
                let key = self.key();
                self.emit(Step::NormalTeleport { systems: u.systems(), from: u.location.clone(), to: loc.clone(), key });
                u.normal_teleport(loc, key)
            });
            for piece in pieces.iter().filter(|p| &p.location == loc) {
                here = Some(match here {
                    None => piece.clone(),
                    Some(h) => h.collect(piece)?,
                });
            }
            let here = here.expect("location has a piece");
            if i > 0 {
                self.emit(Step::Merge { systems: here.systems(), at: loc.clone() });
                self.note(&here);
            }
            unit = Some(here);
        }
        let mut unit = unit.expect("at least one location");

        // Port-teleport through the key points, newest key first, removing
        // normal encryptions where their keys live.
        let mut tags: Vec<KeyTag> = unit.parts.iter().flat_map(|p| p.suffix.iter().cloned()).collect();
        tags.sort_by(|a, b| b.key.cmp(&a.key));
        tags.dedup();
        for tag in tags {
            if !unit.parts.iter().any(|p| p.suffix.contains(&tag)) {
                continue;
            }
            if tag.point != unit.location {
                let key = self.key();
                self.emit(Step::PortTeleport {
                    systems: unit.systems(),
                    from: unit.location.clone(),
                    to: tag.point.clone(),
                    key,
                });
                unit = unit.port_teleport(&tag.point, key);
                self.note(&unit);
            }
            let (next, touched) = unit.decrypt(&tag.point, KeyKind::Normal, &|a, b| self.precedes(a, b))?;
            unit = next;
            self.emit(Step::NormalDecrypt { systems: touched, at: unit.location.clone(), key_point: tag.point.clone() });
            self.note(&unit);
        }

        let at = unit.location.clone();
        self.trace.push(self.naming.channel_line(&unit, g));
        unit = unit.apply_channel(&ins, &outs)?;
        self.emit(Step::ApplyChannel { at: at.clone(), source: g.clone(), channel: ch.clone() });
        self.note(&unit);

        // Output-bound systems leave still port-encrypted; the outputs get
        // the port keys along with them.
        for r in self.circ.outputs() {
            let to_r: Vec<SystemId> =
                unit.systems().into_iter().filter(|s| self.transit_dest(s).as_ref() == Some(&r)).collect();
            if to_r.is_empty() {
                continue;
            }
            let (piece, rest) = unit.split(&to_r);
            self.emit(Step::SendPlain { systems: to_r, from: at.clone(), to: r.clone() });
            let sent = piece.send(&r);
            self.note(&sent);
            self.arrived.entry(r).or_default().push(sent);
            unit = rest;
        }

        // Systems for later gates cross back through the port keys by
        // normal teleportation, ending up normal-encrypted at the gather point.
        if !unit.parts.is_empty() {
            for tag in unit.port_prefix.clone().iter().rev() {
                let key = self.key();
                self.emit(Step::NormalTeleport {
                    systems: unit.systems(),
                    from: unit.location.clone(),
                    to: tag.point.clone(),
                    key,
                });
                unit = unit.normal_teleport(&tag.point, key);
                self.note(&unit);
                let (next, touched) = unit.decrypt(&tag.point, KeyKind::Port, &|a, b| self.precedes(a, b))?;
                unit = next;
                self.emit(Step::PortDecrypt { systems: touched, at: unit.location.clone(), key_point: tag.point.clone() });
                self.note(&unit);
            }
            self.pending.push(unit);
        }
        Ok(())
    }

    fn finalize_ready(&mut self) -> Result<(), CompileError> {
        for r in self.circ.outputs() {
            if self.finalized.contains(&r) {
                continue;
            }
            let ready = self
                .circ
                .in_set(&r)?
                .iter()
                .all(|q| self.circ.role(q) == Some(Role::Input) || self.absorbed.contains(q));
            if !ready {
                continue;
            }
            let pieces = self.arrived.remove(&r).unwrap_or_default();
            let mut unit = AnnotatedSystem::new(self.ancillas_at(&r), r.clone());
            for mut piece in pieces {
                for tag in piece.port_prefix.clone().iter().rev() {
                    let (next, touched) = piece.decrypt(&tag.point, KeyKind::Port, &|a, b| self.precedes(a, b))?;
                    piece = next;
                    self.emit(Step::PortDecrypt { systems: touched, at: r.clone(), key_point: tag.point.clone() });
                }
                unit = unit.collect(&piece)?;
            }
            if !unit.parts.is_empty() {
                self.note(&unit);
            }
            let ch = self.kraus(&r)?;
            let ins: Vec<SystemId> = ch.in_legs.iter().map(|l| SystemId(l.name.clone())).collect();
            let outs: Vec<SystemId> = ch.out_legs.iter().map(|l| SystemId(l.name.clone())).collect();
            unit = unit.apply_channel(&ins, &outs)?;
            self.emit(Step::ApplyChannel { at: r.clone(), source: r.clone(), channel: ch.clone() });
            self.emit(Step::EmitOutput { systems: outs, at: r.clone() });
            self.note(&unit);
            self.finalized.insert(r);
        }
        Ok(())
    }

    fn finish(self) -> Result<Compilation, CompileError> {
        let circ = self.circ;
        let points: Vec<CircuitPoint> = circ.points.iter().filter(|p| p.role != Role::Gate).cloned().collect();
        let mut edges: Vec<(PointId, PointId)> = Vec::new();
        let mut load: BTreeMap<(PointId, PointId), u32> = BTreeMap::new();
        for step in &self.steps {
            if let Some((a, b)) = step.signal() {
                let e = (a.clone(), b.clone());
                if !edges.contains(&e) {
                    edges.push(e.clone());
                }
                // payload qubits, or one register per delivered key
                let q = match step {
                    Step::SendPlain { systems, .. } => self.qubits(systems) as u32,
                    _ => 1,
                };
                *load.entry(e).or_default() += q;
            }
        }
        let mut systems: Vec<SystemLabel> = Vec::new();
        for s in &circ.systems {
            match &s.kind {
                SystemKind::Input { .. } | SystemKind::Output { .. } | SystemKind::Reference => systems.push(s.clone()),
                SystemKind::Ancilla { point } => {
                    let owner = self.ancilla_owner.get(&s.id).cloned().unwrap_or_else(|| point.clone());
                    systems.push(SystemLabel { id: s.id.clone(), kind: SystemKind::Ancilla { point: owner }, qubits: s.qubits });
                }
                SystemKind::Transit { .. } => {}
            }
        }
        for (a, b) in &edges {
            systems.push(SystemLabel {
                id: SystemId(format!("E':{a}->{b}")),
                kind: SystemKind::Transit { from: a.clone(), to: b.clone() },
                qubits: load[&(a.clone(), b.clone())].max(1),
            });
        }
        let mut channels: BTreeMap<PointId, PointChannel> = BTreeMap::new();
        for p in &points {
            let program: Vec<ScriptEntry> = self
                .steps
                .iter()
                .enumerate()
                .filter(|(_, s)| s.actor() == &p.id)
                .map(|(i, s)| ScriptEntry { seq: i as u64, step: s.clone() })
                .collect();
            channels.insert(p.id.clone(), PointChannel::Program { program });
        }
        let compiled = SpacetimeCircuit {
            spacetime: circ.spacetime.clone(),
            points,
            edges,
            systems,
            ancilla_state: circ.ancilla_state.clone(),
            channels,
        };
        let report = compiled.validate();
        if !report.is_valid() {
            return Err(CompileError::Internal(format!("compiled circuit is invalid:\n{report}")));
        }
        Ok(Compilation { circuit: compiled, script: Script { steps: self.steps }, resources: self.resources, trace: self.trace })
    }
}

/// The protocol of a compiled circuit in global order, rebuilt from the
/// per-point programs.
pub fn script_of(circ: &SpacetimeCircuit) -> Script {
    let mut entries: Vec<&ScriptEntry> = circ
        .channels
        .values()
        .filter_map(|c| match c {
            PointChannel::Program { program } => Some(program.iter()),
            PointChannel::Kraus(_) => None,
        })
        .flatten()
        .collect();
    entries.sort_by_key(|e| e.seq);
    Script { steps: entries.into_iter().map(|e| e.step.clone()).collect() }
}
