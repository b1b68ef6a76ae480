// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{PointChannel, PointId, Role, SpacetimeCircuit, SystemId, SystemKind};
use crate::quantum::{Leg, STRUCTURAL_TOL};

/// One violated structural rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum Issue {
    DuplicatePointId { point: PointId },
    BadPoint { point: PointId, reason: String },
    UnknownPoint { point: PointId, context: String },
    SelfLoop { point: PointId },
    DuplicateEdge { from: PointId, to: PointId },
    IllegalEdgeTypePair { from: PointId, to: PointId },
    NotCausal { from: PointId, to: PointId },
    Cycle { point: PointId },
    OrphanGate { point: PointId },
    DuplicateSystemId { system: SystemId },
    ZeroQubits { system: SystemId },
    SystemRoleMismatch { system: SystemId, point: PointId },
    TransitWithoutEdge { system: SystemId },
    MissingSystem { point: PointId, kind: String },
    ExtraSystem { point: PointId, kind: String },
    AncillaStateMismatch { expected: Vec<String>, found: Vec<String> },
    AncillaStateInvalid { reason: String },
    MissingChannel { point: PointId },
    ChannelLegMismatch { point: PointId, side: String, expected: Vec<String>, found: Vec<String> },
    ChannelNotCptp { point: PointId, reason: String },
    ProgramAtGate { point: PointId },
    StepMisplaced { point: PointId, seq: u64, actor: PointId },
    SignalWithoutEdge { seq: u64, from: PointId, to: PointId },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Issue::*;
        match self {
            DuplicatePointId { point } => write!(f, "duplicate point id `{point}`"),
            BadPoint { point, reason } => write!(f, "point `{point}`: {reason}"),
            UnknownPoint { point, context } => write!(f, "unknown point `{point}` in {context}"),
            SelfLoop { point } => write!(f, "self-loop at `{point}`"),
            DuplicateEdge { from, to } => write!(f, "duplicate edge {from} -> {to}"),
            IllegalEdgeTypePair { from, to } => write!(f, "edge {from} -> {to} joins an illegal role pair"),
            NotCausal { from, to } => write!(f, "edge {from} -> {to} does not follow the causal order"),
            Cycle { point } => write!(f, "edge graph has a cycle through `{point}`"),
            OrphanGate { point } => write!(f, "gate `{point}` is not on any input-to-output path"),
            DuplicateSystemId { system } => write!(f, "duplicate system id `{system}`"),
            ZeroQubits { system } => write!(f, "system `{system}` has no qubits"),
            SystemRoleMismatch { system, point } => {
                write!(f, "system `{system}` is attached to `{point}`, which has the wrong role")
            }
            TransitWithoutEdge { system } => write!(f, "transit system `{system}` has no matching edge"),
            MissingSystem { point, kind } => write!(f, "point `{point}` lacks its {kind} system"),
            ExtraSystem { point, kind } => write!(f, "point `{point}` has more than one {kind} system"),
            AncillaStateMismatch { expected, found } => {
                write!(f, "ancilla state legs {found:?} do not match ancilla systems {expected:?}")
            }
            AncillaStateInvalid { reason } => write!(f, "ancilla state invalid: {reason}"),
            MissingChannel { point } => write!(f, "point `{point}` has no channel"),
            ChannelLegMismatch { point, side, expected, found } => {
                write!(f, "channel at `{point}`: {side} legs {found:?}, expected {expected:?}")
            }
            ChannelNotCptp { point, reason } => write!(f, "channel at `{point}` is not CPTP: {reason}"),
            ProgramAtGate { point } => write!(f, "gate `{point}` carries a program"),
            StepMisplaced { point, seq, actor } => {
                write!(f, "program of `{point}` holds step {seq} performed by `{actor}`")
            }
            SignalWithoutEdge { seq, from, to } => write!(f, "step {seq} needs a signal {from} -> {to} but there is no such edge"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&Issue) -> bool) -> bool {
        self.issues.iter().any(pred)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {issue}")?;
        }
        Ok(())
    }
}

fn legal_pair(a: Role, b: Role) -> bool {
    matches!(
        (a, b),
        (Role::Input, Role::Output) | (Role::Input, Role::Gate) | (Role::Gate, Role::Gate) | (Role::Gate, Role::Output)
    )
}

fn leg_names(legs: &[Leg]) -> Vec<String> {
    legs.iter().map(|l| format!("{}:{}", l.name, l.qubits)).collect()
}

pub(super) fn validate(c: &SpacetimeCircuit) -> ValidationReport {
    let mut issues = Vec::new();
    let mut roles: BTreeMap<&PointId, Role> = BTreeMap::new();
    for p in &c.points {
        if roles.insert(&p.id, p.role).is_some() {
            issues.push(Issue::DuplicatePointId { point: p.id.clone() });
        }
        if let Err(e) = c.spacetime.check_point(&p.at) {
            issues.push(Issue::BadPoint { point: p.id.clone(), reason: e.to_string() });
        }
    }

    check_edges(c, &roles, &mut issues);
    check_systems(c, &roles, &mut issues);
    check_ancilla_state(c, &mut issues);
    check_channels(c, &roles, &mut issues);
    ValidationReport { issues }
}

fn check_edges(c: &SpacetimeCircuit, roles: &BTreeMap<&PointId, Role>, issues: &mut Vec<Issue>) {
    let mut seen = BTreeSet::new();
    let mut edges_ok = true;
    for (a, b) in &c.edges {
        let (ra, rb) = match (roles.get(a), roles.get(b)) {
            (Some(ra), Some(rb)) => (*ra, *rb),
            _ => {
                for p in [a, b] {
                    if !roles.contains_key(p) {
                        issues.push(Issue::UnknownPoint { point: p.clone(), context: "edge".into() });
                    }
                }
                edges_ok = false;
                continue;
            }
        };
        if a == b {
            issues.push(Issue::SelfLoop { point: a.clone() });
            continue;
        }
        if !seen.insert((a, b)) {
            issues.push(Issue::DuplicateEdge { from: a.clone(), to: b.clone() });
        }
        if !legal_pair(ra, rb) {
            issues.push(Issue::IllegalEdgeTypePair { from: a.clone(), to: b.clone() });
        }
        let (pa, pb) = (c.point(a).expect("known"), c.point(b).expect("known"));
        if let Ok(false) = c.spacetime.precedes(&pa.at, &pb.at) {
            issues.push(Issue::NotCausal { from: a.clone(), to: b.clone() });
        }
    }
    if !edges_ok {
        return;
    }
    if let Err(super::CircuitError::CycleDetected(p)) = c.topological_order() {
        issues.push(Issue::Cycle { point: p });
        return;
    }
    // Directed-path clause: every gate must be reachable from an input and
    // must reach an output.
    let reach_from = |starts: Vec<&PointId>, forward: bool| -> BTreeSet<PointId> {
        let mut seen: BTreeSet<PointId> = BTreeSet::new();
        let mut stack: Vec<PointId> = starts.into_iter().cloned().collect();
        while let Some(q) = stack.pop() {
            if !seen.insert(q.clone()) {
                continue;
            }
            for (a, b) in &c.edges {
                let (src, dst) = if forward { (a, b) } else { (b, a) };
                if src == &q {
                    stack.push(dst.clone());
                }
            }
        }
        seen
    };
    let from_inputs = reach_from(c.points.iter().filter(|p| p.role == Role::Input).map(|p| &p.id).collect(), true);
    let to_outputs = reach_from(c.points.iter().filter(|p| p.role == Role::Output).map(|p| &p.id).collect(), false);
    for p in c.points.iter().filter(|p| p.role == Role::Gate) {
        if !from_inputs.contains(&p.id) || !to_outputs.contains(&p.id) {
            issues.push(Issue::OrphanGate { point: p.id.clone() });
        }
    }
}

fn check_systems(c: &SpacetimeCircuit, roles: &BTreeMap<&PointId, Role>, issues: &mut Vec<Issue>) {
    let mut ids = BTreeSet::new();
    let mut counts: BTreeMap<(PointId, &'static str), usize> = BTreeMap::new();
    let mut transit_count: BTreeMap<(&PointId, &PointId), usize> = BTreeMap::new();
    let edges: BTreeSet<(&PointId, &PointId)> = c.edges.iter().map(|(a, b)| (a, b)).collect();
    for s in &c.systems {
        if !ids.insert(&s.id) {
            issues.push(Issue::DuplicateSystemId { system: s.id.clone() });
        }
        if s.qubits == 0 {
            issues.push(Issue::ZeroQubits { system: s.id.clone() });
        }
        let attached = match &s.kind {
            SystemKind::Input { point } => Some((point, "input", Some(Role::Input))),
            SystemKind::Output { point } => Some((point, "output", Some(Role::Output))),
            SystemKind::Ancilla { point } => Some((point, "ancilla", None)),
            SystemKind::Transit { from, to } => {
                if edges.contains(&(from, to)) {
                    *transit_count.entry((from, to)).or_default() += 1;
                } else {
                    issues.push(Issue::TransitWithoutEdge { system: s.id.clone() });
                }
                None
            }
            SystemKind::Reference => None,
        };
        if let Some((point, kind, want)) = attached {
            match roles.get(point) {
                None => issues.push(Issue::UnknownPoint { point: point.clone(), context: format!("system `{}`", s.id) }),
                Some(r) if want.is_some_and(|w| w != *r) => {
                    issues.push(Issue::SystemRoleMismatch { system: s.id.clone(), point: point.clone() })
                }
                _ => *counts.entry((point.clone(), kind)).or_default() += 1,
            }
        }
    }
    for p in &c.points {
        for kind in ["input", "output"] {
            let n = counts.get(&(p.id.clone(), kind)).copied().unwrap_or(0);
            let required = matches!((kind, p.role), ("input", Role::Input) | ("output", Role::Output));
            if required && n == 0 {
                issues.push(Issue::MissingSystem { point: p.id.clone(), kind: kind.into() });
            }
            if n > 1 {
                issues.push(Issue::ExtraSystem { point: p.id.clone(), kind: kind.into() });
            }
        }
    }
    for (a, b) in &edges {
        let n = transit_count.get(&(*a, *b)).copied().unwrap_or(0);
        if n == 0 {
            issues.push(Issue::MissingSystem { point: (*a).clone(), kind: format!("transit to `{b}`") });
        } else if n > 1 {
            issues.push(Issue::ExtraSystem { point: (*a).clone(), kind: format!("transit to `{b}`") });
        }
    }
}

fn check_ancilla_state(c: &SpacetimeCircuit, issues: &mut Vec<Issue>) {
    let expected: BTreeSet<String> = c
        .systems
        .iter()
        .filter(|s| matches!(s.kind, SystemKind::Ancilla { .. }))
        .map(|s| format!("{}:{}", s.id, s.qubits))
        .collect();
    let found: BTreeSet<String> = match &c.ancilla_state {
        Some(st) => leg_names(st.legs()).into_iter().collect(),
        None => BTreeSet::new(),
    };
    if expected != found {
        issues.push(Issue::AncillaStateMismatch {
            expected: expected.into_iter().collect(),
            found: found.into_iter().collect(),
        });
    }
    if let Some(st) = &c.ancilla_state {
        if let Err(e) = st.validate(1e-10, 1e-9) {
            issues.push(Issue::AncillaStateInvalid { reason: e.to_string() });
        }
    }
}

fn check_channels(c: &SpacetimeCircuit, roles: &BTreeMap<&PointId, Role>, issues: &mut Vec<Issue>) {
    let edges: BTreeSet<(&PointId, &PointId)> = c.edges.iter().map(|(a, b)| (a, b)).collect();
    for p in c.channels.keys() {
        if !roles.contains_key(p) {
            issues.push(Issue::UnknownPoint { point: p.clone(), context: "channels".into() });
        }
    }
    for pt in &c.points {
        let Some(ch) = c.channels.get(&pt.id) else {
            issues.push(Issue::MissingChannel { point: pt.id.clone() });
            continue;
        };
        match ch {
            PointChannel::Kraus(ch) => {
                for (side, want, got) in [
                    ("input", c.s_in(&pt.id), &ch.in_legs),
                    ("output", c.s_out(&pt.id), &ch.out_legs),
                ] {
                    let want: BTreeSet<String> = want.iter().map(|s| format!("{}:{}", s.id, s.qubits)).collect();
                    let have: Vec<String> = leg_names(got);
                    let have_set: BTreeSet<String> = have.iter().cloned().collect();
                    if want != have_set || have.len() != have_set.len() {
                        issues.push(Issue::ChannelLegMismatch {
                            point: pt.id.clone(),
                            side: side.into(),
                            expected: want.into_iter().collect(),
                            found: have,
                        });
                    }
                }
                if let Err(e) = ch.validate(STRUCTURAL_TOL) {
                    issues.push(Issue::ChannelNotCptp { point: pt.id.clone(), reason: e.to_string() });
                }
            }
            PointChannel::Program { program } => {
                if pt.role == Role::Gate {
                    issues.push(Issue::ProgramAtGate { point: pt.id.clone() });
                }
                for entry in program {
                    if entry.step.actor() != &pt.id {
                        issues.push(Issue::StepMisplaced {
                            point: pt.id.clone(),
                            seq: entry.seq,
                            actor: entry.step.actor().clone(),
                        });
                    }
                    if let Some((from, to)) = entry.step.signal() {
                        if !edges.contains(&(from, to)) {
                            issues.push(Issue::SignalWithoutEdge { seq: entry.seq, from: from.clone(), to: to.clone() });
                        }
                    }
                    if let super::Step::ApplyChannel { channel, .. } = &entry.step {
                        if let Err(e) = channel.validate(STRUCTURAL_TOL) {
                            issues.push(Issue::ChannelNotCptp { point: pt.id.clone(), reason: e.to_string() });
                        }
                    }
                }
            }
        }
    }
}
