// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::CompileError;
use crate::circuit::{PointChannel, PointId, SpacetimeCircuit, Step, SystemKind};
use crate::geometry::{Point, Spacetime};
use crate::task::{coarse_matrix, Task};

fn rename(p: &mut PointId, map: &BTreeMap<PointId, PointId>) {
    if let Some(n) = map.get(p) {
        *p = n.clone();
    }
}

fn rename_step(step: &mut Step, map: &BTreeMap<PointId, PointId>) {
    match step {
        Step::ApplyChannel { at, source, .. } => {
            rename(at, map);
            rename(source, map);
        }
        Step::NormalTeleport { from, to, .. } | Step::PortTeleport { from, to, .. } | Step::SendPlain { from, to, .. } => {
            rename(from, map);
            rename(to, map);
        }
        Step::NormalDecrypt { at, key_point, .. } | Step::PortDecrypt { at, key_point, .. } => {
            rename(at, map);
            rename(key_point, map);
        }
        Step::Merge { at, .. } | Step::EmitOutput { at, .. } => rename(at, map),
    }
}

/// Re-seats a gate-free circuit on `spacetime`: the i-th input (output)
/// point becomes `inputs[i]` (`outputs[i]`), with id and position taken
/// from there. Systems and channels are kept.
pub fn relocate(
    circ: &SpacetimeCircuit,
    spacetime: &Spacetime,
    inputs: &[(PointId, Point)],
    outputs: &[(PointId, Point)],
) -> Result<SpacetimeCircuit, CompileError> {
    let gates = circ.gates();
    if !gates.is_empty() {
        return Err(CompileError::GatePointsPresent(gates));
    }
    let (cs, rs) = (circ.inputs(), circ.outputs());
    if cs.len() != inputs.len() || rs.len() != outputs.len() {
        return Err(CompileError::CoarseMismatch(format!(
            "circuit has {}x{} input/output points, target has {}x{}",
            cs.len(),
            rs.len(),
            inputs.len(),
            outputs.len()
        )));
    }
    let mut map = BTreeMap::new();
    let mut place = BTreeMap::new();
    for (old, (new, at)) in cs.iter().zip(inputs).chain(rs.iter().zip(outputs)) {
        map.insert(old.clone(), new.clone());
        place.insert(new.clone(), at.clone());
    }
    let mut out = circ.clone();
    out.spacetime = spacetime.clone();
    for p in &mut out.points {
        rename(&mut p.id, &map);
        p.at = place[&p.id].clone();
    }
    for (a, b) in &mut out.edges {
        rename(a, &map);
        rename(b, &map);
    }
    for s in &mut out.systems {
        match &mut s.kind {
            SystemKind::Input { point } | SystemKind::Output { point } | SystemKind::Ancilla { point } => {
                rename(point, &map)
            }
            SystemKind::Transit { from, to } => {
                rename(from, &map);
                rename(to, &map);
            }
            SystemKind::Reference => {}
        }
    }
    out.channels = std::mem::take(&mut out.channels)
        .into_iter()
        .map(|(mut p, mut ch)| {
            rename(&mut p, &map);
            if let PointChannel::Program { program } = &mut ch {
                for e in program {
                    rename_step(&mut e.step, &map);
                }
            }
            (p, ch)
        })
        .collect();
    for (a, b) in &out.edges {
        let (pa, pb) = (&place[a], &place[b]);
        if !spacetime.precedes(pa, pb).unwrap_or(false) {
            return Err(CompileError::CoarseMismatch(format!("`{a}` does not precede `{b}` in the target")));
        }
    }
    let report = out.validate();
    if !report.is_valid() {
        return Err(CompileError::Internal(format!("relocated circuit is invalid:\n{report}")));
    }
    Ok(out)
}

/// Moves a gate-free circuit onto the points of `task`, which must have
/// the same coarse causal structure as the circuit's own layout.
pub fn transfer(circ: &SpacetimeCircuit, task: &Task) -> Result<SpacetimeCircuit, CompileError> {
    let gates = circ.gates();
    if !gates.is_empty() {
        return Err(CompileError::GatePointsPresent(gates));
    }
    let at = |p: &PointId| circ.point(p).map(|q| q.at.clone()).expect("declared point");
    let cs: Vec<Point> = circ.inputs().iter().map(at).collect();
    let rs: Vec<Point> = circ.outputs().iter().map(at).collect();
    let own = coarse_matrix(&circ.spacetime, &cs, &rs).map_err(|e| CompileError::CoarseMismatch(e.to_string()))?;
    let theirs = task.coarse_signature().map_err(|e| CompileError::CoarseMismatch(e.to_string()))?;
    if own != theirs.matrix {
        return Err(CompileError::CoarseMismatch(format!(
            "circuit layout {:?} vs task {:?}",
            own, theirs.matrix
        )));
    }
    let inputs: Vec<(PointId, Point)> = task.inputs.iter().map(|p| (p.id.clone(), p.at.clone())).collect();
    let outputs: Vec<(PointId, Point)> = task.outputs.iter().map(|p| (p.id.clone(), p.at.clone())).collect();
    relocate(circ, &task.spacetime, &inputs, &outputs)
}
