// SPDX-License-Identifier: Apache-2.0

//! The spacetime-circuit IR: points with roles, edges, system labels,
//! ancilla state and per-point channels.

pub mod build;
mod program;
mod validate;

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Spacetime};
use crate::quantum::{DensityState, Leg, QuantumChannel};

pub use build::{ancilla_id, input_id, output_id, transit_id, CircuitBuilder};
pub use program::{ScriptEntry, Step};
pub use validate::{Issue, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemId(pub String);

macro_rules! id_impls {
    ($t:ident) => {
        impl $t {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                $t(s.to_string())
            }
        }
        impl From<String> for $t {
            fn from(s: String) -> Self {
                $t(s)
            }
        }
    };
}
id_impls!(PointId);
id_impls!(SystemId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Gate,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPoint {
    pub id: PointId,
    pub role: Role,
    pub at: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    Input { point: PointId },
    Output { point: PointId },
    Transit { from: PointId, to: PointId },
    Ancilla { point: PointId },
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemLabel {
    pub id: SystemId,
    #[serde(flatten)]
    pub kind: SystemKind,
    pub qubits: u32,
}

impl SystemLabel {
    pub fn leg(&self) -> Leg {
        Leg::new(self.id.0.clone(), self.qubits)
    }
}

/// What happens at a point: a Kraus channel (ordinary circuits) or a
/// teleportation program (gate-free circuits produced by the compiler).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointChannel {
    Program { program: Vec<ScriptEntry> },
    Kraus(QuantumChannel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeCircuit {
    pub spacetime: Spacetime,
    pub points: Vec<CircuitPoint>,
    #[serde(default)]
    pub edges: Vec<(PointId, PointId)>,
    pub systems: Vec<SystemLabel>,
    /// State of all ancilla systems; `None` when the circuit has none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_state: Option<DensityState>,
    pub channels: BTreeMap<PointId, PointChannel>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("unknown point `{0}`")]
    UnknownPoint(PointId),
    #[error("unknown system `{0}`")]
    UnknownSystem(SystemId),
    #[error("edge graph contains a cycle through `{0}`")]
    CycleDetected(PointId),
    #[error("invalid circuit:\n{0}")]
    Invalid(ValidationReport),
}

impl SpacetimeCircuit {
    pub fn point(&self, id: &PointId) -> Option<&CircuitPoint> {
        self.points.iter().find(|p| &p.id == id)
    }

    pub fn point_index(&self, id: &PointId) -> Option<usize> {
        self.points.iter().position(|p| &p.id == id)
    }

    pub fn role(&self, id: &PointId) -> Option<Role> {
        self.point(id).map(|p| p.role)
    }

    pub fn system(&self, id: &SystemId) -> Option<&SystemLabel> {
        self.systems.iter().find(|s| &s.id == id)
    }

    fn ids_with_role(&self, role: Role) -> Vec<PointId> {
        self.points.iter().filter(|p| p.role == role).map(|p| p.id.clone()).collect()
    }

    pub fn inputs(&self) -> Vec<PointId> {
        self.ids_with_role(Role::Input)
    }

    pub fn gates(&self) -> Vec<PointId> {
        self.ids_with_role(Role::Gate)
    }

    pub fn outputs(&self) -> Vec<PointId> {
        self.ids_with_role(Role::Output)
    }

    pub fn is_gate_free(&self) -> bool {
        self.points.iter().all(|p| p.role != Role::Gate)
    }

    pub fn input_system(&self, p: &PointId) -> Option<&SystemLabel> {
        self.systems.iter().find(|s| matches!(&s.kind, SystemKind::Input { point } if point == p))
    }

    pub fn output_system(&self, p: &PointId) -> Option<&SystemLabel> {
        self.systems.iter().find(|s| matches!(&s.kind, SystemKind::Output { point } if point == p))
    }

    /// Ancilla systems held at `p`. Compiled circuits may hold several at
    /// one input point.
    pub fn ancillas_of(&self, p: &PointId) -> Vec<&SystemLabel> {
        self.systems.iter().filter(|s| matches!(&s.kind, SystemKind::Ancilla { point } if point == p)).collect()
    }

    pub fn transit(&self, from: &PointId, to: &PointId) -> Option<&SystemLabel> {
        self.systems
            .iter()
            .find(|s| matches!(&s.kind, SystemKind::Transit { from: f, to: t } if f == from && t == to))
    }

    /// Input systems in input-point declaration order.
    pub fn input_systems(&self) -> Vec<&SystemLabel> {
        self.inputs().iter().filter_map(|c| self.input_system(c)).collect()
    }

    pub fn output_systems(&self) -> Vec<&SystemLabel> {
        self.outputs().iter().filter_map(|r| self.output_system(r)).collect()
    }

    /// `S_in(p)`: incoming transit systems (edge order), the input system of
    /// an input point and the point's ancillas.
    pub fn s_in(&self, p: &PointId) -> Vec<&SystemLabel> {
        let mut out: Vec<&SystemLabel> = self
            .edges
            .iter()
            .filter(|(_, q)| q == p)
            .filter_map(|(a, b)| self.transit(a, b))
            .collect();
        out.extend(self.input_system(p));
        out.extend(self.ancillas_of(p));
        out
    }

    /// `S_out(p)`: outgoing transit systems (edge order) and the output system
    /// of an output point.
    pub fn s_out(&self, p: &PointId) -> Vec<&SystemLabel> {
        let mut out: Vec<&SystemLabel> = self
            .edges
            .iter()
            .filter(|(q, _)| q == p)
            .filter_map(|(a, b)| self.transit(a, b))
            .collect();
        out.extend(self.output_system(p));
        out
    }

    fn require(&self, p: &PointId) -> Result<(), CircuitError> {
        if self.point(p).is_some() {
            Ok(())
        } else {
            Err(CircuitError::UnknownPoint(p.clone()))
        }
    }

    /// `{q | (q, p) ∈ γ}` in edge order.
    pub fn in_set(&self, p: &PointId) -> Result<Vec<PointId>, CircuitError> {
        self.require(p)?;
        let mut seen = BTreeSet::new();
        Ok(self
            .edges
            .iter()
            .filter(|(_, q)| q == p)
            .map(|(a, _)| a.clone())
            .filter(|a| seen.insert(a.clone()))
            .collect())
    }

    /// Successors of `p` in edge order.
    pub fn out_set(&self, p: &PointId) -> Vec<PointId> {
        self.edges.iter().filter(|(a, _)| a == p).map(|(_, b)| b.clone()).collect()
    }

    /// Input points with a directed path to `p`; `p` itself when it is an
    /// input point (trivial paths count). Returned in declaration order.
    pub fn roots(&self, p: &PointId) -> Result<Vec<PointId>, CircuitError> {
        self.require(p)?;
        let mut seen = BTreeSet::new();
        let mut stack = vec![p.clone()];
        while let Some(q) = stack.pop() {
            if !seen.insert(q.clone()) {
                continue;
            }
            for (a, b) in &self.edges {
                if b == &q && !seen.contains(a) {
                    stack.push(a.clone());
                }
            }
        }
        Ok(self
            .points
            .iter()
            .filter(|pt| pt.role == Role::Input && seen.contains(&pt.id))
            .map(|pt| pt.id.clone())
            .collect())
    }

    /// Kahn's algorithm; among ready points the earliest declared goes first.
    pub fn topological_order(&self) -> Result<Vec<PointId>, CircuitError> {
        let index: BTreeMap<&PointId, usize> = self.points.iter().enumerate().map(|(i, p)| (&p.id, i)).collect();
        let n = self.points.len();
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for (a, b) in &self.edges {
            let ia = *index.get(a).ok_or_else(|| CircuitError::UnknownPoint(a.clone()))?;
            let ib = *index.get(b).ok_or_else(|| CircuitError::UnknownPoint(b.clone()))?;
            succ[ia].push(ib);
            indeg[ib] += 1;
        }
        let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = heap.pop() {
            order.push(self.points[i].id.clone());
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    heap.push(Reverse(j));
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).expect("some point is left");
            return Err(CircuitError::CycleDetected(self.points[stuck].id.clone()));
        }
        Ok(order)
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    /// Validates and turns a nonempty report into an error.
    pub fn check(&self) -> Result<(), CircuitError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(CircuitError::Invalid(report))
        }
    }

    /// The ancilla state, or the trivial one-dimensional state.
    pub fn ancilla_state_or_trivial(&self) -> DensityState {
        self.ancilla_state.clone().unwrap_or_else(DensityState::scalar)
    }
}
