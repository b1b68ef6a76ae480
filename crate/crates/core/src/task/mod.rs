// SPDX-License-Identifier: Apache-2.0

//! Relativistic quantum tasks: what must come out where, given what goes in
//! where. Includes the coarse and fine causal signatures of a task's point
//! layout and the check that a circuit accomplishes a task.

pub mod io;
pub mod library;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{PointId, SpacetimeCircuit, SystemId, SystemKind, SystemLabel};
use crate::geometry::{GeometryError, Point, Region, Spacetime};
use crate::quantum::matrix::{self, CMatrix};
use crate::quantum::{channel_distance, ChoiMatrix, QuantumChannel, QuantumError};
use crate::simulate::{effective_channel, SimError};

/// Default limit on `n + m` for fine signatures.
pub const DEFAULT_FINE_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("tasks have {a:?} and {b:?} input/output points")]
    ArityMismatch { a: (usize, usize), b: (usize, usize) },
    #[error("circuit does not match the task layout: {0}")]
    LayoutMismatch(String),
    #[error("fine signature needs 2^{n} subsets, above the cap of {cap} points")]
    TooManyPoints { n: usize, cap: usize },
    #[error("invalid task: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPoint {
    pub id: PointId,
    pub at: Point,
}

impl TaskPoint {
    pub fn new(id: &str, at: Point) -> Self {
        TaskPoint { id: id.into(), at }
    }
}

/// Inputs that are promised to be classical: each listed system arrives in
/// a computational basis state, and only the listed joint assignments occur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Promise {
    pub systems: Vec<SystemId>,
    pub allowed: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub spacetime: Spacetime,
    pub inputs: Vec<TaskPoint>,
    pub outputs: Vec<TaskPoint>,
    pub input_systems: Vec<SystemLabel>,
    pub output_systems: Vec<SystemLabel>,
    /// Target channel from the input systems to the output systems; the
    /// reference system is implicit in the Choi comparison.
    pub target: QuantumChannel,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub promise: Option<Promise>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseSignature {
    pub n: usize,
    pub m: usize,
    /// `matrix[i][j]` is `c_i ≺ r_j`.
    pub matrix: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineEntry {
    /// 1-based input indices.
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub nonempty: bool,
}

/// Nonemptiness of `∩_{i∈S_c} J⁺(c_i) ∩ ∩_{j∈S_r} J⁻(r_j)` for every pair of
/// subsets, ordered by (input mask, output mask).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineSignature {
    pub n: usize,
    pub m: usize,
    pub entries: Vec<FineEntry>,
}

impl FineSignature {
    pub fn get(&self, inputs: &[usize], outputs: &[usize]) -> Option<bool> {
        let (a, b): (BTreeSet<usize>, BTreeSet<usize>) =
            (inputs.iter().copied().collect(), outputs.iter().copied().collect());
        self.entries
            .iter()
            .find(|e| e.inputs.iter().copied().collect::<BTreeSet<_>>() == a && e.outputs.iter().copied().collect::<BTreeSet<_>>() == b)
            .map(|e| e.nonempty)
    }
}

/// Pairwise precedence `c_i ≺ r_j`.
pub fn coarse_matrix(st: &Spacetime, inputs: &[Point], outputs: &[Point]) -> Result<Vec<Vec<bool>>, GeometryError> {
    inputs.iter().map(|c| outputs.iter().map(|r| st.precedes(c, r)).collect()).collect()
}

fn members(mask: usize, k: usize) -> Vec<usize> {
    (0..k).filter(|i| mask >> i & 1 == 1).collect()
}

impl Task {
    /// Checks point membership, system counts and target dimensions.
    pub fn validate(&self) -> Result<(), TaskError> {
        for p in self.inputs.iter().chain(&self.outputs) {
            self.spacetime.check_point(&p.at)?;
        }
        if self.input_systems.len() != self.inputs.len() || self.output_systems.len() != self.outputs.len() {
            return Err(TaskError::Invalid("one input (output) system per input (output) point".into()));
        }
        let ids: BTreeSet<&PointId> = self.inputs.iter().chain(&self.outputs).map(|p| &p.id).collect();
        if ids.len() != self.inputs.len() + self.outputs.len() {
            return Err(TaskError::Invalid("duplicate point id".into()));
        }
        let q = |ls: &[SystemLabel]| ls.iter().map(|s| s.qubits).collect::<Vec<_>>();
        let tq = |ls: &[crate::quantum::Leg]| ls.iter().map(|l| l.qubits).collect::<Vec<_>>();
        if q(&self.input_systems) != tq(&self.target.in_legs) || q(&self.output_systems) != tq(&self.target.out_legs) {
            return Err(TaskError::Invalid("target legs do not match the task systems".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(TaskError::Invalid(format!("tolerance {} is not a nonnegative number", self.tol)));
        }
        if let Some(pr) = &self.promise {
            for (k, s) in pr.systems.iter().enumerate() {
                let leg = self
                    .input_systems
                    .iter()
                    .find(|l| &l.id == s)
                    .ok_or_else(|| TaskError::Invalid(format!("promise names unknown input `{s}`")))?;
                if pr.allowed.iter().any(|a| a.len() != pr.systems.len() || a[k] >= leg.leg().dim()) {
                    return Err(TaskError::Invalid("promise assignment out of range".into()));
                }
            }
        }
        Ok(())
    }

    fn points(ps: &[TaskPoint]) -> Vec<Point> {
        ps.iter().map(|p| p.at.clone()).collect()
    }

    pub fn coarse_signature(&self) -> Result<CoarseSignature, TaskError> {
        let matrix = coarse_matrix(&self.spacetime, &Self::points(&self.inputs), &Self::points(&self.outputs))?;
        Ok(CoarseSignature { n: self.inputs.len(), m: self.outputs.len(), matrix })
    }

    pub fn fine_signature(&self) -> Result<FineSignature, TaskError> {
        self.fine_signature_capped(DEFAULT_FINE_CAP)
    }

    pub fn fine_signature_capped(&self, cap: usize) -> Result<FineSignature, TaskError> {
        let (n, m) = (self.inputs.len(), self.outputs.len());
        if n + m > cap {
            return Err(TaskError::TooManyPoints { n: n + m, cap });
        }
        let mut entries = Vec::with_capacity(1 << (n + m));
        for mc in 0..1usize << n {
            for mr in 0..1usize << m {
                let (ci, ri) = (members(mc, n), members(mr, m));
                let region = Region::new(
                    ci.iter().map(|&i| self.inputs[i].at.clone()).collect(),
                    ri.iter().map(|&j| self.outputs[j].at.clone()).collect(),
                );
                entries.push(FineEntry {
                    inputs: ci.iter().map(|i| i + 1).collect(),
                    outputs: ri.iter().map(|j| j + 1).collect(),
                    nonempty: self.spacetime.region_nonempty(&region)?,
                });
            }
        }
        Ok(FineSignature { n, m, entries })
    }

    /// Distance of `ch` from the target, restricted to promised inputs.
    pub fn distance(&self, ch: &QuantumChannel) -> Result<f64, TaskError> {
        let Some(pr) = &self.promise else {
            return Ok(channel_distance(ch, &self.target)?);
        };
        if ch.d_in() != self.target.d_in() || ch.d_out() != self.target.d_out() {
            return Err(QuantumError::DimensionMismatch { expected: self.target.d_in(), found: ch.d_in() }.into());
        }
        let projectors: Vec<CMatrix> = pr
            .allowed
            .iter()
            .map(|a| {
                self.input_systems.iter().fold(matrix::identity(1), |acc, s| {
                    let d = s.leg().dim();
                    let f = match pr.systems.iter().position(|p| p == &s.id) {
                        Some(k) => matrix::basis_projector(d, a[k]),
                        None => matrix::identity(d),
                    };
                    matrix::kron(&acc, &f)
                })
            })
            .collect();
        let restricted = |c: &QuantumChannel| {
            let ks: Vec<CMatrix> = c.kraus.iter().flat_map(|k| projectors.iter().map(move |p| k * p)).collect();
            ChoiMatrix::from_kraus(c.d_in(), c.d_out(), &ks)
        };
        let (a, b) = (restricted(ch), restricted(&self.target));
        let weight: f64 = projectors.iter().map(|p| p.trace().re).sum();
        Ok(matrix::trace_norm_hermitian(&(&a.matrix - &b.matrix)) / weight)
    }

    /// Whether `circ`, laid out on this task's points, accomplishes it.
    pub fn accomplished_by(&self, circ: &SpacetimeCircuit) -> Result<bool, TaskError> {
        self.check_layout(circ)?;
        let ch = effective_channel(circ)?;
        Ok(self.distance(&ch)? <= self.tol)
    }

    fn check_layout(&self, circ: &SpacetimeCircuit) -> Result<(), TaskError> {
        if circ.spacetime != self.spacetime {
            return Err(TaskError::LayoutMismatch("different spacetime".into()));
        }
        let same = |ids: Vec<PointId>, ps: &[TaskPoint], what: &str| -> Result<(), TaskError> {
            let theirs: Vec<&PointId> = ps.iter().map(|p| &p.id).collect();
            if ids.iter().collect::<Vec<_>>() != theirs {
                return Err(TaskError::LayoutMismatch(format!("{what} points {ids:?} vs task {theirs:?}")));
            }
            for (id, p) in ids.iter().zip(ps) {
                if circ.point(id).map(|q| &q.at) != Some(&p.at) {
                    return Err(TaskError::LayoutMismatch(format!("point `{id}` is not where the task puts it")));
                }
            }
            Ok(())
        };
        same(circ.inputs(), &self.inputs, "input")?;
        same(circ.outputs(), &self.outputs, "output")?;
        let q = |ls: Vec<&SystemLabel>| ls.iter().map(|s| s.qubits).collect::<Vec<_>>();
        if q(circ.input_systems()) != q(self.input_systems.iter().collect())
            || q(circ.output_systems()) != q(self.output_systems.iter().collect())
        {
            return Err(TaskError::LayoutMismatch("system sizes differ".into()));
        }
        Ok(())
    }

    /// The task `circ` accomplishes by construction: its own input/output
    /// layout with its effective channel as target.
    pub fn from_circuit(circ: &SpacetimeCircuit, tol: f64) -> Result<Task, TaskError> {
        let at = |p: PointId| TaskPoint { at: circ.point(&p).expect("declared").at.clone(), id: p };
        Ok(Task {
            name: None,
            spacetime: circ.spacetime.clone(),
            inputs: circ.inputs().into_iter().map(at).collect(),
            outputs: circ.outputs().into_iter().map(at).collect(),
            input_systems: circ.input_systems().into_iter().cloned().collect(),
            output_systems: circ.output_systems().into_iter().cloned().collect(),
            target: effective_channel(circ)?,
            tol,
            promise: None,
        })
    }

    /// The same requirement on other points: `inputs`/`outputs` replace the
    /// current ones position by position.
    pub fn moved_to(&self, spacetime: Spacetime, inputs: Vec<TaskPoint>, outputs: Vec<TaskPoint>) -> Result<Task, TaskError> {
        if inputs.len() != self.inputs.len() || outputs.len() != self.outputs.len() {
            return Err(TaskError::ArityMismatch {
                a: (self.inputs.len(), self.outputs.len()),
                b: (inputs.len(), outputs.len()),
            });
        }
        let rehome = |ls: &[SystemLabel], ps: &[TaskPoint], output: bool| -> Vec<SystemLabel> {
            ls.iter()
                .zip(ps)
                .map(|(s, p)| SystemLabel {
                    id: s.id.clone(),
                    kind: if output {
                        SystemKind::Output { point: p.id.clone() }
                    } else {
                        SystemKind::Input { point: p.id.clone() }
                    },
                    qubits: s.qubits,
                })
                .collect()
        };
        let t = Task {
            input_systems: rehome(&self.input_systems, &inputs, false),
            output_systems: rehome(&self.output_systems, &outputs, true),
            spacetime,
            inputs,
            outputs,
            ..self.clone()
        };
        t.validate()?;
        Ok(t)
    }

    /// Input and output systems named after the task points, as produced by
    /// the circuit builder.
    pub fn default_systems(inputs: &[TaskPoint], outputs: &[TaskPoint], qubits: u32) -> (Vec<SystemLabel>, Vec<SystemLabel>) {
        use crate::circuit::build::{input_id, output_id};
        let i = inputs
            .iter()
            .map(|p| SystemLabel { id: input_id(p.id.as_str()), kind: SystemKind::Input { point: p.id.clone() }, qubits })
            .collect();
        let o = outputs
            .iter()
            .map(|p| SystemLabel { id: output_id(p.id.as_str()), kind: SystemKind::Output { point: p.id.clone() }, qubits })
            .collect();
        (i, o)
    }
}

fn arity(a: &Task, b: &Task) -> Result<(), TaskError> {
    let (x, y) = ((a.inputs.len(), a.outputs.len()), (b.inputs.len(), b.outputs.len()));
    if x != y {
        return Err(TaskError::ArityMismatch { a: x, b: y });
    }
    Ok(())
}

pub fn same_coarse(a: &Task, b: &Task) -> Result<bool, TaskError> {
    arity(a, b)?;
    Ok(a.coarse_signature()? == b.coarse_signature()?)
}

pub fn same_fine(a: &Task, b: &Task) -> Result<bool, TaskError> {
    arity(a, b)?;
    Ok(a.fine_signature()? == b.fine_signature()?)
}

pub fn accomplishes(circ: &SpacetimeCircuit, t: &Task) -> Result<bool, TaskError> {
    t.accomplished_by(circ)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mk(t: f64, x: f64) -> Point {
        Point::minkowski(t, x)
    }

    fn layout(cs: &[(f64, f64)], rs: &[(f64, f64)]) -> Task {
        let inputs: Vec<TaskPoint> = cs.iter().enumerate().map(|(i, &(t, x))| TaskPoint::new(&format!("c{i}"), mk(t, x))).collect();
        let outputs: Vec<TaskPoint> =
            rs.iter().enumerate().map(|(j, &(t, x))| TaskPoint::new(&format!("r{}", j + 1), mk(t, x))).collect();
        let (input_systems, output_systems) = Task::default_systems(&inputs, &outputs, 1);
        let target = QuantumChannel::completely_depolarizing(
            input_systems.iter().map(|s| s.leg()).collect(),
            output_systems.iter().map(|s| s.leg()).collect(),
        )
        .unwrap();
        Task {
            name: None,
            spacetime: Spacetime::minkowski(),
            inputs,
            outputs,
            input_systems,
            output_systems,
            target,
            tol: 1e-8,
            promise: None,
        }
    }

    #[test]
    fn summoning_coarse_matrix() {
        let t = layout(&[(0.0, 0.0), (0.0, -2.0), (0.0, 2.0)], &[(3.0, -2.0), (3.0, 2.0)]);
        let sig = t.coarse_signature().unwrap();
        assert_eq!(sig.matrix, vec![vec![true, true], vec![true, false], vec![false, true]]);
    }

    #[test]
    fn single_pair() {
        let t = layout(&[(0.0, 0.0)], &[(1.0, 0.0)]);
        assert_eq!(t.coarse_signature().unwrap().matrix, vec![vec![true]]);
    }

    #[test]
    fn pbqc_fine_entry_nonempty() {
        let t = layout(&[(0.0, -1.0), (0.0, 1.0)], &[(2.0, -1.0), (2.0, 1.0)]);
        let f = t.fine_signature().unwrap();
        assert_eq!(f.entries.len(), 16);
        assert_eq!(f.get(&[1, 2], &[1, 2]), Some(true));
        assert!(same_fine(&t, &t).unwrap());
    }

    #[test]
    fn arity_is_checked() {
        let a = layout(&[(0.0, 0.0)], &[(1.0, 0.0)]);
        let b = layout(&[(0.0, 0.0), (0.0, 1.0)], &[(1.0, 0.0)]);
        assert!(matches!(same_coarse(&a, &b), Err(TaskError::ArityMismatch { .. })));
    }

    #[test]
    fn fine_cap() {
        let t = layout(&[(0.0, 0.0); 7], &[(1.0, 0.0); 6]);
        assert!(matches!(t.fine_signature(), Err(TaskError::TooManyPoints { n: 13, cap: 12 })));
    }
}
