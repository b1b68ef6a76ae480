// SPDX-License-Identifier: Apache-2.0

//! Bundled example tasks and circuits.
//!
//! Coordinates are chosen here; only their causal signatures matter.

use crate::circuit::build::{input_id, transit_id, CircuitBuilder};
use crate::circuit::SpacetimeCircuit;
use crate::geometry::{bipartite_causal_set, Point, Spacetime};
use crate::quantum::matrix::{self, c, CMatrix, ONE};
use crate::quantum::QuantumChannel;

use super::{Promise, Task, TaskPoint};

#[derive(Debug, Clone)]
pub struct Example {
    pub name: &'static str,
    pub title: &'static str,
    pub task: Option<Task>,
    pub circuit: Option<SpacetimeCircuit>,
}

fn mk(t: f64, x: f64) -> Point {
    Point::minkowski(t, x)
}

fn pts(ids: &[&str], at: &[Point]) -> Vec<TaskPoint> {
    ids.iter().zip(at).map(|(id, p)| TaskPoint::new(id, p.clone())).collect()
}

fn elements(ids: &[&str]) -> Vec<Point> {
    ids.iter().map(|id| Point::element(*id)).collect()
}

/// Builds a task with one qubit per point and the builder's system names.
fn task(name: &str, spacetime: Spacetime, inputs: Vec<TaskPoint>, outputs: Vec<TaskPoint>, kraus: Vec<CMatrix>) -> Task {
    let (input_systems, output_systems) = Task::default_systems(&inputs, &outputs, 1);
    let target = QuantumChannel::new(
        input_systems.iter().map(|s| s.leg()).collect(),
        output_systems.iter().map(|s| s.leg()).collect(),
        kraus,
    )
    .expect("library target is CPTP");
    Task {
        name: Some(name.to_string()),
        spacetime,
        inputs,
        outputs,
        input_systems,
        output_systems,
        target,
        tol: 1e-8,
        promise: None,
    }
}

/// `matrix[out, in] = 1` for each listed pair.
fn sparse(rows: usize, cols: usize, ones: &[(usize, usize)]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for &(r, col) in ones {
        m[(r, col)] = ONE;
    }
    m
}

fn cnot() -> CMatrix {
    sparse(4, 4, &[(0, 0), (1, 1), (3, 2), (2, 3)])
}

fn cz() -> CMatrix {
    let mut m = matrix::identity(4);
    m[(3, 3)] = c(-1.0, 0.0);
    m
}

fn phase(theta: f64) -> CMatrix {
    let mut m = matrix::identity(2);
    m[(1, 1)] = c(theta.cos(), theta.sin());
    m
}

/// The unitary used by the bundled PBQC task: CNOT after a Hadamard on the
/// control.
pub fn pbqc_unitary() -> CMatrix {
    cnot() * matrix::kron(&matrix::hadamard(), &matrix::identity(2))
}

// Summoning: a qubit at c0 must show up at r_j when b_j = 1 (promise: exactly
// one bit set). Systems: I:c0 = ψ, I:c1 = b1, I:c2 = b2.

fn summoning_points() -> (Vec<TaskPoint>, Vec<TaskPoint>) {
    (
        pts(&["c0", "c1", "c2"], &[mk(0.0, 0.0), mk(0.0, -1.0), mk(0.0, 1.0)]),
        pts(&["r1", "r2"], &[mk(3.0, -1.0), mk(3.0, 1.0)]),
    )
}

/// Outside the promise the target discards ψ and outputs |00⟩.
fn summoning_target() -> Vec<CMatrix> {
    let input = |psi: usize, b1: usize, b2: usize| psi * 4 + b1 * 2 + b2;
    let mut ks = vec![
        sparse(4, 8, &[(0, input(0, 1, 0)), (2, input(1, 1, 0))]),
        sparse(4, 8, &[(0, input(0, 0, 1)), (1, input(1, 0, 1))]),
    ];
    for (b1, b2) in [(0, 0), (1, 1)] {
        for psi in 0..2 {
            ks.push(sparse(4, 8, &[(0, input(psi, b1, b2))]));
        }
    }
    ks
}

fn summoning_promise() -> Promise {
    Promise { systems: vec![input_id("c1"), input_id("c2")], allowed: vec![vec![1, 0], vec![0, 1]] }
}

pub fn summoning_task() -> Task {
    let (inputs, outputs) = summoning_points();
    let mut t = task("summoning", Spacetime::minkowski(), inputs, outputs, summoning_target());
    t.promise = Some(summoning_promise());
    t
}

/// Two gates that divert the qubit towards r1 or on towards r2.
pub fn summoning_circuit() -> SpacetimeCircuit {
    let (inputs, outputs) = summoning_points();
    let mut b = CircuitBuilder::new(Spacetime::minkowski());
    for p in &inputs {
        b.input(p.id.as_str(), p.at.clone(), 1);
    }
    b.gate("g1", mk(1.2, -0.2)).gate("g2", mk(2.0, 0.5));
    for p in &outputs {
        b.output(p.id.as_str(), p.at.clone(), 1);
    }
    for (from, to) in [("c0", "g1"), ("c1", "g1"), ("g1", "r1"), ("g1", "g2"), ("c2", "g2"), ("g2", "r2")] {
        b.edge(from, to, 1);
    }
    for p in ["c0", "c1", "c2", "r1", "r2"] {
        b.identity_channel(p).expect("identity");
    }
    // g1: (ψ, b1) -> (to r1, to g2); b1 = 1 sends ψ to r1 and |0⟩ on.
    let g1 = vec![sparse(4, 4, &[(0, 0), (1, 2)]), sparse(4, 4, &[(0, 1), (2, 3)])];
    b.channel("g1", &[transit_id("c0", "g1"), transit_id("c1", "g1")], &[transit_id("g1", "r1"), transit_id("g1", "g2")], g1)
        .expect("g1 channel");
    // g2: (φ, b2) -> r2; passes φ when b2 = 1, else outputs |0⟩.
    let g2 = vec![sparse(2, 4, &[(0, 0)]), sparse(2, 4, &[(0, 2)]), sparse(2, 4, &[(0, 1), (1, 3)])];
    b.channel("g2", &[transit_id("g1", "g2"), transit_id("c2", "g2")], &[transit_id("g2", "r2")], g2)
        .expect("g2 channel");
    b.build().expect("summoning circuit is valid")
}

/// The same summoning requirement on a causal set in which every input
/// precedes every output and nothing lies in between.
pub fn hard_summoning_task() -> Task {
    let (cs, rs) = (["c0", "c1", "c2"], ["r1", "r2"]);
    let set = bipartite_causal_set(
        &cs.map(String::from),
        &rs.map(String::from),
        &[vec![true, true], vec![true, true], vec![true, true]],
    )
    .expect("bipartite set");
    let mut t = task("hard-summoning", Spacetime::CausalSet(set), pts(&cs, &elements(&cs)), pts(&rs, &elements(&rs)), summoning_target());
    t.promise = Some(summoning_promise());
    t
}

fn pbqc_points() -> (Vec<TaskPoint>, Vec<TaskPoint>) {
    (
        pts(&["c1", "c2"], &[mk(0.0, -1.0), mk(0.0, 1.0)]),
        pts(&["r1", "r2"], &[mk(2.0, -1.0), mk(2.0, 1.0)]),
    )
}

/// PBQC on Minkowski space with an arbitrary two-qubit target `(I1, I2) → (O1, O2)`.
pub fn pbqc_task_with(kraus: Vec<CMatrix>) -> Task {
    let (inputs, outputs) = pbqc_points();
    task("pbqc", Spacetime::minkowski(), inputs, outputs, kraus)
}

pub fn pbqc_task() -> Task {
    pbqc_task_with(vec![pbqc_unitary()])
}

/// PBQC on the four-element causal set `c_i ≺ r_j`, whose middle region is
/// empty.
pub fn interior_free_pbqc_task_with(kraus: Vec<CMatrix>) -> Task {
    let (cs, rs) = (["c1", "c2"], ["r1", "r2"]);
    let set = bipartite_causal_set(&cs.map(String::from), &rs.map(String::from), &[vec![true, true], vec![true, true]])
        .expect("bipartite set");
    task("pbqc-interior-free", Spacetime::CausalSet(set), pts(&cs, &elements(&cs)), pts(&rs, &elements(&rs)), kraus)
}

pub fn interior_free_pbqc_task() -> Task {
    interior_free_pbqc_task_with(vec![pbqc_unitary()])
}

/// One gate in the middle region applying `kraus` to `(I1, I2)`.
pub fn naive_pbqc_circuit_with(kraus: Vec<CMatrix>) -> SpacetimeCircuit {
    let (inputs, outputs) = pbqc_points();
    let mut b = CircuitBuilder::new(Spacetime::minkowski());
    for p in &inputs {
        b.input(p.id.as_str(), p.at.clone(), 1);
    }
    b.gate("g", mk(1.0, 0.0));
    for p in &outputs {
        b.output(p.id.as_str(), p.at.clone(), 1);
    }
    for (from, to) in [("c1", "g"), ("c2", "g"), ("g", "r1"), ("g", "r2")] {
        b.edge(from, to, 1);
    }
    for p in ["c1", "c2", "r1", "r2"] {
        b.identity_channel(p).expect("identity");
    }
    b.channel("g", &[transit_id("c1", "g"), transit_id("c2", "g")], &[transit_id("g", "r1"), transit_id("g", "r2")], kraus)
        .expect("gate channel");
    b.build().expect("naive PBQC circuit is valid")
}

pub fn naive_pbqc_circuit() -> SpacetimeCircuit {
    naive_pbqc_circuit_with(vec![pbqc_unitary()])
}

/// Four inputs, two layers of gates, three outputs.
pub fn two_layer_circuit() -> SpacetimeCircuit {
    let mut b = CircuitBuilder::new(Spacetime::minkowski());
    for (i, x) in [-3.0, -1.0, 1.0, 3.0].into_iter().enumerate() {
        b.input(&format!("c{}", i + 1), mk(0.0, x), 1);
    }
    b.gate("g1", mk(1.0, -2.0)).gate("g2", mk(3.0, 0.0)).gate("g3", mk(1.0, 2.0));
    b.output("r1", mk(2.0, -3.0), 1).output("r2", mk(4.0, 0.0), 2).output("r3", mk(2.0, 3.0), 1);
    let edges = [
        ("c1", "g1", 1),
        ("c2", "g1", 1),
        ("g1", "r1", 1),
        ("g1", "g2", 1),
        ("c3", "g3", 1),
        ("c4", "g3", 1),
        ("g3", "r3", 1),
        ("g3", "g2", 1),
        ("g2", "r2", 2),
    ];
    for (from, to, q) in edges {
        b.edge(from, to, q);
    }
    for p in ["c1", "c2", "c3", "c4", "r1", "r2", "r3"] {
        b.identity_channel(p).expect("identity");
    }
    let t = |a: &str, z: &str| transit_id(a, z);
    b.channel("g1", &[t("c1", "g1"), t("c2", "g1")], &[t("g1", "r1"), t("g1", "g2")], vec![pbqc_unitary()])
        .expect("g1");
    let u3 = cz() * matrix::kron(&phase(0.7), &matrix::hadamard());
    b.channel("g3", &[t("c4", "g3"), t("c3", "g3")], &[t("g3", "r3"), t("g3", "g2")], vec![u3]).expect("g3");
    let u2 = cnot() * matrix::kron(&matrix::hadamard(), &phase(1.3));
    b.channel("g2", &[t("g3", "g2"), t("g1", "g2")], &[t("g2", "r2")], vec![u2]).expect("g2");
    b.build().expect("two-layer circuit is valid")
}

pub fn example_library() -> Vec<Example> {
    vec![
        Example {
            name: "summoning",
            title: "Summoning on 1+1 Minkowski space, with a two-gate circuit",
            task: Some(summoning_task()),
            circuit: Some(summoning_circuit()),
        },
        Example {
            name: "hard-summoning",
            title: "Summoning with the same coarse structure but no shared interior",
            task: Some(hard_summoning_task()),
            circuit: None,
        },
        Example { name: "pbqc", title: "Position-based quantum computation task", task: Some(pbqc_task()), circuit: None },
        Example {
            name: "pbqc-causal-set",
            title: "PBQC on a causal set with nothing between inputs and outputs",
            task: Some(interior_free_pbqc_task()),
            circuit: None,
        },
        Example {
            name: "naive-pbqc",
            title: "PBQC by a single gate in the middle region",
            task: Some(pbqc_task()),
            circuit: Some(naive_pbqc_circuit()),
        },
        Example {
            name: "two-layer",
            title: "Four inputs, three gates in two layers, three outputs",
            task: None,
            circuit: Some(two_layer_circuit()),
        },
    ]
}

pub fn example(name: &str) -> Option<Example> {
    example_library().into_iter().find(|e| e.name == name)
}
