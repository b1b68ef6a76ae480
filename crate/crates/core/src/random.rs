// SPDX-License-Identifier: Apache-2.0

//! Seeded random instances: channels, states, circuits and layouts.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::build::CircuitBuilder;
use crate::circuit::{PointId, SpacetimeCircuit};
use crate::geometry::{Point, Spacetime};
use crate::quantum::matrix::{self, CMatrix};
use crate::quantum::{total_dim, DensityState, Leg, QuantumChannel};
use crate::task::coarse_matrix;

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        matrix::c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// A CPTP map from normalised Gaussian matrices, with `kraus` operators or
/// as many as needed to cover the input (`d_in / d_out`, rounded up).
pub fn random_channel(rng: &mut impl Rng, in_legs: Vec<Leg>, out_legs: Vec<Leg>, kraus: usize) -> QuantumChannel {
    let (di, dout) = (total_dim(&in_legs), total_dim(&out_legs));
    let gs: Vec<CMatrix> = (0..kraus.max(di.div_ceil(dout))).map(|_| gaussian(rng, dout, di)).collect();
    let s = gs.iter().fold(CMatrix::zeros(di, di), |acc, g| acc + g.adjoint() * g);
    let inv_sqrt = matrix::hermitian_fn(&s, |l| 1.0 / l.sqrt());
    let ks = gs.into_iter().map(|g| g * &inv_sqrt).collect();
    QuantumChannel::new(in_legs, out_legs, ks).expect("normalised Kraus family is CPTP")
}

/// A random mixed state `G G† / tr` with Gaussian `G`.
pub fn random_state(rng: &mut impl Rng, legs: Vec<Leg>) -> DensityState {
    let d = total_dim(&legs);
    let g = gaussian(rng, d, d);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityState::new(legs, m.unscale(tr)).expect("dimensions match")
}

/// Size limits for [`random_circuit`].
#[derive(Debug, Clone, Copy)]
pub struct CircuitParams {
    pub max_inputs: usize,
    pub min_gates: usize,
    pub max_gates: usize,
    pub max_outputs: usize,
    /// Total ancilla qubits over the whole circuit.
    pub max_ancilla_qubits: u32,
    pub max_kraus: usize,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams { max_inputs: 3, min_gates: 1, max_gates: 3, max_outputs: 2, max_ancilla_qubits: 2, max_kraus: 2 }
    }
}

struct Draft {
    points: Vec<(String, Point)>,
    edges: Vec<(usize, usize)>,
    n_in: usize,
    n_g: usize,
}

fn precedes(a: &Point, b: &Point) -> bool {
    Spacetime::minkowski().precedes(a, b).unwrap_or(false)
}

fn time(p: &Point) -> f64 {
    match p {
        Point::Minkowski { t, .. } => *t,
        Point::Element(_) => 0.0,
    }
}

fn draft(rng: &mut impl Rng, params: &CircuitParams) -> Option<Draft> {
    let n_in = rng.gen_range(1..=params.max_inputs);
    let n_g = rng.gen_range(params.min_gates..=params.max_gates);
    let n_out = rng.gen_range(1..=params.max_outputs);
    let mut points = Vec::new();
    for i in 0..n_in {
        points.push((format!("c{}", i + 1), Point::minkowski(0.0, rng.gen_range(-2.0..2.0))));
    }
    let mut gate_pts: Vec<Point> =
        (0..n_g).map(|_| Point::minkowski(rng.gen_range(0.5..3.5), rng.gen_range(-2.0..2.0))).collect();
    gate_pts.sort_by(|a, b| time(a).total_cmp(&time(b)));
    for (i, p) in gate_pts.into_iter().enumerate() {
        points.push((format!("g{}", i + 1), p));
    }
    for j in 0..n_out {
        points.push((format!("r{}", j + 1), Point::minkowski(rng.gen_range(4.0..5.5), rng.gen_range(-3.0..3.0))));
    }
    let n = points.len();
    let mut out_deg = vec![0usize; n];
    let mut in_deg = vec![0usize; n];
    let mut edges = Vec::new();
    let link = |a: usize, b: usize| time(&points[a].1) < time(&points[b].1) && precedes(&points[a].1, &points[b].1);
    let gates = n_in..n_in + n_g;
    let outputs = n_in + n_g..n;
    for g in gates.clone() {
        let mut cands: Vec<usize> = (0..g).filter(|&a| out_deg[a] < 2 && link(a, g)).collect();
        if cands.is_empty() {
            return None;
        }
        cands.shuffle(rng);
        let k = rng.gen_range(1..=cands.len().min(2));
        for &a in &cands[..k] {
            edges.push((a, g));
            out_deg[a] += 1;
            in_deg[g] += 1;
        }
    }
    for g in gates {
        if out_deg[g] > 0 {
            continue;
        }
        let cands: Vec<usize> = (g + 1..n).filter(|&b| in_deg[b] < 2 && link(g, b)).collect();
        let &b = cands.choose(rng)?;
        edges.push((g, b));
        out_deg[g] += 1;
        in_deg[b] += 1;
    }
    for r in outputs {
        if in_deg[r] > 0 {
            continue;
        }
        let cands: Vec<usize> = (0..n_in + n_g).filter(|&a| out_deg[a] < 2 && link(a, r)).collect();
        let &a = cands.choose(rng)?;
        edges.push((a, r));
        out_deg[a] += 1;
        in_deg[r] += 1;
    }
    Some(Draft { points, edges, n_in, n_g })
}

/// A valid random circuit on 1+1 Minkowski space with one-qubit wires.
/// Gates are declared in time order.
pub fn random_circuit(rng: &mut impl Rng, params: &CircuitParams) -> SpacetimeCircuit {
    let d = loop {
        if let Some(d) = draft(rng, params) {
            break d;
        }
    };
    let mut b = CircuitBuilder::new(Spacetime::minkowski());
    for (i, (id, at)) in d.points.iter().enumerate() {
        if i < d.n_in {
            b.input(id, at.clone(), 1);
        } else if i < d.n_in + d.n_g {
            b.gate(id, at.clone());
        } else {
            b.output(id, at.clone(), 1);
        }
    }
    for &(a, z) in &d.edges {
        b.edge(&d.points[a].0, &d.points[z].0, 1);
    }
    let mut budget = params.max_ancilla_qubits;
    let mut ancilla_legs = Vec::new();
    for (id, _) in &d.points {
        if budget > 0 && rng.gen_bool(0.3) {
            let q = rng.gen_range(1..=budget);
            budget -= q;
            b.ancilla(id, q);
            ancilla_legs.push(Leg::new(crate::circuit::build::ancilla_id(id).to_string(), q));
        }
    }
    if !ancilla_legs.is_empty() {
        b.ancilla_state(random_state(rng, ancilla_legs));
    }
    for (id, _) in &d.points {
        let pid = PointId::from(id.as_str());
        let ins: Vec<Leg> = b.current().s_in(&pid).iter().map(|s| s.leg()).collect();
        let outs: Vec<Leg> = b.current().s_out(&pid).iter().map(|s| s.leg()).collect();
        let k = rng.gen_range(1..=params.max_kraus);
        b.channel_obj(id, random_channel(rng, ins, outs, k));
    }
    b.build().expect("random circuit is valid by construction")
}

/// Fresh Minkowski positions for `n` inputs and `m` outputs realising
/// `matrix` (`c_i ≺ r_j`), or `None` after `tries` attempts.
pub fn layout_with_coarse(rng: &mut impl Rng, matrix: &[Vec<bool>], tries: usize) -> Option<(Vec<Point>, Vec<Point>)> {
    let n = matrix.len();
    let m = matrix.first().map_or(0, Vec::len);
    let st = Spacetime::minkowski();
    for _ in 0..tries {
        let cs: Vec<Point> = (0..n).map(|_| Point::minkowski(rng.gen_range(-1.0..1.0), rng.gen_range(-4.0..4.0))).collect();
        let rs: Vec<Point> = (0..m).map(|_| Point::minkowski(rng.gen_range(1.5..5.0), rng.gen_range(-5.0..5.0))).collect();
        if coarse_matrix(&st, &cs, &rs).ok().as_deref() == Some(matrix) {
            return Some((cs, rs));
        }
    }
    None
}
