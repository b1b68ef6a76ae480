// SPDX-License-Identifier: Apache-2.0

//! Effective channels of spacetime circuits by dense simulation.
//!
//! Circuits whose points carry Kraus channels are run in topological order.
//! Compiled circuits (point programs) are replayed step by step in script
//! order; the replay also checks that every step is legal where it happens.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{CircuitError, PointChannel, PointId, SpacetimeCircuit, Step, SystemId};
use crate::compiler::script_of;
use crate::quantum::{ChoiMatrix, DensityState, Leg, QuantumChannel, QuantumError};
use crate::teleport::{nt_decrypt, pauli_encrypt, pbt_channel, PauliKey, TeleportError};

/// Default limit on simultaneously tracked key branches in averaged replay.
pub const DEFAULT_BRANCH_CAP: usize = 4096;

/// How teleportation outcomes are treated when replaying a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Exact average over all normal-teleportation outcomes.
    Averaged,
    /// One run with outcomes drawn from `seed`.
    Sampled { seed: u64 },
    /// As `Sampled`, with every port teleportation replaced by `ports`-port
    /// teleportation acting qubit-wise.
    Physical { ports: usize, seed: u64 },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Teleport(#[from] TeleportError),
    #[error("circuit mixes Kraus channels and point programs")]
    MixedChannels,
    #[error("step {step}: system `{system}` is at `{found}`, not at `{expected}`")]
    WrongLocation { step: usize, system: SystemId, expected: PointId, found: String },
    #[error("step {step}: `{from}` does not causally precede `{to}`")]
    NotInCausalFuture { step: usize, from: PointId, to: PointId },
    #[error("step {step}: newest normal key of `{system}` is not from `{key_point}`")]
    NotLastNormalKey { step: usize, system: SystemId, key_point: PointId },
    #[error("step {step}: `{system}` has no port key from `{key_point}`")]
    KeyNotPresent { step: usize, system: SystemId, key_point: PointId },
    #[error("step {step}: channel applied to normally encrypted `{system}`")]
    EncryptedChannelInput { step: usize, system: SystemId },
    #[error("step {step}: channel inputs carry different port encryptions")]
    PrefixMismatch { step: usize },
    #[error("step {step}: output `{system}` is still encrypted")]
    EncryptedOutput { step: usize, system: SystemId },
    #[error("step {step}: unknown or consumed system `{system}`")]
    UnknownSystem { step: usize, system: SystemId },
    #[error("more than {0} outcome branches; use a sampled replay")]
    BranchCap(usize),
    #[error("output `{0}` was never produced")]
    MissingOutput(SystemId),
}

fn ref_leg(s: &SystemId) -> String {
    format!("ref:{s}")
}

/// `Φ` on (reference copy, input) for every input system, then the ancilla
/// state.
fn initial_state(circ: &SpacetimeCircuit) -> Result<(DensityState, Vec<Leg>), SimError> {
    let mut st = DensityState::scalar();
    let mut in_legs = Vec::new();
    for s in circ.input_systems() {
        let leg = s.leg();
        st = st.tensor(&DensityState::max_entangled(Leg::new(ref_leg(&s.id), leg.qubits), leg.clone())?)?;
        in_legs.push(leg);
    }
    st = st.tensor(&circ.ancilla_state_or_trivial())?;
    Ok((st, in_legs))
}

/// Reads the channel off the final (reference, output) state.
fn finish(circ: &SpacetimeCircuit, st: &DensityState, in_legs: Vec<Leg>) -> Result<QuantumChannel, SimError> {
    let outs: Vec<Leg> = circ.output_systems().iter().map(|s| s.leg()).collect();
    for o in &outs {
        if !st.has_leg(&o.name) {
            return Err(SimError::MissingOutput(SystemId(o.name.clone())));
        }
    }
    let refs: Vec<String> = circ.input_systems().iter().map(|s| ref_leg(&s.id)).collect();
    let order: Vec<&str> = refs.iter().map(String::as_str).chain(outs.iter().map(|l| l.name.as_str())).collect();
    let reduced = st.reduce_to(&order)?;
    let d_in: usize = in_legs.iter().map(Leg::dim).product();
    let d_out: usize = outs.iter().map(Leg::dim).product();
    let choi = ChoiMatrix { d_in, d_out, matrix: reduced.into_matrix().scale(d_in as f64) };
    Ok(QuantumChannel::from_choi(in_legs, outs, &choi)?)
}

fn kraus_apply(st: &DensityState, ch: &QuantumChannel) -> Result<DensityState, QuantumError> {
    let ins: Vec<&str> = ch.in_legs.iter().map(|l| l.name.as_str()).collect();
    st.apply_kraus(&ins, &ch.out_legs, &ch.kraus)
}

/// The effective channel, from input systems to output systems, in
/// averaged mode.
pub fn effective_channel(circ: &SpacetimeCircuit) -> Result<QuantumChannel, SimError> {
    effective_channel_with(circ, Mode::Averaged)
}

pub fn effective_channel_with(circ: &SpacetimeCircuit, mode: Mode) -> Result<QuantumChannel, SimError> {
    circ.check()?;
    let programs = circ.channels.values().filter(|c| matches!(c, PointChannel::Program { .. })).count();
    if programs == 0 {
        run_kraus(circ)
    } else if programs == circ.channels.len() {
        Replay::new(circ, mode)?.run()
    } else {
        Err(SimError::MixedChannels)
    }
}

fn run_kraus(circ: &SpacetimeCircuit) -> Result<QuantumChannel, SimError> {
    let (mut st, in_legs) = initial_state(circ)?;
    for p in circ.topological_order()? {
        if let Some(PointChannel::Kraus(ch)) = circ.channels.get(&p) {
            st = kraus_apply(&st, ch)?;
        }
    }
    finish(circ, &st, in_legs)
}

/// Where a system is and what encrypts it.
#[derive(Debug, Clone)]
struct Tracked {
    location: PointId,
    /// (key point, teleport id), oldest first.
    normal: Vec<(PointId, u64)>,
    port: Vec<(PointId, u64)>,
}

#[derive(Debug, Clone)]
struct Branch {
    state: DensityState,
    keys: BTreeMap<(u64, SystemId), PauliKey>,
}

struct Replay<'a> {
    circ: &'a SpacetimeCircuit,
    mode: Mode,
    rng: ChaCha8Rng,
    branches: Vec<Branch>,
    tracked: BTreeMap<SystemId, Tracked>,
    in_legs: Vec<Leg>,
    cap: usize,
}

impl<'a> Replay<'a> {
    fn new(circ: &'a SpacetimeCircuit, mode: Mode) -> Result<Self, SimError> {
        let (state, in_legs) = initial_state(circ)?;
        let seed = match mode {
            Mode::Averaged => 0,
            Mode::Sampled { seed } | Mode::Physical { seed, .. } => seed,
        };
        let mut tracked = BTreeMap::new();
        for s in &circ.systems {
            let at = match &s.kind {
                crate::circuit::SystemKind::Input { point } | crate::circuit::SystemKind::Ancilla { point } => point,
                _ => continue,
            };
            tracked.insert(s.id.clone(), Tracked { location: at.clone(), normal: Vec::new(), port: Vec::new() });
        }
        Ok(Replay {
            circ,
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            branches: vec![Branch { state, keys: BTreeMap::new() }],
            tracked,
            in_legs,
            cap: DEFAULT_BRANCH_CAP,
        })
    }

    /// `a ≼ b`.
    fn reaches(&self, a: &PointId, b: &PointId) -> bool {
        if a == b {
            return true;
        }
        match (self.circ.point(a), self.circ.point(b)) {
            (Some(pa), Some(pb)) => self.circ.spacetime.precedes(&pa.at, &pb.at).unwrap_or(false),
            _ => false,
        }
    }

    fn need_reach(&self, step: usize, from: &PointId, to: &PointId) -> Result<(), SimError> {
        if self.reaches(from, to) {
            Ok(())
        } else {
            Err(SimError::NotInCausalFuture { step, from: from.clone(), to: to.clone() })
        }
    }

    fn at(&mut self, step: usize, s: &SystemId, expected: &PointId) -> Result<&mut Tracked, SimError> {
        let t = self.tracked.get_mut(s).ok_or_else(|| SimError::UnknownSystem { step, system: s.clone() })?;
        if &t.location != expected {
            return Err(SimError::WrongLocation {
                step,
                system: s.clone(),
                expected: expected.clone(),
                found: t.location.to_string(),
            });
        }
        Ok(t)
    }

    fn merge_branches(&mut self) -> Result<(), SimError> {
        let mut merged: BTreeMap<BTreeMap<(u64, SystemId), PauliKey>, DensityState> = BTreeMap::new();
        for b in self.branches.drain(..) {
            match merged.get_mut(&b.keys) {
                Some(st) => *st = st.add(&b.state)?,
                None => {
                    merged.insert(b.keys, b.state);
                }
            }
        }
        self.branches = merged.into_iter().map(|(keys, state)| Branch { state, keys }).collect();
        Ok(())
    }

    fn run(mut self) -> Result<QuantumChannel, SimError> {
        let script = script_of(self.circ);
        for (i, step) in script.steps.iter().enumerate() {
            self.step(i, step)?;
        }
        self.merge_branches()?;
        let mut total: Option<DensityState> = None;
        for b in &self.branches {
            total = Some(match total {
                None => b.state.clone(),
                Some(t) => t.add(&b.state)?,
            });
        }
        let st = total.expect("at least one branch");
        let in_legs = std::mem::take(&mut self.in_legs);
        finish(self.circ, &st, in_legs)
    }

    fn step(&mut self, i: usize, step: &Step) -> Result<(), SimError> {
        match step {
            Step::ApplyChannel { at, channel, .. } => {
                let mut prefix: Option<Vec<(PointId, u64)>> = None;
                for l in &channel.in_legs {
                    let s = SystemId(l.name.clone());
                    let t = self.at(i, &s, at)?;
                    if !t.normal.is_empty() {
                        return Err(SimError::EncryptedChannelInput { step: i, system: s });
                    }
                    let p = t.port.clone();
                    match &prefix {
                        Some(q) if q != &p => return Err(SimError::PrefixMismatch { step: i }),
                        _ => prefix = Some(p),
                    }
                    self.tracked.remove(&s);
                }
                for b in &mut self.branches {
                    b.state = kraus_apply(&b.state, channel)?;
                }
                let port = prefix.unwrap_or_default();
                for l in &channel.out_legs {
                    self.tracked.insert(
                        SystemId(l.name.clone()),
                        Tracked { location: at.clone(), normal: Vec::new(), port: port.clone() },
                    );
                }
            }
            Step::SendPlain { systems, from, to } => {
                if from != to && !self.reaches(from, to) {
                    return Err(SimError::NotInCausalFuture { step: i, from: from.clone(), to: to.clone() });
                }
                for s in systems {
                    self.at(i, s, from)?.location = to.clone();
                }
            }
            Step::NormalTeleport { systems, from, to, key } => {
                for s in systems {
                    let t = self.at(i, s, from)?;
                    t.normal.push((from.clone(), *key));
                    t.location = to.clone();
                }
                for s in systems {
                    self.encrypt(s, *key)?;
                }
            }
            Step::PortTeleport { systems, from, to, key } => {
                for s in systems {
                    let t = self.at(i, s, from)?;
                    t.port.push((from.clone(), *key));
                    t.location = to.clone();
                }
                if let Mode::Physical { ports, .. } = self.mode {
                    for s in systems {
                        self.depolarize(s, ports)?;
                    }
                }
            }
            Step::NormalDecrypt { systems, at, key_point } => {
                self.need_reach(i, key_point, at)?;
                for s in systems {
                    let t = self.at(i, s, at)?;
                    let id = match t.normal.last() {
                        Some((p, id)) if p == key_point => *id,
                        _ => {
                            return Err(SimError::NotLastNormalKey {
                                step: i,
                                system: s.clone(),
                                key_point: key_point.clone(),
                            })
                        }
                    };
                    t.normal.pop();
                    for b in &mut self.branches {
                        let k = b.keys.remove(&(id, s.clone())).expect("key recorded at teleport");
                        b.state = nt_decrypt(&b.state, s.as_str(), &k)?;
                    }
                }
                self.merge_branches()?;
            }
            Step::PortDecrypt { systems, at, key_point } => {
                self.need_reach(i, key_point, at)?;
                for s in systems {
                    let t = self.at(i, s, at)?;
                    let pos = t.port.iter().rposition(|(p, _)| p == key_point).ok_or_else(|| {
                        SimError::KeyNotPresent { step: i, system: s.clone(), key_point: key_point.clone() }
                    })?;
                    t.port.remove(pos);
                }
            }
            Step::Merge { systems, at } => {
                for s in systems {
                    self.at(i, s, at)?;
                }
            }
            Step::EmitOutput { systems, at } => {
                for s in systems {
                    let t = self.at(i, s, at)?;
                    if !t.normal.is_empty() || !t.port.is_empty() {
                        return Err(SimError::EncryptedOutput { step: i, system: s.clone() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Pauli-encrypts `s` with the outcome of teleport `id`: every outcome
    /// with weight `4^-q` when averaging, one uniform draw otherwise.
    fn encrypt(&mut self, s: &SystemId, id: u64) -> Result<(), SimError> {
        let q = self.branches[0].state.leg(s.as_str()).map(|l| l.qubits as usize).unwrap_or(0);
        match self.mode {
            Mode::Averaged => {
                let keys = PauliKey::all(q);
                if self.branches.len() * keys.len() > self.cap {
                    return Err(SimError::BranchCap(self.cap));
                }
                let w = 1.0 / keys.len() as f64;
                let mut next = Vec::with_capacity(self.branches.len() * keys.len());
                for b in &self.branches {
                    for k in &keys {
                        let mut keys_b = b.keys.clone();
                        keys_b.insert((id, s.clone()), k.clone());
                        next.push(Branch { state: pauli_encrypt(&b.state, s.as_str(), k)?.scale(w), keys: keys_b });
                    }
                }
                self.branches = next;
            }
            Mode::Sampled { .. } | Mode::Physical { .. } => {
                let k = PauliKey::random(q, &mut self.rng);
                for b in &mut self.branches {
                    b.state = pauli_encrypt(&b.state, s.as_str(), &k)?;
                    b.keys.insert((id, s.clone()), k.clone());
                }
            }
        }
        Ok(())
    }

    fn depolarize(&mut self, s: &SystemId, ports: usize) -> Result<(), SimError> {
        let q = self.branches[0].state.leg(s.as_str()).map(|l| l.qubits as usize).unwrap_or(0);
        let parts: Vec<String> = (0..q).map(|j| format!("{s}#{j}")).collect();
        for b in &mut self.branches {
            let mut st = b.state.split(s.as_str(), &parts)?;
            for p in &parts {
                let ch = pbt_channel(Leg::new(p.clone(), 1), ports)?;
                st = kraus_apply(&st, &ch)?;
            }
            let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
            b.state = st.fuse(&refs, s.as_str())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build::CircuitBuilder;
    use crate::geometry::{Point, Spacetime};
    use crate::quantum::{channel_distance, matrix};

    fn mk(t: f64, x: f64) -> Point {
        Point::Minkowski { t, x }
    }

    #[test]
    fn single_wire_is_identity() {
        let mut b = CircuitBuilder::new(Spacetime::minkowski());
        b.input("c", mk(0.0, 0.0), 1).output("r", mk(1.0, 0.0), 1).edge("c", "r", 1);
        b.identity_channel("c").unwrap().identity_channel("r").unwrap();
        let circ = b.build().unwrap();
        let ch = effective_channel(&circ).unwrap();
        let id = QuantumChannel::identity(ch.in_legs.clone(), ch.out_legs.clone()).unwrap();
        assert!(channel_distance(&ch, &id).unwrap() < 1e-12);
    }

    #[test]
    fn gate_applies_its_channel() {
        let mut b = CircuitBuilder::new(Spacetime::minkowski());
        b.input("c", mk(0.0, 0.0), 1).gate("g", mk(1.0, 0.0)).output("r", mk(2.0, 0.0), 1);
        b.edge("c", "g", 1).edge("g", "r", 1);
        b.identity_channel("c").unwrap().identity_channel("r").unwrap();
        let e_in = crate::circuit::build::transit_id("c", "g");
        let e_out = crate::circuit::build::transit_id("g", "r");
        b.channel("g", &[e_in], &[e_out], vec![matrix::hadamard()]).unwrap();
        let circ = b.build().unwrap();
        let ch = effective_channel(&circ).unwrap();
        let h = QuantumChannel::unitary(ch.in_legs.clone(), ch.out_legs.clone(), matrix::hadamard()).unwrap();
        assert!(channel_distance(&ch, &h).unwrap() < 1e-12);
    }
}
