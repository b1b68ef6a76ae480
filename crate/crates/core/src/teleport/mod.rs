// SPDX-License-Identifier: Apache-2.0

//! Teleportation primitives: exact normal teleportation split into an
//! encryption at the sender and a Pauli decryption at the receiver, the
//! idealised port-based relocation, and finite-N port-based teleportation.

mod pbt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::matrix::{self, CMatrix};
use crate::quantum::{DensityState, Leg, QuantumChannel, QuantumError};

pub use pbt::{pbt_channel, pbt_fidelity, pbt_finite_send, pbt_povm, pbt_signal_operators};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TeleportError {
    #[error("resource leg `{0}` is missing or not a single qubit")]
    ResourceMissing(String),
    #[error("key covers {key} qubits but the payload has {payload}")]
    KeyLengthMismatch { key: usize, payload: usize },
    #[error("port-based teleportation needs at least 2 ports, got {0}")]
    TooFewPorts(usize),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Classical outcome of a normal teleportation: `(a, b)` per qubit; the
/// receiver holds `X^a Z^b ψ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliKey {
    pub bits: Vec<(u8, u8)>,
}

impl PauliKey {
    pub fn zero(qubits: usize) -> Self {
        PauliKey { bits: vec![(0, 0); qubits] }
    }

    pub fn random(qubits: usize, rng: &mut impl Rng) -> Self {
        PauliKey { bits: (0..qubits).map(|_| (rng.gen_range(0..2), rng.gen_range(0..2))).collect() }
    }

    /// All `4^qubits` keys in lexicographic order.
    pub fn all(qubits: usize) -> Vec<PauliKey> {
        (0..1usize << (2 * qubits))
            .map(|code| PauliKey {
                bits: (0..qubits)
                    .map(|j| {
                        let pair = (code >> (2 * (qubits - 1 - j))) & 3;
                        ((pair >> 1) as u8, (pair & 1) as u8)
                    })
                    .collect(),
            })
            .collect()
    }

    /// `⊗_j X^{a_j} Z^{b_j}`, first qubit most significant.
    pub fn operator(&self) -> CMatrix {
        self.bits.iter().fold(matrix::identity(1), |acc, &(a, b)| {
            let mut p = matrix::identity(2);
            if b == 1 {
                p = matrix::pauli_z() * p;
            }
            if a == 1 {
                p = matrix::pauli_x() * p;
            }
            matrix::kron(&acc, &p)
        })
    }
}

/// Index of the port holding the payload. `None` stands for the idealised
/// infinite-port primitive, whose index is never materialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortKey {
    pub index: Option<usize>,
    pub ports: Option<usize>,
}

impl PortKey {
    pub fn ideal() -> Self {
        PortKey { index: None, ports: None }
    }
}

/// `k` Bell pairs `|Φ+⟩` on legs `a0, b0, a1, b1, ...`.
pub fn bell_pairs(k: usize) -> Result<DensityState, QuantumError> {
    let mut st = DensityState::scalar();
    for i in 0..k {
        st = st.tensor(&DensityState::max_entangled(Leg::new(format!("a{i}"), 1), Leg::new(format!("b{i}"), 1))?)?;
    }
    Ok(st)
}

fn leg_qubits(st: &DensityState, leg: &str) -> Result<usize, TeleportError> {
    Ok(st.leg(leg).ok_or_else(|| QuantumError::UnknownLeg(leg.to_string()))?.qubits as usize)
}

/// Applies `X^a Z^b` to `leg`, which is what the receiver holds after a
/// teleportation with outcome `key`.
pub fn pauli_encrypt(st: &DensityState, leg: &str, key: &PauliKey) -> Result<DensityState, TeleportError> {
    let q = leg_qubits(st, leg)?;
    if key.bits.len() != q {
        return Err(TeleportError::KeyLengthMismatch { key: key.bits.len(), payload: q });
    }
    Ok(st.apply_unitary(&[leg], &key.operator())?)
}

/// Undoes the teleportation key: conjugation by `Z^b X^a`.
pub fn nt_decrypt(st: &DensityState, leg: &str, key: &PauliKey) -> Result<DensityState, TeleportError> {
    let q = leg_qubits(st, leg)?;
    if key.bits.len() != q {
        return Err(TeleportError::KeyLengthMismatch { key: key.bits.len(), payload: q });
    }
    Ok(st.apply_unitary(&[leg], &key.operator().adjoint())?)
}

/// Bell-basis measurement of `src` qubit by qubit against the sender halves
/// of `resources` (`(sender, receiver)` one-qubit legs). Returns every
/// outcome branch: the subnormalised state with `src` and sender halves
/// removed and the receiver halves fused into one leg called `dest`.
pub fn nt_encrypt_branches(
    st: &DensityState,
    src: &str,
    resources: &[(String, String)],
    dest: &str,
) -> Result<Vec<(PauliKey, DensityState)>, TeleportError> {
    let q = leg_qubits(st, src)?;
    if resources.len() != q {
        return Err(TeleportError::KeyLengthMismatch { key: resources.len(), payload: q });
    }
    for (a, b) in resources {
        for leg in [a, b] {
            if st.leg(leg).map(|l| l.qubits) != Some(1) {
                return Err(TeleportError::ResourceMissing(leg.clone()));
            }
        }
    }
    let parts: Vec<String> = (0..q).map(|j| format!("{src}#{j}")).collect();
    let mut branches = vec![(Vec::new(), st.split(src, &parts)?)];
    for (j, (a, _)) in resources.iter().enumerate() {
        let s = parts[j].as_str();
        // CNOT s -> a, then H on s.
        let cnot = CMatrix::from_fn(4, 4, |r, c| {
            let target = if c >= 2 { c ^ 1 } else { c };
            if r == target { matrix::ONE } else { matrix::ZERO }
        });
        let h = matrix::kron(&matrix::hadamard(), &matrix::identity(2));
        let u = h * cnot;
        let mut next = Vec::with_capacity(branches.len() * 4);
        for (bits, b_st) in branches {
            let rotated = b_st.apply_unitary(&[s, a.as_str()], &u)?;
            for m_src in 0..2u8 {
                for m_a in 0..2u8 {
                    let row = |m: u8| {
                        let mut r = CMatrix::zeros(1, 2);
                        r[(0, m as usize)] = matrix::ONE;
                        r
                    };
                    let proj = matrix::kron(&row(m_src), &row(m_a));
                    let post = rotated.apply_kraus(&[s, a.as_str()], &[], &[proj])?;
                    let mut bits = bits.clone();
                    bits.push((m_a, m_src));
                    next.push((bits, post));
                }
            }
        }
        branches = next;
    }
    let receivers: Vec<&str> = resources.iter().map(|(_, b)| b.as_str()).collect();
    branches
        .into_iter()
        .map(|(bits, b_st)| Ok((PauliKey { bits }, b_st.fuse(&receivers, dest)?)))
        .collect()
}

/// Physical normal teleportation with a sampled measurement outcome. The
/// returned state is normalised.
pub fn nt_encrypt(
    st: &DensityState,
    src: &str,
    resources: &[(String, String)],
    dest: &str,
    rng: &mut impl Rng,
) -> Result<(DensityState, PauliKey), TeleportError> {
    let branches = nt_encrypt_branches(st, src, resources, dest)?;
    let total: f64 = branches.iter().map(|(_, b)| b.trace().re).sum();
    let mut x = rng.gen::<f64>() * total;
    let last = branches.len() - 1;
    for (i, (key, b)) in branches.into_iter().enumerate() {
        let w = b.trace().re;
        if x < w || i == last {
            return Ok((b.scale(1.0 / w), key));
        }
        x -= w;
    }
    unreachable!("branch list is nonempty")
}

/// The receiver's channel when the key is never learned: the key-averaged
/// Pauli twirl on `qubits` qubits.
pub fn nt_keyless_channel(legs: Vec<Leg>) -> Result<QuantumChannel, QuantumError> {
    let q: u32 = legs.iter().map(|l| l.qubits).sum();
    let w = 1.0 / f64::from(1u32 << q);
    let kraus = PauliKey::all(q as usize).iter().map(|k| k.operator().scale(w)).collect();
    QuantumChannel::new(legs.clone(), legs, kraus)
}

/// Idealised port-based teleportation: the payload is relocated to `dest`.
/// Its protection without the key is tracked by the caller.
pub fn pbt_ideal_send(st: &DensityState, payload: &str, dest: &str) -> Result<(DensityState, PortKey), TeleportError> {
    let mut out = st.clone();
    out.rename_leg(payload, dest)?;
    Ok((out, PortKey::ideal()))
}

/// What a receiver without the port index can do with an ideal
/// port-teleported payload, in the infinite-port limit: nothing.
pub fn pbt_ideal_keyless_channel(legs: Vec<Leg>) -> Result<QuantumChannel, QuantumError> {
    QuantumChannel::completely_depolarizing(legs.clone(), legs)
}
