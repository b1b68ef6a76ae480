// SPDX-License-Identifier: Apache-2.0

//! Standard port-based teleportation of one qubit with `N` maximally
//! entangled pairs and the square-root measurement.

use rand::Rng;

use super::{PortKey, TeleportError};
use crate::quantum::matrix::{self, CMatrix};
use crate::quantum::{DensityState, Leg, QuantumChannel, QuantumError};

/// `σ_i = 2^{1-N} Φ⁺_{A_i C} ⊗ 1`, on the register `(A_1, ..., A_N, C)`
/// with `C` the least significant qubit.
pub fn pbt_signal_operators(n: usize) -> Result<Vec<CMatrix>, TeleportError> {
    if n < 2 {
        return Err(TeleportError::TooFewPorts(n));
    }
    let d = 1usize << (n + 1);
    let scale = 0.5f64.powi(n as i32);
    Ok((0..n)
        .map(|i| {
            let bit_a = n - i; // position of A_i counted from the least significant end
            let mask = (1usize << bit_a) | 1;
            let mut m = CMatrix::zeros(d, d);
            for x in 0..d {
                let (xa, xc) = ((x >> bit_a) & 1, x & 1);
                if xa != xc {
                    continue;
                }
                let rest = x & !mask;
                for pair in 0..2usize {
                    let y = rest | (pair << bit_a) | pair;
                    m[(x, y)] = matrix::c(scale, 0.0);
                }
            }
            m
        })
        .collect())
}

/// The square-root measurement `Π_i = ρ^{-1/2} σ_i ρ^{-1/2} + Δ/N`, where
/// `ρ = Σ σ_i` and `Δ` projects onto the kernel of `ρ`.
pub fn pbt_povm(n: usize) -> Result<Vec<CMatrix>, TeleportError> {
    let sigmas = pbt_signal_operators(n)?;
    let d = sigmas[0].nrows();
    let rho = sigmas.iter().fold(CMatrix::zeros(d, d), |acc, s| acc + s);
    let cut = 1e-12;
    let inv_sqrt = matrix::hermitian_fn(&rho, |l| if l > cut { 1.0 / l.sqrt() } else { 0.0 });
    let kernel = matrix::hermitian_fn(&rho, |l| if l > cut { 0.0 } else { 1.0 });
    let extra = kernel.scale(1.0 / n as f64);
    Ok(sigmas.iter().map(|s| &inv_sqrt * s * &inv_sqrt + &extra).collect())
}

fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Entanglement fidelity of the protocol with `n` ports, from the
/// spectral decomposition of `ρ` into total-spin sectors.
///
/// With `2j'` running over the spins of `N-1` qubits, the signal vector of
/// port 1 splits over the two couplings `j = j' ± 1/2` of the remaining
/// spin-1/2, with weights `w_±` and `ρ`-eigenvalues `ℓ_± 2^{1-N}`.
pub fn pbt_fidelity(n: usize) -> Result<f64, TeleportError> {
    if n < 2 {
        return Err(TeleportError::TooFewPorts(n));
    }
    let nf = n as f64;
    let c = 0.5f64.powi(n as i32 - 1);
    let rest = n as i64 - 1;
    let mut total = 0.0;
    // twice j' goes from rest down to 0 or 1 in steps of 2
    let mut twice = rest;
    while twice >= 0 {
        let j = twice as f64 / 2.0;
        let k = (rest - twice) / 2;
        let mult = binomial(rest, k) - binomial(rest, k - 1);
        let w_plus = (j + 1.0) / (2.0 * j + 1.0);
        let w_minus = j / (2.0 * j + 1.0);
        let l_plus = nf / 4.0 + j / 2.0 + 0.75;
        let l_minus = nf / 4.0 - j / 2.0 + 0.25;
        let mut amp = w_plus / l_plus.sqrt();
        if w_minus > 0.0 {
            amp += w_minus / l_minus.sqrt();
        }
        total += mult * (2.0 * j + 1.0) * amp * amp;
        twice -= 2;
    }
    Ok(nf * c / 4.0 * total)
}

/// The `n`-port protocol as a channel on one qubit. Covariance of the
/// measurement makes it depolarizing with `p = (4F - 1)/3`.
pub fn pbt_channel(leg: Leg, n: usize) -> Result<QuantumChannel, TeleportError> {
    if leg.qubits != 1 {
        return Err(QuantumError::DimensionMismatch { expected: 2, found: leg.dim() }.into());
    }
    let f = pbt_fidelity(n)?;
    Ok(QuantumChannel::depolarizing(vec![leg], (4.0 * f - 1.0) / 3.0)?)
}

/// Runs the physical protocol: measures the POVM on `(senders, payload)`,
/// samples a port, keeps that receiver port renamed to `dest` and discards
/// the others. `senders[i]` and `receivers[i]` must hold a Bell pair.
pub fn pbt_finite_send(
    st: &DensityState,
    payload: &str,
    senders: &[String],
    receivers: &[String],
    dest: &str,
    rng: &mut impl Rng,
) -> Result<(DensityState, PortKey), TeleportError> {
    let n = senders.len();
    if n < 2 {
        return Err(TeleportError::TooFewPorts(n));
    }
    if receivers.len() != n {
        return Err(TeleportError::ResourceMissing(format!("{} receiver ports for {n} senders", receivers.len())));
    }
    for leg in senders.iter().chain(receivers).map(String::as_str).chain([payload]) {
        if st.leg(leg).map(|l| l.qubits) != Some(1) {
            return Err(TeleportError::ResourceMissing(leg.to_string()));
        }
    }
    let povm = pbt_povm(n)?;
    let mut register: Vec<&str> = senders.iter().map(String::as_str).collect();
    register.push(payload);
    let d = 1usize << (n + 1);
    let outcomes: Vec<DensityState> = povm
        .iter()
        .map(|p| {
            let root = matrix::hermitian_fn(p, |l| l.max(0.0).sqrt());
            let rows: Vec<CMatrix> = (0..d).map(|r| root.rows(r, 1).into_owned()).collect();
            st.apply_kraus(&register, &[], &rows)
        })
        .collect::<Result<_, _>>()?;
    let weights: Vec<f64> = outcomes.iter().map(|o| o.trace().re).collect();
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    let mut pick = n - 1;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            pick = i;
            break;
        }
        x -= w;
    }
    let others: Vec<&str> = receivers.iter().enumerate().filter(|(i, _)| *i != pick).map(|(_, r)| r.as_str()).collect();
    let mut out = outcomes[pick].partial_trace(&others)?.scale(1.0 / weights[pick]);
    out.rename_leg(&receivers[pick], dest)?;
    Ok((out, PortKey { index: Some(pick + 1), ports: Some(n) }))
}
