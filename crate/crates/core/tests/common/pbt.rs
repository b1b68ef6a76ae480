// SPDX-License-Identifier: Apache-2.0

//! Port-based teleportation oracles shared by test targets. Nothing here
//! uses the library.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Real matrix of `|Φ+⟩⟨Φ+|_{A_i C} ⊗ 1 / 2^{N-1}` built from Kronecker
/// products and a qubit permutation, over (A_1..A_N, C).
fn sigma_dense(n: usize, i: usize) -> DMatrix<f64> {
    let phi = DMatrix::from_row_slice(4, 4, &[0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5]);
    // Build on ordering (A_i, C, rest...) then permute qubits.
    let rest = DMatrix::<f64>::identity(1 << (n - 1), 1 << (n - 1)).scale(0.5f64.powi(n as i32 - 1));
    let m = phi.kronecker(&rest);
    // position in the built ordering of each target qubit
    let total = n + 1;
    let mut src_of_target = vec![0usize; total];
    let mut next_rest = 2;
    for (t, slot) in src_of_target.iter_mut().enumerate() {
        *slot = if t == i {
            0
        } else if t == n {
            1
        } else {
            let s = next_rest;
            next_rest += 1;
            s
        };
    }
    let d = 1usize << total;
    let map = |x: usize| -> usize {
        let mut y = 0;
        for t in 0..total {
            let bit = (x >> (total - 1 - t)) & 1;
            y |= bit << (total - 1 - src_of_target[t]);
        }
        y
    };
    DMatrix::from_fn(d, d, |r, c| m[(map(r), map(c))])
}

pub fn dense_povm(n: usize) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let sig: Vec<DMatrix<f64>> = (0..n).map(|i| sigma_dense(n, i)).collect();
    let d = sig[0].nrows();
    let rho = sig.iter().fold(DMatrix::zeros(d, d), |a, s| a + s);
    let eig = SymmetricEigen::new(rho);
    let f = |g: &dyn Fn(f64) -> f64| {
        let mut v = eig.eigenvectors.clone();
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            let s = g(l);
            v.column_mut(k).scale_mut(s);
        }
        &v * eig.eigenvectors.transpose()
    };
    let inv_sqrt = f(&|l| if l > 1e-12 { 1.0 / l.sqrt() } else { 0.0 });
    let kernel = f(&|l| if l > 1e-12 { 0.0 } else { 1.0 });
    let povm = sig.iter().map(|s| &inv_sqrt * s * &inv_sqrt + kernel.scale(1.0 / n as f64)).collect();
    (sig, povm)
}

pub fn dense_fidelity(n: usize) -> f64 {
    let (sig, povm) = dense_povm(n);
    sig.iter().zip(&povm).map(|(s, p)| (p * s).trace()).sum::<f64>() / 4.0
}

/// Entanglement fidelity from simulating R, C, A_1..A_N, B_1..B_N as a pure
/// vector and measuring the POVM.
pub fn protocol_fidelity(n: usize) -> f64 {
    // qubit order: R, C, A_1..A_N, B_1..B_N
    let q = 2 + 2 * n;
    let d = 1usize << q;
    let bit = |x: usize, pos: usize| (x >> (q - 1 - pos)) & 1;
    let mut psi = DVector::<f64>::zeros(d);
    let amp = (0.5f64).powf((n + 1) as f64 / 2.0);
    for x in 0..d {
        let ok = bit(x, 0) == bit(x, 1) && (0..n).all(|i| bit(x, 2 + i) == bit(x, 2 + n + i));
        if ok {
            psi[x] = amp;
        }
    }
    let (_, povm) = dense_povm(n);
    let mut f = 0.0;
    for (i, p) in povm.iter().enumerate() {
        // rho_out(R, B_i) = tr_{rest} (P_i ⊗ 1) |psi><psi|, with P_i on (A.., C)
        let mut out = DMatrix::<f64>::zeros(4, 4);
        for x in 0..d {
            if psi[x] == 0.0 {
                continue;
            }
            for y in 0..d {
                if psi[y] == 0.0 {
                    continue;
                }
                // (P ⊗ 1)|psi><psi| traced: sum over x' with same untouched bits
                let reg = |z: usize| -> usize {
                    let mut r = 0;
                    for i2 in 0..n {
                        r = (r << 1) | bit(z, 2 + i2);
                    }
                    (r << 1) | bit(z, 1)
                };
                let others_eq = (0..n).filter(|&j| j != i).all(|j| bit(x, 2 + n + j) == bit(y, 2 + n + j));
                if !others_eq {
                    continue;
                }
                // tr_{AC}[P |x_AC><y_AC|] = P[y_AC, x_AC]
                let w = p[(reg(y), reg(x))] * psi[x] * psi[y];
                let ro = bit(x, 0) * 2 + bit(x, 2 + n + i);
                let co = bit(y, 0) * 2 + bit(y, 2 + n + i);
                out[(ro, co)] += w;
            }
        }
        // <Φ+| out |Φ+>
        f += 0.5 * (out[(0, 0)] + out[(0, 3)] + out[(3, 0)] + out[(3, 3)]);
    }
    f
}

/// `⟨ψ| M^{-1/2} |ψ⟩` by Lanczos, where `apply` multiplies by `M`.
fn lanczos_inv_sqrt(psi: &DVector<f64>, apply: &dyn Fn(&DVector<f64>) -> DVector<f64>) -> f64 {
    let norm = psi.norm();
    let mut v = psi / norm;
    let mut v_prev = DVector::zeros(psi.len());
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut beta = 0.0;
    for _ in 0..60 {
        let mut w = apply(&v);
        let a = w.dot(&v);
        w -= &v * a + &v_prev * beta;
        alphas.push(a);
        beta = w.norm();
        if beta < 1e-11 {
            break;
        }
        betas.push(beta);
        v_prev = v;
        v = w / beta;
    }
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut s = 0.0;
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let c = eig.eigenvectors[(0, j)];
        s += c * c / l.sqrt();
    }
    s * norm * norm
}

fn binom(n: usize, k: isize) -> f64 {
    if k < 0 || k as usize > n {
        return 0.0;
    }
    let k = k as usize;
    (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64)
}

/// Matrix-free fidelity using the symmetry of `ρ = Σ σ_i`.
pub fn lanczos_fidelity(n: usize) -> f64 {
    let q = n + 1;
    let d = 1usize << q;
    let scale = 0.5f64.powi(n as i32);
    let apply = |v: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(d);
        for i in 0..n {
            let ba = q - 1 - i;
            let mask = (1usize << ba) | 1;
            for x in 0..d {
                if ((x >> ba) & 1) != (x & 1) {
                    continue;
                }
                let rest = x & !mask;
                out[x] += scale * (v[rest] + v[rest | mask]);
            }
        }
        out
    };
    let rest = n - 1;
    let mut total = 0.0;
    let mut twice = rest as isize;
    while twice >= 0 {
        let singlets = (rest - twice as usize) / 2;
        // ψ = Φ+_{A_1 C} ⊗ singlets on (A_2,A_3),(A_4,A_5)... ⊗ |↑...↑⟩
        let mut psi = DVector::<f64>::zeros(d);
        for x in 0..d {
            let a1 = (x >> (q - 1)) & 1;
            if a1 != (x & 1) {
                continue;
            }
            let mut amp = std::f64::consts::FRAC_1_SQRT_2;
            for s in 0..singlets {
                let p1 = (x >> (q - 2 - 2 * s)) & 1;
                let p2 = (x >> (q - 3 - 2 * s)) & 1;
                amp *= match (p1, p2) {
                    (0, 1) => std::f64::consts::FRAC_1_SQRT_2,
                    (1, 0) => -std::f64::consts::FRAC_1_SQRT_2,
                    _ => 0.0,
                };
            }
            for u in 0..twice as usize {
                if (x >> (q - 2 - 2 * singlets - u)) & 1 != 0 {
                    amp = 0.0;
                }
            }
            psi[x] = amp;
        }
        let x_j = lanczos_inv_sqrt(&psi, &apply);
        let j = twice as f64 / 2.0;
        let mult = binom(rest, singlets as isize) - binom(rest, singlets as isize - 1);
        total += x_j * x_j * (2.0 * j + 1.0) * mult;
        twice -= 2;
    }
    n as f64 / 4.0 * 0.5f64.powi(2 * (n as i32 - 1)) * total
}
