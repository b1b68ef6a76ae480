// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::matrix::{self, serde_cmatrix, CMatrix, ZERO};
use super::state::{total_dim, DensityState, Leg};
use super::{QuantumError, STRUCTURAL_TOL};

/// A CPTP map given by Kraus operators from `in_legs` to `out_legs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannel {
    #[serde(rename = "in")]
    pub in_legs: Vec<Leg>,
    #[serde(rename = "out")]
    pub out_legs: Vec<Leg>,
    #[serde(with = "serde_cmatrix::vec")]
    pub kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    /// Builds a channel and checks `∑ K†K = 1` at the structural tolerance.
    pub fn new(in_legs: Vec<Leg>, out_legs: Vec<Leg>, kraus: Vec<CMatrix>) -> Result<Self, QuantumError> {
        let ch = QuantumChannel { in_legs, out_legs, kraus };
        ch.validate(STRUCTURAL_TOL)?;
        Ok(ch)
    }

    pub fn d_in(&self) -> usize {
        total_dim(&self.in_legs)
    }

    pub fn d_out(&self) -> usize {
        total_dim(&self.out_legs)
    }

    pub fn validate(&self, tol: f64) -> Result<(), QuantumError> {
        if self.kraus.is_empty() {
            return Err(QuantumError::InvalidChannel("no Kraus operators".into()));
        }
        let (di, dout) = (self.d_in(), self.d_out());
        for k in &self.kraus {
            if k.nrows() != dout || k.ncols() != di {
                return Err(QuantumError::DimensionMismatch { expected: dout * di, found: k.nrows() * k.ncols() });
            }
        }
        let sum = self.kraus.iter().fold(CMatrix::zeros(di, di), |acc, k| acc + k.adjoint() * k);
        let dev = matrix::max_abs_diff(&sum, &matrix::identity(di));
        if dev > tol {
            return Err(QuantumError::InvalidChannel(format!("completeness violated by {dev:e}")));
        }
        Ok(())
    }

    pub fn identity(in_legs: Vec<Leg>, out_legs: Vec<Leg>) -> Result<Self, QuantumError> {
        let d = total_dim(&in_legs);
        if d != total_dim(&out_legs) {
            return Err(QuantumError::DimensionMismatch { expected: d, found: total_dim(&out_legs) });
        }
        Self::new(in_legs, out_legs, vec![matrix::identity(d)])
    }

    pub fn unitary(in_legs: Vec<Leg>, out_legs: Vec<Leg>, u: CMatrix) -> Result<Self, QuantumError> {
        Self::new(in_legs, out_legs, vec![u])
    }

    /// `ρ ↦ tr(ρ) · 1/d` on the output.
    pub fn completely_depolarizing(in_legs: Vec<Leg>, out_legs: Vec<Leg>) -> Result<Self, QuantumError> {
        let (di, dout) = (total_dim(&in_legs), total_dim(&out_legs));
        let w = 1.0 / (dout as f64).sqrt();
        let mut kraus = Vec::with_capacity(di * dout);
        for o in 0..dout {
            for i in 0..di {
                let mut k = CMatrix::zeros(dout, di);
                k[(o, i)] = matrix::c(w, 0.0);
                kraus.push(k);
            }
        }
        Self::new(in_legs, out_legs, kraus)
    }

    /// `ρ ↦ p ρ + (1-p) tr(ρ) 1/d` on a single register.
    pub fn depolarizing(legs: Vec<Leg>, p: f64) -> Result<Self, QuantumError> {
        let d = total_dim(&legs);
        let full = Self::completely_depolarizing(legs.clone(), legs.clone())?;
        let mut kraus = vec![matrix::identity(d).scale(p.max(0.0).sqrt())];
        let q = (1.0 - p).max(0.0).sqrt();
        kraus.extend(full.kraus.iter().map(|k| k.scale(q)));
        Self::new(legs.clone(), legs, kraus)
    }

    /// Trace out the input and prepare `state` on the output.
    pub fn replace_with(in_legs: Vec<Leg>, state: &DensityState) -> Result<Self, QuantumError> {
        let di = total_dim(&in_legs);
        let (vals, vecs) = matrix::hermitian_eigen(state.matrix());
        let dout = state.dim();
        let mut kraus = Vec::new();
        for (k, &l) in vals.iter().enumerate() {
            if l <= 1e-14 {
                continue;
            }
            for i in 0..di {
                let mut op = CMatrix::zeros(dout, di);
                for o in 0..dout {
                    op[(o, i)] = vecs[(o, k)] * l.sqrt();
                }
                kraus.push(op);
            }
        }
        Self::new(in_legs, state.legs().to_vec(), kraus)
    }

    /// `self` followed by `next`. `next.in_legs` must equal `self.out_legs` in dimension.
    pub fn then(&self, next: &QuantumChannel) -> Result<Self, QuantumError> {
        if self.d_out() != next.d_in() {
            return Err(QuantumError::DimensionMismatch { expected: self.d_out(), found: next.d_in() });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(QuantumChannel { in_legs: self.in_legs.clone(), out_legs: next.out_legs.clone(), kraus })
    }

    /// Mixture `w·self + (1-w)·other`, over the same legs.
    pub fn mix(&self, other: &QuantumChannel, w: f64) -> Result<Self, QuantumError> {
        if self.d_in() != other.d_in() || self.d_out() != other.d_out() {
            return Err(QuantumError::DimensionMismatch { expected: self.d_in() * self.d_out(), found: other.d_in() * other.d_out() });
        }
        let mut kraus: Vec<CMatrix> = self.kraus.iter().map(|k| k.scale(w.sqrt())).collect();
        kraus.extend(other.kraus.iter().map(|k| k.scale((1.0 - w).sqrt())));
        Ok(QuantumChannel { in_legs: self.in_legs.clone(), out_legs: self.out_legs.clone(), kraus })
    }

    pub fn choi(&self) -> ChoiMatrix {
        ChoiMatrix::from_kraus(self.d_in(), self.d_out(), &self.kraus)
    }

    /// Reconstructs a Kraus representation from a Choi matrix.
    pub fn from_choi(in_legs: Vec<Leg>, out_legs: Vec<Leg>, choi: &ChoiMatrix) -> Result<Self, QuantumError> {
        let (di, dout) = (total_dim(&in_legs), total_dim(&out_legs));
        if choi.d_in != di || choi.d_out != dout {
            return Err(QuantumError::DimensionMismatch { expected: di * dout, found: choi.d_in * choi.d_out });
        }
        let (vals, vecs) = matrix::hermitian_eigen(&choi.matrix);
        let mut kraus = Vec::new();
        for (k, &l) in vals.iter().enumerate() {
            if l <= 1e-13 {
                continue;
            }
            let s = l.sqrt();
            let op = CMatrix::from_fn(dout, di, |o, i| vecs[(i * dout + o, k)] * s);
            kraus.push(op);
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(dout, di));
        }
        Ok(QuantumChannel { in_legs, out_legs, kraus })
    }

    /// Applies the channel to the designated legs of `st`. The output legs take
    /// the place of the input legs at the end of the leg list.
    pub fn apply(&self, st: &DensityState) -> Result<DensityState, QuantumError> {
        apply_channel(st, self)
    }
}

/// Applies `ch` on `st`; `ch.in_legs` must all be present with matching sizes.
pub fn apply_channel(st: &DensityState, ch: &QuantumChannel) -> Result<DensityState, QuantumError> {
    for l in &ch.in_legs {
        match st.leg(&l.name) {
            None => return Err(QuantumError::LegMismatch(format!("state has no leg `{}`", l.name))),
            Some(found) if found.qubits != l.qubits => {
                return Err(QuantumError::DimensionMismatch { expected: l.dim(), found: found.dim() })
            }
            _ => {}
        }
    }
    let names: Vec<&str> = ch.in_legs.iter().map(|l| l.name.as_str()).collect();
    st.apply_kraus(&names, &ch.out_legs, &ch.kraus)
}

/// Choi matrix `J = ∑_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, input factor first.
///
/// Equivalently `J = ∑_k vec(K_k) vec(K_k)†` with column-stacking `vec`, so
/// the entry `J[(i·d_out + o), (j·d_out + o')] = ∑_k K_k[o,i] conj(K_k[o',j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub d_in: usize,
    pub d_out: usize,
    pub matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn from_kraus(d_in: usize, d_out: usize, kraus: &[CMatrix]) -> Self {
        let d = d_in * d_out;
        let mut m = CMatrix::zeros(d, d);
        for k in kraus {
            let v = CMatrix::from_fn(d, 1, |r, _| k[(r % d_out, r / d_out)]);
            m += &v * v.adjoint();
        }
        ChoiMatrix { d_in, d_out, matrix: m }
    }

    /// `tr_out J`, which equals the identity for trace-preserving maps.
    pub fn trace_out(&self) -> CMatrix {
        let mut r = CMatrix::from_element(self.d_in, self.d_in, ZERO);
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                let mut s = ZERO;
                for o in 0..self.d_out {
                    s += self.matrix[(i * self.d_out + o, j * self.d_out + o)];
                }
                r[(i, j)] = s;
            }
        }
        r
    }

    /// Trace-norm distance of the normalised Choi states `J/d_in`; lies in `[0, 2]`.
    pub fn distance(&self, other: &ChoiMatrix) -> Result<f64, QuantumError> {
        if self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(QuantumError::DimensionMismatch {
                expected: self.d_in * self.d_out,
                found: other.d_in * other.d_out,
            });
        }
        let diff = (&self.matrix - &other.matrix).scale(1.0 / self.d_in as f64);
        Ok(matrix::trace_norm_hermitian(&diff))
    }
}

impl Serialize for ChoiMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            d_in: usize,
            d_out: usize,
            matrix: Vec<Vec<[f64; 2]>>,
        }
        Raw { d_in: self.d_in, d_out: self.d_out, matrix: serde_cmatrix::to_rows(&self.matrix) }.serialize(s)
    }
}

/// Choi trace distance between two channels with matching dimensions.
pub fn channel_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64, QuantumError> {
    if a.d_in() != b.d_in() || a.d_out() != b.d_out() {
        return Err(QuantumError::DimensionMismatch { expected: a.d_in() * a.d_out(), found: b.d_in() * b.d_out() });
    }
    a.choi().distance(&b.choi())
}

/// True iff the Choi trace distance is at most `tol`.
pub fn channels_equal(a: &QuantumChannel, b: &QuantumChannel, tol: f64) -> Result<bool, QuantumError> {
    Ok(channel_distance(a, b)? <= tol)
}
