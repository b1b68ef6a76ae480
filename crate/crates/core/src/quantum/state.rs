// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU32, Ordering};

use serde::{Deserialize, Serialize};

use super::matrix::{self, CMatrix, ONE, ZERO};
use super::QuantumError;

/// Default cap on the number of qubits a dense state may hold.
pub const DEFAULT_MAX_QUBITS: u32 = 12;

static MAX_QUBITS: AtomicU32 = AtomicU32::new(DEFAULT_MAX_QUBITS);

pub fn max_qubits() -> u32 {
    MAX_QUBITS.load(Ordering::Relaxed)
}

/// Changes the process-wide dense-state cap.
pub fn set_max_qubits(n: u32) {
    MAX_QUBITS.store(n, Ordering::Relaxed);
}

pub(crate) fn check_cap(qubits: u32) -> Result<(), QuantumError> {
    let cap = max_qubits();
    if qubits > cap {
        Err(QuantumError::QubitCap { requested: qubits, cap })
    } else {
        Ok(())
    }
}

/// A named tensor factor of `qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    pub qubits: u32,
}

impl Leg {
    pub fn new(name: impl Into<String>, qubits: u32) -> Self {
        Leg { name: name.into(), qubits }
    }

    pub fn dim(&self) -> usize {
        1usize << self.qubits
    }
}

pub fn total_dim(legs: &[Leg]) -> usize {
    legs.iter().map(Leg::dim).product()
}

pub fn total_qubits(legs: &[Leg]) -> u32 {
    legs.iter().map(|l| l.qubits).sum()
}

/// A (possibly subnormalised) density operator over an ordered list of legs.
/// Basis ordering is big-endian: the first leg is the most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    legs: Vec<Leg>,
    matrix: CMatrix,
}

impl DensityState {
    pub fn new(legs: Vec<Leg>, matrix: CMatrix) -> Result<Self, QuantumError> {
        check_unique(&legs)?;
        check_cap(total_qubits(&legs))?;
        let d = total_dim(&legs);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(QuantumError::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(DensityState { legs, matrix })
    }

    /// The trivial one-dimensional state with no legs.
    pub fn scalar() -> Self {
        DensityState { legs: Vec::new(), matrix: CMatrix::from_element(1, 1, ONE) }
    }

    pub fn basis(legs: Vec<Leg>, index: usize) -> Result<Self, QuantumError> {
        let d = total_dim(&legs);
        if index >= d {
            return Err(QuantumError::DimensionMismatch { expected: d, found: index });
        }
        Self::new(legs, matrix::basis_projector(d, index))
    }

    pub fn maximally_mixed(legs: Vec<Leg>) -> Result<Self, QuantumError> {
        let d = total_dim(&legs);
        Self::new(legs, matrix::identity(d).scale(1.0 / d as f64))
    }

    /// `|v⟩⟨v|` for a state vector `v`.
    pub fn pure(legs: Vec<Leg>, v: &[num_complex::Complex64]) -> Result<Self, QuantumError> {
        let col = CMatrix::from_column_slice(v.len(), 1, v);
        Self::new(legs, &col * col.adjoint())
    }

    /// Normalised maximally entangled state between `a` and `b` (same size).
    pub fn max_entangled(a: Leg, b: Leg) -> Result<Self, QuantumError> {
        if a.qubits != b.qubits {
            return Err(QuantumError::DimensionMismatch { expected: a.dim(), found: b.dim() });
        }
        let d = a.dim();
        let mut v = vec![ZERO; d * d];
        let amp = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            v[i * d + i] = matrix::c(amp, 0.0);
        }
        Self::pure(vec![a, b], &v)
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn qubits(&self) -> u32 {
        total_qubits(&self.legs)
    }

    pub fn has_leg(&self, name: &str) -> bool {
        self.legs.iter().any(|l| l.name == name)
    }

    pub fn leg(&self, name: &str) -> Option<&Leg> {
        self.legs.iter().find(|l| l.name == name)
    }

    pub fn trace(&self) -> num_complex::Complex64 {
        self.matrix.trace()
    }

    pub fn scale(&self, w: f64) -> Self {
        DensityState { legs: self.legs.clone(), matrix: self.matrix.scale(w) }
    }

    /// Adds another state with the same leg order.
    pub fn add(&self, other: &DensityState) -> Result<Self, QuantumError> {
        if self.legs != other.legs {
            return Err(QuantumError::LegMismatch(format!(
                "cannot add states over {:?} and {:?}",
                names(&self.legs),
                names(&other.legs)
            )));
        }
        Ok(DensityState { legs: self.legs.clone(), matrix: &self.matrix + &other.matrix })
    }

    /// Checks Hermiticity, unit trace and positivity at the given tolerances.
    pub fn validate(&self, tol: f64, psd_tol: f64) -> Result<(), QuantumError> {
        if !matrix::is_hermitian(&self.matrix, tol) {
            return Err(QuantumError::InvalidState("not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(QuantumError::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = matrix::min_eigenvalue(&self.matrix);
        if min < -psd_tol {
            return Err(QuantumError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Kronecker product with concatenated legs.
    pub fn tensor(&self, other: &DensityState) -> Result<Self, QuantumError> {
        let mut legs = self.legs.clone();
        legs.extend(other.legs.iter().cloned());
        check_unique(&legs)?;
        check_cap(total_qubits(&legs))?;
        Ok(DensityState { legs, matrix: matrix::kron(&self.matrix, &other.matrix) })
    }

    pub fn rename_leg(&mut self, from: &str, to: &str) -> Result<(), QuantumError> {
        if from != to && self.has_leg(to) {
            return Err(QuantumError::LegCollision(to.to_string()));
        }
        let leg = self
            .legs
            .iter_mut()
            .find(|l| l.name == from)
            .ok_or_else(|| QuantumError::UnknownLeg(from.to_string()))?;
        leg.name = to.to_string();
        Ok(())
    }

    /// Reorders the tensor factors to `order`, which must name every leg once.
    pub fn permute(&self, order: &[&str]) -> Result<Self, QuantumError> {
        if order.len() != self.legs.len() {
            return Err(QuantumError::LegMismatch(format!(
                "permutation {:?} does not cover legs {:?}",
                order,
                names(&self.legs)
            )));
        }
        let mut perm = Vec::with_capacity(order.len());
        for name in order {
            let pos = self
                .legs
                .iter()
                .position(|l| l.name == *name)
                .ok_or_else(|| QuantumError::UnknownLeg(name.to_string()))?;
            if perm.contains(&pos) {
                return Err(QuantumError::LegCollision(name.to_string()));
            }
            perm.push(pos);
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let new_legs: Vec<Leg> = perm.iter().map(|&p| self.legs[p].clone()).collect();
        let map = index_map(&self.legs, &perm);
        let d = self.dim();
        let matrix = CMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(DensityState { legs: new_legs, matrix })
    }

    /// Applies the Kraus family `ops` (each `dim(out) × dim(in)`) to the legs
    /// `in_legs`, which are replaced by `out_legs` appended at the end.
    pub fn apply_kraus(
        &self,
        in_legs: &[&str],
        out_legs: &[Leg],
        ops: &[CMatrix],
    ) -> Result<Self, QuantumError> {
        let mut order: Vec<&str> = self
            .legs
            .iter()
            .map(|l| l.name.as_str())
            .filter(|n| !in_legs.contains(n))
            .collect();
        let rest_legs: Vec<Leg> = order.iter().map(|n| self.leg(n).unwrap().clone()).collect();
        for n in in_legs {
            if !self.has_leg(n) {
                return Err(QuantumError::UnknownLeg(n.to_string()));
            }
        }
        order.extend_from_slice(in_legs);
        let mut new_legs = rest_legs.clone();
        for l in out_legs {
            if new_legs.iter().any(|x| x.name == l.name) {
                return Err(QuantumError::LegCollision(l.name.clone()));
            }
            new_legs.push(l.clone());
        }
        check_cap(total_qubits(&new_legs))?;
        let st = self.permute(&order)?;
        let dr = total_dim(&rest_legs);
        let di = st.dim() / dr;
        let dout = total_dim(out_legs);
        for k in ops {
            if k.nrows() != dout || k.ncols() != di {
                return Err(QuantumError::DimensionMismatch {
                    expected: dout * di,
                    found: k.nrows() * k.ncols(),
                });
            }
        }
        let d = st.dim();
        let dn = dr * dout;
        let mut out = CMatrix::zeros(dn, dn);
        for k in ops {
            // (1 ⊗ K) ρ
            let mut left = CMatrix::zeros(dn, d);
            for a in 0..dr {
                let block = st.matrix.rows(a * di, di);
                left.rows_mut(a * dout, dout).copy_from(&(k * block));
            }
            // (...)(1 ⊗ K)†
            let kd = k.adjoint();
            for b in 0..dr {
                let block = left.columns(b * di, di);
                let prod = block * &kd;
                let mut target = out.columns_mut(b * dout, dout);
                target += prod;
            }
        }
        Ok(DensityState { legs: new_legs, matrix: out })
    }

    /// Applies a unitary (or any square operator) on the given legs, keeping
    /// the leg order unchanged.
    pub fn apply_unitary(&self, legs: &[&str], u: &CMatrix) -> Result<Self, QuantumError> {
        let out_legs: Vec<Leg> = legs
            .iter()
            .map(|n| self.leg(n).cloned().ok_or_else(|| QuantumError::UnknownLeg(n.to_string())))
            .collect::<Result<_, _>>()?;
        let original: Vec<String> = self.legs.iter().map(|l| l.name.clone()).collect();
        let tmp = self.apply_kraus(legs, &out_legs, std::slice::from_ref(u))?;
        let order: Vec<&str> = original.iter().map(String::as_str).collect();
        tmp.permute(&order)
    }

    /// Joins `parts` (in that order) into one leg `name`, placed last.
    pub fn fuse(&self, parts: &[&str], name: &str) -> Result<Self, QuantumError> {
        let mut order: Vec<&str> = names(&self.legs).into_iter().filter(|n| !parts.contains(n)).collect();
        let rest = order.len();
        order.extend_from_slice(parts);
        let mut st = self.permute(&order)?;
        let qubits = total_qubits(&st.legs[rest..]);
        st.legs.truncate(rest);
        if st.has_leg(name) {
            return Err(QuantumError::LegCollision(name.to_string()));
        }
        st.legs.push(Leg::new(name, qubits));
        Ok(st)
    }

    /// Splits leg `leg` into one-qubit legs named `parts`, in place.
    pub fn split(&self, leg: &str, parts: &[String]) -> Result<Self, QuantumError> {
        let pos = self
            .legs
            .iter()
            .position(|l| l.name == leg)
            .ok_or_else(|| QuantumError::UnknownLeg(leg.to_string()))?;
        let q = self.legs[pos].qubits as usize;
        if parts.len() != q {
            return Err(QuantumError::DimensionMismatch { expected: q, found: parts.len() });
        }
        let mut legs = self.legs[..pos].to_vec();
        legs.extend(parts.iter().map(|n| Leg::new(n.clone(), 1)));
        legs.extend_from_slice(&self.legs[pos + 1..]);
        check_unique(&legs)?;
        Ok(DensityState { legs, matrix: self.matrix.clone() })
    }

    /// Traces out `drop`, preserving the order of the remaining legs.
    pub fn partial_trace(&self, drop: &[&str]) -> Result<Self, QuantumError> {
        for n in drop {
            if !self.has_leg(n) {
                return Err(QuantumError::UnknownLeg(n.to_string()));
            }
        }
        let drop_legs: Vec<Leg> = drop.iter().map(|n| self.leg(n).unwrap().clone()).collect();
        let dd = total_dim(&drop_legs);
        let ops: Vec<CMatrix> = (0..dd)
            .map(|x| {
                let mut row = CMatrix::zeros(1, dd);
                row[(0, x)] = ONE;
                row
            })
            .collect();
        self.apply_kraus(drop, &[], &ops)
    }

    /// Keeps only `keep` (in that order), tracing out everything else.
    pub fn reduce_to(&self, keep: &[&str]) -> Result<Self, QuantumError> {
        let drop: Vec<&str> = self
            .legs
            .iter()
            .map(|l| l.name.as_str())
            .filter(|n| !keep.contains(n))
            .collect();
        self.partial_trace(&drop)?.permute(keep)
    }
}

fn names(legs: &[Leg]) -> Vec<&str> {
    legs.iter().map(|l| l.name.as_str()).collect()
}

#[derive(Serialize, Deserialize)]
struct RawState {
    legs: Vec<Leg>,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Serialize for DensityState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawState { legs: self.legs.clone(), matrix: matrix::serde_cmatrix::to_rows(&self.matrix) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawState::deserialize(d)?;
        let m = matrix::serde_cmatrix::from_rows(&raw.matrix).map_err(D::Error::custom)?;
        DensityState::new(raw.legs, m).map_err(D::Error::custom)
    }
}

fn check_unique(legs: &[Leg]) -> Result<(), QuantumError> {
    let mut seen = BTreeSet::new();
    for l in legs {
        if !seen.insert(l.name.as_str()) {
            return Err(QuantumError::LegCollision(l.name.clone()));
        }
    }
    Ok(())
}

/// For the leg permutation `perm` (new position -> old position), maps every
/// new basis index to the old basis index.
fn index_map(old_legs: &[Leg], perm: &[usize]) -> Vec<usize> {
    let n = old_legs.len();
    // stride of each old leg in the old ordering
    let mut old_stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        old_stride[i] = old_stride[i + 1] * old_legs[i + 1].dim();
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| old_legs[p].dim()).collect();
    let d: usize = new_dims.iter().product();
    let mut map = vec![0usize; d];
    let mut digits = vec![0usize; n];
    for (idx, slot) in map.iter_mut().enumerate() {
        let mut rem = idx;
        for k in (0..n).rev() {
            digits[k] = rem % new_dims[k];
            rem /= new_dims[k];
        }
        *slot = perm.iter().zip(&digits).map(|(&p, &dg)| dg * old_stride[p]).sum();
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::{c, max_abs_diff};

    fn q(name: &str) -> Leg {
        Leg::new(name, 1)
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = DensityState::basis(vec![q("a")], 0).unwrap();
        let b = DensityState::basis(vec![q("b")], 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(1, 1)] = ONE;
        assert_eq!(ab.matrix(), &expect);
        assert!(matches!(a.tensor(&a), Err(QuantumError::LegCollision(_))));
    }

    #[test]
    fn tensor_of_mixed_is_mixed() {
        let a = DensityState::maximally_mixed(vec![q("a")]).unwrap();
        let b = DensityState::maximally_mixed(vec![q("b")]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert!(max_abs_diff(ab.matrix(), &matrix::identity(4).scale(0.25)) < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let s = DensityState::basis(vec![q("a"), q("b")], 0).unwrap();
        let r = s.partial_trace(&["b"]).unwrap();
        assert_eq!(r.matrix(), &matrix::basis_projector(2, 0));
        let bell = DensityState::max_entangled(q("a"), q("b")).unwrap();
        let r = bell.partial_trace(&["a"]).unwrap();
        assert!(max_abs_diff(r.matrix(), &matrix::identity(2).scale(0.5)) < 1e-15);
        assert!(matches!(bell.partial_trace(&["z"]), Err(QuantumError::UnknownLeg(_))));
    }

    #[test]
    fn permute_swaps_factors() {
        let a = DensityState::basis(vec![q("a")], 1).unwrap();
        let b = DensityState::basis(vec![Leg::new("b", 2)], 2).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        assert_eq!(ab.permute(&["b", "a"]).unwrap(), ba);
    }

    #[test]
    fn unitary_on_one_leg() {
        let s = DensityState::basis(vec![q("a"), q("b")], 0).unwrap();
        let t = s.apply_unitary(&["b"], &matrix::pauli_x()).unwrap();
        assert_eq!(t.legs()[1].name, "b");
        assert_eq!(t.matrix()[(1, 1)], ONE);
        let y = s.apply_unitary(&["a"], &matrix::pauli_y()).unwrap();
        assert!((y.matrix()[(2, 2)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn validate_rejects_bad_states() {
        let bad = DensityState::new(vec![q("a")], matrix::identity(2)).unwrap();
        assert!(bad.validate(1e-10, 1e-9).is_err());
        let ok = DensityState::maximally_mixed(vec![q("a")]).unwrap();
        assert!(ok.validate(1e-10, 1e-9).is_ok());
    }

    #[test]
    fn cap_is_enforced() {
        let big = vec![Leg::new("a", 7), Leg::new("b", 7)];
        assert!(matches!(
            DensityState::new(big, CMatrix::zeros(1, 1)),
            Err(QuantumError::QubitCap { .. })
        ));
    }
}
