// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix helpers shared by states and channels.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Projector onto a computational basis state.
pub fn basis_projector(d: usize, i: usize) -> CMatrix {
    unit(d, i, i)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// Real eigenvalues and eigenvectors of a Hermitian matrix. The input is
/// symmetrised first so tiny asymmetries from round-off do not leak in.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.iter().map(|l| l.abs()).sum()
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// `f(m)` for Hermitian `m`, applied through its spectral decomposition.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = vals.len();
    let mut scaled = vecs.clone();
    for (k, &l) in vals.iter().enumerate() {
        let s = f(l);
        for r in 0..d {
            scaled[(r, k)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Serde adapter: matrices travel as row-major nested arrays of `[re, im]`.
pub mod serde_cmatrix {
    use super::*;

    pub fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|col| [m[(r, col)].re, m[(r, col)].im]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, String> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err("ragged matrix rows".into());
        }
        if nr == 0 || nc == 0 {
            return Err("empty matrix".into());
        }
        let mut m = CMatrix::zeros(nr, nc);
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                if !z[0].is_finite() || !z[1].is_finite() {
                    return Err(format!("non-finite entry at ({i}, {j})"));
                }
                m[(i, j)] = c(z[0], z[1]);
            }
        }
        Ok(m)
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
            ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
            let all = Vec::<Vec<Vec<[f64; 2]>>>::deserialize(d)?;
            all.iter().map(|rows| from_rows(rows).map_err(serde::de::Error::custom)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_norm_of_pauli_z_is_two() {
        assert!((trace_norm_hermitian(&pauli_z()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_function_square_root() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let s = hermitian_fn(&m, f64::sqrt);
        assert!(max_abs_diff(&(&s * &s), &m) < 1e-12);
    }

    #[test]
    fn rows_round_trip_and_rejects_ragged() {
        let m = pauli_y();
        let back = serde_cmatrix::from_rows(&serde_cmatrix::to_rows(&m)).unwrap();
        assert_eq!(back, m);
        assert!(serde_cmatrix::from_rows(&[vec![[0.0, 0.0]], vec![]]).is_err());
    }
}
