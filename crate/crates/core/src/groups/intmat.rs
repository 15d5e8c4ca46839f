//! Small exact integer matrices for finite-group actions on lattices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat {
    pub dim: usize,
    pub data: Vec<i64>,
}

impl IntMat {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1;
        }
        IntMat { dim, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            if r.len() != dim {
                return Err(Error::InvalidSpec("action matrix is not square".into()));
            }
        }
        Ok(IntMat {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.dim + j]
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = vec![0i64; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.at(k, j);
                }
            }
        }
        IntMat { dim: d, data: out }
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }

    /// Exact determinant (fraction-free Gaussian elimination over i128).
    pub fn det(&self) -> i128 {
        let d = self.dim;
        if d == 0 {
            return 1;
        }
        let mut m: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..d - 1 {
            if m[k * d + k] == 0 {
                let swap = (k + 1..d).find(|&i| m[i * d + k] != 0);
                match swap {
                    Some(i) => {
                        for j in 0..d {
                            m.swap(k * d + j, i * d + j);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    m[i * d + j] = (m[i * d + j] * m[k * d + k] - m[i * d + k] * m[k * d + j]) / prev;
                }
                m[i * d + k] = 0;
            }
            prev = m[k * d + k];
        }
        sign * m[d * d - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        let d = self.det();
        d == 1 || d == -1
    }
}

/// Index in `Z^dim` of the sublattice generated by `vectors`.
///
/// Returns `None` when the vectors do not span a finite-index sublattice.
/// Computed by integer column reduction to a triangular form; the index is
/// the absolute product of the diagonal.
pub fn lattice_index(dim: usize, vectors: &[Vec<i64>]) -> Option<u128> {
    if dim == 0 {
        return Some(1);
    }
    let mut cols: Vec<Vec<i128>> = vectors
        .iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let mut diag: Vec<i128> = Vec::with_capacity(dim);
    for row in 0..dim {
        // Reduce all columns so that at most one has a nonzero entry in `row`.
        loop {
            let mut nz: Vec<usize> = (0..cols.len()).filter(|&c| cols[c][row] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&c| cols[c][row].abs());
            let (small, big) = (nz[0], nz[1]);
            let q = cols[big][row] / cols[small][row];
            for r in 0..dim {
                let s = cols[small][r];
                cols[big][r] -= q * s;
            }
        }
        match (0..cols.len()).find(|&c| cols[c][row] != 0) {
            Some(c) => {
                diag.push(cols[c][row].abs());
                cols.swap_remove(c);
            }
            None => return None,
        }
    }
    let mut idx: u128 = 1;
    for d in diag {
        idx = idx.checked_mul(d.unsigned_abs())?;
    }
    Some(idx)
}
