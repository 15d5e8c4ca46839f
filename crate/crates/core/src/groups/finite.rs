//! Finite groups given by multiplication tables, acting on `Z^d` by
//! unimodular integer matrices.

use serde::{Deserialize, Serialize};

use super::intmat::IntMat;
use crate::error::{Error, Result};

/// A finite group together with a homomorphism into `GL_d(Z)`.
///
/// Element `0` is the identity. The table and the matrix assignment are
/// validated exhaustively at construction; the group is small by design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    order: u32,
    dim: usize,
    mult: Vec<u32>,
    inv: Vec<u32>,
    matrices: Vec<IntMat>,
}

impl FiniteGroup {
    pub fn new(mult_table: Vec<Vec<u32>>, matrices: Vec<IntMat>) -> Result<Self> {
        let n = mult_table.len() as u32;
        if n == 0 {
            return Err(Error::InvalidSpec("finite part must have order >= 1".into()));
        }
        if matrices.len() != n as usize {
            return Err(Error::InvalidSpec(
                "need one action matrix per finite-part element".into(),
            ));
        }
        let dim = matrices[0].dim;
        let mut mult = Vec::with_capacity((n * n) as usize);
        for row in &mult_table {
            if row.len() != n as usize {
                return Err(Error::InvalidSpec("multiplication table is not square".into()));
            }
            for &x in row {
                if x >= n {
                    return Err(Error::InvalidSpec("table entry out of range".into()));
                }
                mult.push(x);
            }
        }
        let at = |i: u32, j: u32| mult[(i * n + j) as usize];
        for i in 0..n {
            if at(0, i) != i || at(i, 0) != i {
                return Err(Error::InvalidSpec("element 0 is not an identity".into()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if at(at(i, j), k) != at(i, at(j, k)) {
                        return Err(Error::InvalidSpec("table is not associative".into()));
                    }
                }
            }
        }
        let mut inv = vec![u32::MAX; n as usize];
        for i in 0..n {
            match (0..n).find(|&j| at(i, j) == 0 && at(j, i) == 0) {
                Some(j) => inv[i as usize] = j,
                None => return Err(Error::InvalidSpec("table has a non-invertible element".into())),
            }
        }
        for (k, m) in matrices.iter().enumerate() {
            if m.dim != dim {
                return Err(Error::InvalidSpec("action matrices have mixed dimensions".into()));
            }
            if !m.is_unimodular() {
                return Err(Error::InvalidSpec(format!(
                    "action matrix {k} is not unimodular (det must be +-1)"
                )));
            }
        }
        if matrices[0] != IntMat::identity(dim) {
            return Err(Error::InvalidSpec("identity must act by the identity matrix".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let prod = matrices[i as usize].mul(&matrices[j as usize]);
                if prod != matrices[at(i, j) as usize] {
                    return Err(Error::InvalidSpec(
                        "matrix assignment is not a homomorphism".into(),
                    ));
                }
            }
        }
        Ok(FiniteGroup {
            order: n,
            dim,
            mult,
            inv,
            matrices,
        })
    }

    /// Trivial group acting on `Z^dim`.
    pub fn trivial(dim: usize) -> Self {
        FiniteGroup::new(vec![vec![0]], vec![IntMat::identity(dim)]).unwrap()
    }

    /// Cyclic group of order `n`, generator acting by `gen_matrix`.
    pub fn cyclic(n: u32, gen_matrix: IntMat) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("cyclic order must be >= 1".into()));
        }
        let mut mult = Vec::with_capacity(n as usize);
        for i in 0..n {
            mult.push((0..n).map(|j| (i + j) % n).collect());
        }
        let mut matrices = Vec::with_capacity(n as usize);
        let mut acc = IntMat::identity(gen_matrix.dim);
        for _ in 0..n {
            matrices.push(acc.clone());
            acc = acc.mul(&gen_matrix);
        }
        if acc != IntMat::identity(gen_matrix.dim) {
            return Err(Error::InvalidSpec(
                "generator matrix order does not divide the cyclic order".into(),
            ));
        }
        FiniteGroup::new(mult, matrices)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn mul(&self, i: u32, j: u32) -> u32 {
        self.mult[(i * self.order + j) as usize]
    }

    #[inline]
    pub fn inv(&self, i: u32) -> u32 {
        self.inv[i as usize]
    }

    #[inline]
    pub fn matrix(&self, i: u32) -> &IntMat {
        &self.matrices[i as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Z/2 acting on Z by negation: the finite part of the infinite dihedral group.
    pub fn flip_z2() -> FiniteGroup {
        FiniteGroup::cyclic(2, IntMat::from_rows(&[vec![-1]]).unwrap()).unwrap()
    }

    #[test]
    fn dihedral_finite_part() {
        let f = flip_z2();
        assert_eq!(f.order(), 2);
        assert_eq!(f.mul(1, 1), 0);
        assert_eq!(f.inv(1), 1);
        assert_eq!(f.matrix(1).mul_vec(&[3]), vec![-3]);
    }

    #[test]
    fn rotation_z4() {
        let rot = IntMat::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
        let f = FiniteGroup::cyclic(4, rot).unwrap();
        assert_eq!(f.order(), 4);
        assert_eq!(f.mul(3, 2), 1);
        assert_eq!(f.inv(1), 3);
        assert_eq!(f.matrix(2).mul_vec(&[1, 0]), vec![-1, 0]);
    }

    #[test]
    fn bad_order_rejected() {
        let rot = IntMat::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
        assert!(FiniteGroup::cyclic(3, rot).is_err());
    }

    #[test]
    fn non_unimodular_rejected() {
        let m = IntMat::from_rows(&[vec![2]]).unwrap();
        assert!(FiniteGroup::cyclic(2, m).is_err());
    }
}
