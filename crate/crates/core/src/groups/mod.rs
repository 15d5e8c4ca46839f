//! Exact arithmetic for the supported group families.
//!
//! A [`MarkedGroup`] is a group family instance together with a finite
//! symmetric generating set (its *marking*). All elements are kept in a
//! unique normal form, so the word problem is equality of normal forms.
//! Families are a closed enumeration with a decidable word problem:
//! free groups, free abelian groups, semidirect products `Z^d x| F` with
//! `F` finite acting by unimodular integer matrices, and finite-index
//! subgroups of the latter two given by a membership rule.

pub mod element;
pub mod finite;
pub mod intmat;
pub mod quotient;

use std::sync::Arc;

pub use element::{concat_reduced, invert_word, reduce_free, GroupElement};
pub use finite::FiniteGroup;
pub use intmat::{lattice_index, IntMat};
pub use quotient::QuotientMap;

use crate::error::{Error, Result};

/// Membership rule describing a finite-index subgroup of a lattice-bearing
/// family (free abelian or semidirect).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubgroupRule {
    /// Lattice part lies in `k * Z^d` and the finite part is trivial.
    LatticeMultiple { k: i64 },
}

impl SubgroupRule {
    pub fn admits(&self, ambient: &MarkedGroup, g: &GroupElement) -> bool {
        match self {
            SubgroupRule::LatticeMultiple { k } => {
                let (v, part) = match g {
                    GroupElement::Abelian(v) => (v.as_slice(), 0),
                    GroupElement::Semidirect(v, f) => (v.as_slice(), *f),
                    GroupElement::Free(_) => return false,
                };
                let _ = ambient;
                part == 0 && v.iter().all(|x| x % k == 0)
            }
        }
    }

    /// Index of the subgroup in the ambient group.
    pub fn index(&self, ambient: &MarkedGroup) -> u128 {
        match self {
            SubgroupRule::LatticeMultiple { k } => {
                let d = ambient.lattice_dim().unwrap_or(0) as u32;
                let finite_order = match ambient.family() {
                    Family::Semidirect { finite, .. } => finite.order() as u128,
                    _ => 1,
                };
                finite_order * (k.unsigned_abs() as u128).pow(d)
            }
        }
    }
}

/// Group family tag plus the family-specific data.
#[derive(Debug, Clone)]
pub enum Family {
    Free { rank: usize },
    FreeAbelian { dim: usize },
    Semidirect { dim: usize, finite: FiniteGroup },
    Subgroup { ambient: Arc<MarkedGroup>, rule: SubgroupRule },
}

/// A group with a finite symmetric generating set.
#[derive(Debug, Clone)]
pub struct MarkedGroup {
    family: Family,
    generators: Vec<GroupElement>,
}

impl MarkedGroup {
    /// Free group of the given rank with the standard marking
    /// `a_1, a_1^{-1}, ..., a_rank, a_rank^{-1}`.
    pub fn free(rank: usize) -> Arc<MarkedGroup> {
        let mut gens = Vec::with_capacity(2 * rank);
        for i in 1..=rank as i32 {
            gens.push(GroupElement::Free(vec![i]));
            gens.push(GroupElement::Free(vec![-i]));
        }
        Arc::new(MarkedGroup {
            family: Family::Free { rank },
            generators: gens,
        })
    }

    /// Free group marked by the given reduced words, symmetrized.
    /// The marking must contain every basis letter.
    pub fn free_with_words(rank: usize, words: &[Vec<i32>]) -> Result<Arc<MarkedGroup>> {
        let gens: Vec<GroupElement> = words
            .iter()
            .map(|w| GroupElement::free_word(w))
            .collect();
        let family = Family::Free { rank };
        let gens = symmetrize(&family, gens)?;
        for i in 1..=rank as i32 {
            if !gens.contains(&GroupElement::Free(vec![i])) {
                return Err(Error::InvalidSpec(format!(
                    "free marking must contain basis letter {i} (basis closure)"
                )));
            }
        }
        for g in &gens {
            let w = g.as_free()?;
            if w.iter().any(|&l| l == 0 || l.unsigned_abs() as usize > rank) {
                return Err(Error::InvalidSpec("marking word uses letters outside the basis".into()));
            }
        }
        Ok(Arc::new(MarkedGroup { family, generators: gens }))
    }

    /// `Z^d` with the standard marking `e_1, -e_1, ..., e_d, -e_d`.
    pub fn free_abelian(dim: usize) -> Arc<MarkedGroup> {
        let mut gens = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            let mut v = vec![0i64; dim];
            v[j] = 1;
            gens.push(GroupElement::Abelian(v.clone()));
            v[j] = -1;
            gens.push(GroupElement::Abelian(v));
        }
        Arc::new(MarkedGroup {
            family: Family::FreeAbelian { dim },
            generators: gens,
        })
    }

    /// `Z^d` with an explicit marking (symmetrized; must span the lattice).
    pub fn free_abelian_with(dim: usize, vectors: &[Vec<i64>]) -> Result<Arc<MarkedGroup>> {
        let gens: Vec<GroupElement> = vectors.iter().map(|v| GroupElement::abelian(v)).collect();
        let family = Family::FreeAbelian { dim };
        let gens = symmetrize(&family, gens)?;
        let vecs: Vec<Vec<i64>> = gens.iter().map(|g| g.as_abelian().unwrap().to_vec()).collect();
        if lattice_index(dim, &vecs) != Some(1) {
            return Err(Error::InvalidSpec("marking does not span the lattice".into()));
        }
        Ok(Arc::new(MarkedGroup { family, generators: gens }))
    }

    /// Semidirect product `Z^d x| F` with an explicit marking (symmetrized).
    ///
    /// Generation is verified exactly: the finite-part projections must
    /// generate `F`, and the Schreier generators of the intersection with
    /// the lattice must span `Z^d`.
    pub fn semidirect(
        dim: usize,
        finite: FiniteGroup,
        gens: &[(Vec<i64>, u32)],
    ) -> Result<Arc<MarkedGroup>> {
        if finite.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: finite.dim() });
        }
        let gens: Vec<GroupElement> = gens
            .iter()
            .map(|(v, f)| GroupElement::semidirect(v, *f))
            .collect();
        let family = Family::Semidirect { dim, finite };
        let gens = symmetrize(&family, gens)?;
        let group = MarkedGroup { family, generators: gens };
        group.verify_semidirect_generation()?;
        Ok(Arc::new(group))
    }

    /// The infinite dihedral group `Z x| Z/2` marked `{s, r, r^{-1}}`
    /// (flip first, then the translation and its inverse).
    pub fn dihedral_infinite() -> Arc<MarkedGroup> {
        let flip = FiniteGroup::cyclic(2, IntMat::from_rows(&[vec![-1]]).unwrap()).unwrap();
        MarkedGroup::semidirect(1, flip, &[(vec![0], 1), (vec![1], 0), (vec![-1], 0)]).unwrap()
    }

    /// Finite-index subgroup of a lattice-bearing ambient group, marked by
    /// the canonical generators of the rule.
    pub fn subgroup(ambient: Arc<MarkedGroup>, rule: SubgroupRule) -> Result<Arc<MarkedGroup>> {
        let dim = ambient
            .lattice_dim()
            .ok_or_else(|| Error::InvalidSpec("subgroup rules need a lattice-bearing ambient group".into()))?;
        if matches!(ambient.family(), Family::Subgroup { .. }) {
            return Err(Error::InvalidSpec("nested subgroups are not supported".into()));
        }
        let gens = match &rule {
            SubgroupRule::LatticeMultiple { k } => {
                if *k <= 0 {
                    return Err(Error::InvalidSpec("lattice multiple must be positive".into()));
                }
                if dim == 0 {
                    return Err(Error::InvalidSpec("subgroup of a finite group is not proper".into()));
                }
                let mut gens = Vec::with_capacity(2 * dim);
                for j in 0..dim {
                    let mut v = vec![0i64; dim];
                    v[j] = *k;
                    gens.push(ambient.lattice_element(&v)?);
                    v[j] = -*k;
                    gens.push(ambient.lattice_element(&v)?);
                }
                gens
            }
        };
        Ok(Arc::new(MarkedGroup {
            family: Family::Subgroup { ambient, rule },
            generators: gens,
        }))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Replace the marking (same family, same validation).
    pub fn with_marking(&self, gens: Vec<GroupElement>) -> Result<Arc<MarkedGroup>> {
        let gens = symmetrize(&self.family, gens)?;
        for g in &gens {
            if !self.belongs(g) {
                return Err(Error::FamilyMismatch(format!("marking element {g} is not in the group")));
            }
        }
        let group = MarkedGroup { family: self.family.clone(), generators: gens };
        group.verify_generation()?;
        Ok(Arc::new(group))
    }

    /// Verify that the marking generates the group.
    fn verify_generation(&self) -> Result<()> {
        match &self.family {
            Family::Free { rank } => {
                for i in 1..=*rank as i32 {
                    if !self.generators.contains(&GroupElement::Free(vec![i])) {
                        return Err(Error::InvalidSpec(format!(
                            "free marking must contain basis letter {i} (basis closure)"
                        )));
                    }
                }
                Ok(())
            }
            Family::FreeAbelian { dim } => {
                let vecs: Vec<Vec<i64>> = self
                    .generators
                    .iter()
                    .map(|g| Ok(g.as_abelian()?.to_vec()))
                    .collect::<Result<_>>()?;
                if lattice_index(*dim, &vecs) != Some(1) {
                    return Err(Error::InvalidSpec("marking does not span the lattice".into()));
                }
                Ok(())
            }
            Family::Semidirect { .. } => self.verify_semidirect_generation(),
            Family::Subgroup { .. } => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match &self.family {
            Family::Free { .. } => GroupElement::Free(Vec::new()),
            Family::FreeAbelian { dim } => GroupElement::Abelian(vec![0; *dim]),
            Family::Semidirect { dim, .. } => GroupElement::Semidirect(vec![0; *dim], 0),
            Family::Subgroup { ambient, .. } => ambient.identity(),
        }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        *g == self.identity()
    }

    /// Dimension of the lattice part, if the family has one.
    pub fn lattice_dim(&self) -> Option<usize> {
        match &self.family {
            Family::FreeAbelian { dim } => Some(*dim),
            Family::Semidirect { dim, .. } => Some(*dim),
            Family::Subgroup { ambient, .. } => ambient.lattice_dim(),
            Family::Free { .. } => None,
        }
    }

    pub fn free_rank(&self) -> Option<usize> {
        match &self.family {
            Family::Free { rank } => Some(*rank),
            _ => None,
        }
    }

    /// Lattice point as an element of this group.
    pub fn lattice_element(&self, v: &[i64]) -> Result<GroupElement> {
        match &self.family {
            Family::FreeAbelian { dim } => {
                if v.len() != *dim {
                    return Err(Error::DimensionMismatch { expected: *dim, got: v.len() });
                }
                Ok(GroupElement::abelian(v))
            }
            Family::Semidirect { dim, .. } => {
                if v.len() != *dim {
                    return Err(Error::DimensionMismatch { expected: *dim, got: v.len() });
                }
                Ok(GroupElement::semidirect(v, 0))
            }
            Family::Subgroup { ambient, .. } => ambient.lattice_element(v),
            Family::Free { .. } => Err(Error::FamilyMismatch("free groups have no lattice part".into())),
        }
    }

    /// Whether `g` is a valid normal form of an element of this group.
    pub fn belongs(&self, g: &GroupElement) -> bool {
        match (&self.family, g) {
            (Family::Free { rank }, GroupElement::Free(w)) => {
                w.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= *rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            (Family::FreeAbelian { dim }, GroupElement::Abelian(v)) => v.len() == *dim,
            (Family::Semidirect { dim, finite }, GroupElement::Semidirect(v, f)) => {
                v.len() == *dim && *f < finite.order()
            }
            (Family::Subgroup { ambient, rule }, g) => {
                ambient.belongs(g) && rule.admits(ambient, g)
            }
            _ => false,
        }
    }

    fn check_belongs(&self, g: &GroupElement) -> Result<()> {
        if self.belongs(g) {
            Ok(())
        } else {
            Err(Error::FamilyMismatch(format!("element {g} does not belong to the group")))
        }
    }

    /// Normal form of the product `g * h`.
    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check_belongs(g)?;
        self.check_belongs(h)?;
        Ok(self.multiply_unchecked(g, h))
    }

    pub(crate) fn multiply_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (&self.family, g, h) {
            (Family::Free { .. }, GroupElement::Free(a), GroupElement::Free(b)) => {
                GroupElement::Free(concat_reduced(a, b))
            }
            (Family::FreeAbelian { .. }, GroupElement::Abelian(a), GroupElement::Abelian(b)) => {
                GroupElement::Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (
                Family::Semidirect { finite, .. },
                GroupElement::Semidirect(v, f),
                GroupElement::Semidirect(w, g2),
            ) => {
                let fw = finite.matrix(*f).mul_vec(w);
                let vec = v.iter().zip(&fw).map(|(x, y)| x + y).collect();
                GroupElement::Semidirect(vec, finite.mul(*f, *g2))
            }
            (Family::Subgroup { ambient, .. }, g, h) => ambient.multiply_unchecked(g, h),
            _ => unreachable!("belongs() guards family agreement"),
        }
    }

    pub fn invert(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check_belongs(g)?;
        Ok(self.invert_unchecked(g))
    }

    pub(crate) fn invert_unchecked(&self, g: &GroupElement) -> GroupElement {
        match (&self.family, g) {
            (Family::Free { .. }, GroupElement::Free(w)) => GroupElement::Free(invert_word(w)),
            (Family::FreeAbelian { .. }, GroupElement::Abelian(v)) => {
                GroupElement::Abelian(v.iter().map(|x| -x).collect())
            }
            (Family::Semidirect { finite, .. }, GroupElement::Semidirect(v, f)) => {
                let fi = finite.inv(*f);
                let w = finite.matrix(fi).mul_vec(v);
                GroupElement::Semidirect(w.iter().map(|x| -x).collect(), fi)
            }
            (Family::Subgroup { ambient, .. }, g) => ambient.invert_unchecked(g),
            _ => unreachable!("belongs() guards family agreement"),
        }
    }

    /// `x^{-1} y`, the BFS edge direction of the Cayley graph.
    pub fn left_difference(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        let xi = self.invert(x)?;
        self.multiply(&xi, y)
    }

    /// Whether the marking is exactly the standard basis marking.
    pub fn has_standard_marking(&self) -> bool {
        match &self.family {
            Family::Free { rank } => {
                let std: Vec<GroupElement> = (1..=*rank as i32)
                    .flat_map(|i| [GroupElement::Free(vec![i]), GroupElement::Free(vec![-i])])
                    .collect();
                let mut mine = self.generators.clone();
                let mut theirs = std;
                mine.sort();
                theirs.sort();
                mine == theirs
            }
            Family::FreeAbelian { dim } => {
                let std = MarkedGroup::free_abelian(*dim);
                let mut mine = self.generators.clone();
                let mut theirs = std.generators.clone();
                mine.sort();
                theirs.sort();
                mine == theirs
            }
            _ => false,
        }
    }

    fn verify_semidirect_generation(&self) -> Result<()> {
        let (dim, finite) = match &self.family {
            Family::Semidirect { dim, finite } => (*dim, finite),
            _ => return Ok(()),
        };
        // Reachability of all of F under finite-part projections.
        let order = finite.order() as usize;
        let mut reached = vec![false; order];
        let mut rep: Vec<Option<GroupElement>> = vec![None; order];
        reached[0] = true;
        rep[0] = Some(self.identity());
        let mut frontier = vec![0u32];
        while let Some(f) = frontier.pop() {
            let uf = rep[f as usize].clone().unwrap();
            for s in &self.generators {
                let (_, fs) = s.as_semidirect()?;
                let f2 = finite.mul(f, fs);
                if !reached[f2 as usize] {
                    reached[f2 as usize] = true;
                    rep[f2 as usize] = Some(self.multiply_unchecked(&uf, s));
                    frontier.push(f2);
                }
            }
        }
        if !reached.iter().all(|&r| r) {
            return Err(Error::InvalidSpec(
                "marking projections do not generate the finite part".into(),
            ));
        }
        if dim == 0 {
            return Ok(());
        }
        // Schreier generators of the intersection with the lattice.
        let mut vectors = Vec::new();
        for f in finite.elements() {
            let uf = rep[f as usize].clone().unwrap();
            for s in &self.generators {
                let (_, fs) = s.as_semidirect()?;
                let f2 = finite.mul(f, fs);
                let u2inv = self.invert_unchecked(rep[f2 as usize].as_ref().unwrap());
                let t = self.multiply_unchecked(&self.multiply_unchecked(&uf, s), &u2inv);
                let (v, part) = t.as_semidirect()?;
                debug_assert_eq!(part, 0);
                vectors.push(v.to_vec());
            }
        }
        if lattice_index(dim, &vectors) != Some(1) {
            return Err(Error::InvalidSpec(
                "marking does not generate the lattice part".into(),
            ));
        }
        Ok(())
    }
}

fn symmetrize(family: &Family, gens: Vec<GroupElement>) -> Result<Vec<GroupElement>> {
    let probe = MarkedGroup { family: family.clone(), generators: Vec::new() };
    let identity = probe.identity();
    let mut out: Vec<GroupElement> = Vec::new();
    for g in gens {
        if !probe.belongs(&g) {
            return Err(Error::FamilyMismatch(format!("marking element {g} is not in the family")));
        }
        if g == identity {
            continue;
        }
        if !out.contains(&g) {
            out.push(g);
        }
    }
    let mut i = 0;
    while i < out.len() {
        let inv = probe.invert_unchecked(&out[i]);
        if !out.contains(&inv) {
            out.push(inv);
        }
        i += 1;
    }
    if out.is_empty() {
        return Err(Error::InvalidSpec("marking must contain a non-identity generator".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_multiplication_reduces() {
        let g = MarkedGroup::free(2);
        // (ab)(b^{-1}a) = a^2
        let x = GroupElement::free_word(&[1, 2]);
        let y = GroupElement::free_word(&[-2, 1]);
        assert_eq!(g.multiply(&x, &y).unwrap(), GroupElement::free_word(&[1, 1]));
    }

    #[test]
    fn abelian_multiplication_adds() {
        let g = MarkedGroup::free_abelian(2);
        let x = GroupElement::abelian(&[1, 2]);
        let y = GroupElement::abelian(&[3, -1]);
        assert_eq!(g.multiply(&x, &y).unwrap(), GroupElement::abelian(&[4, 1]));
    }

    #[test]
    fn dihedral_relation_srs_is_r_inverse() {
        let g = MarkedGroup::dihedral_infinite();
        let s = GroupElement::semidirect(&[0], 1);
        let r = GroupElement::semidirect(&[1], 0);
        // r s r = s r^{-1} r = ... check s r s = r^{-1} instead, then r s r = s.
        let srs = g
            .multiply(&g.multiply(&s, &r).unwrap(), &s)
            .unwrap();
        assert_eq!(srs, g.invert(&r).unwrap());
        let rsr = g
            .multiply(&g.multiply(&r, &s).unwrap(), &r)
            .unwrap();
        assert_eq!(rsr, s);
    }

    #[test]
    fn inversion_examples() {
        let f = MarkedGroup::free(2);
        let x = GroupElement::free_word(&[1, 2, -1]);
        assert_eq!(f.invert(&x).unwrap(), GroupElement::free_word(&[1, -2, -1]));

        let z3 = MarkedGroup::free_abelian(3);
        let v = GroupElement::abelian(&[1, 0, -2]);
        assert_eq!(z3.invert(&v).unwrap(), GroupElement::abelian(&[-1, 0, 2]));

        assert_eq!(f.invert(&f.identity()).unwrap(), f.identity());
    }

    #[test]
    fn inverse_cancels() {
        let g = MarkedGroup::dihedral_infinite();
        let x = GroupElement::semidirect(&[4], 1);
        let xi = g.invert(&x).unwrap();
        assert_eq!(g.multiply(&x, &xi).unwrap(), g.identity());
        assert_eq!(g.multiply(&xi, &x).unwrap(), g.identity());
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let g = MarkedGroup::free(2);
        let v = GroupElement::abelian(&[1, 0]);
        assert!(g.multiply(&g.identity(), &v).is_err());
        // Letter outside the rank.
        let w = GroupElement::free_word(&[3]);
        assert!(g.multiply(&w, &g.identity()).is_err());
    }

    #[test]
    fn marking_symmetrization_appends_inverses() {
        let g = MarkedGroup::free_with_words(2, &[vec![1], vec![2], vec![1, 2]]).unwrap();
        let toks: Vec<String> = g.generators().iter().map(|x| x.token()).collect();
        assert_eq!(toks, vec!["a", "b", "ab", "A", "B", "BA"]);
    }

    #[test]
    fn free_marking_requires_basis() {
        assert!(MarkedGroup::free_with_words(2, &[vec![1], vec![1, 2]]).is_err());
    }

    #[test]
    fn semidirect_generation_checked() {
        let flip = FiniteGroup::cyclic(2, IntMat::from_rows(&[vec![-1]]).unwrap()).unwrap();
        // {s, r^2} does not generate Z x| Z/2 (index 2: misses r).
        assert!(MarkedGroup::semidirect(1, flip.clone(), &[(vec![0], 1), (vec![2], 0)]).is_err());
        // {s, sr} does generate (two flips at distance one).
        assert!(MarkedGroup::semidirect(1, flip, &[(vec![0], 1), (vec![1], 1)]).is_ok());
    }

    #[test]
    fn rotation_semidirect_generates_with_one_lattice_direction() {
        let rot = FiniteGroup::cyclic(4, IntMat::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap()).unwrap();
        // Rotation orbit of e_1 spans both axes.
        let g = MarkedGroup::semidirect(
            2,
            rot,
            &[(vec![0, 0], 1), (vec![0, 0], 3), (vec![1, 0], 0), (vec![-1, 0], 0)],
        );
        assert!(g.is_ok());
    }

    #[test]
    fn subgroup_membership_rule() {
        let d_inf = MarkedGroup::dihedral_infinite();
        let n = MarkedGroup::subgroup(d_inf.clone(), SubgroupRule::LatticeMultiple { k: 3 }).unwrap();
        assert!(n.belongs(&GroupElement::semidirect(&[6], 0)));
        assert!(!n.belongs(&GroupElement::semidirect(&[4], 0)));
        assert!(!n.belongs(&GroupElement::semidirect(&[3], 1)));
        assert_eq!(
            n.generators(),
            &[GroupElement::semidirect(&[3], 0), GroupElement::semidirect(&[-3], 0)]
        );
        match n.family() {
            Family::Subgroup { rule, .. } => assert_eq!(rule.index(&d_inf), 6),
            _ => panic!("expected subgroup family"),
        }
    }

    #[test]
    fn associativity_spot_checks() {
        let g = MarkedGroup::dihedral_infinite();
        let elems = [
            GroupElement::semidirect(&[0], 1),
            GroupElement::semidirect(&[1], 0),
            GroupElement::semidirect(&[-2], 1),
            GroupElement::semidirect(&[3], 0),
        ];
        for a in &elems {
            for b in &elems {
                for c in &elems {
                    let ab_c = g.multiply(&g.multiply(a, b).unwrap(), c).unwrap();
                    let a_bc = g.multiply(a, &g.multiply(b, c).unwrap()).unwrap();
                    assert_eq!(ab_c, a_bc);
                }
            }
        }
    }
}
