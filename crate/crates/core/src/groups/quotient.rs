//! Surjective homomorphisms between marked groups, given by generator
//! images, with geodesic-word section lifting.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{Family, GroupElement, MarkedGroup};
use crate::error::{Error, Result};

const EXPRESS_CAP: usize = 10_000_000;

/// A homomorphism `source -> target` defined on the source marking.
///
/// The assignment is checked at construction: inverse pairs map to inverse
/// pairs, the family's complete relator list is checked where one exists
/// (commutators for free abelian sources; free sources have none), and the
/// homomorphism property is sampled on random word pairs for the rest.
#[derive(Debug)]
pub struct QuotientMap {
    source: Arc<MarkedGroup>,
    target: Arc<MarkedGroup>,
    images: Vec<GroupElement>,
    declared_compat: Option<u64>,
    gen_lifts: OnceLock<Vec<GroupElement>>,
}

impl QuotientMap {
    pub fn new(
        source: Arc<MarkedGroup>,
        target: Arc<MarkedGroup>,
        images: Vec<GroupElement>,
    ) -> Result<Arc<QuotientMap>> {
        if images.len() != source.generators().len() {
            return Err(Error::InvalidSpec(format!(
                "need one image per source generator ({} != {})",
                images.len(),
                source.generators().len()
            )));
        }
        for img in &images {
            if !target.belongs(img) {
                return Err(Error::FamilyMismatch(format!(
                    "image {img} does not belong to the target"
                )));
            }
        }
        let map = QuotientMap {
            source,
            target,
            images,
            declared_compat: None,
            gen_lifts: OnceLock::new(),
        };
        map.check_inverse_consistency()?;
        map.check_relators()?;
        map.check_surjective()?;
        map.check_sampled_homomorphism(200)?;
        Ok(Arc::new(map))
    }

    /// Same map with a recorded compatibility constant.
    pub fn with_compat(self: &Arc<Self>, c: u64) -> Arc<QuotientMap> {
        Arc::new(QuotientMap {
            source: self.source.clone(),
            target: self.target.clone(),
            images: self.images.clone(),
            declared_compat: Some(c),
            gen_lifts: OnceLock::new(),
        })
    }

    /// Same map onto a re-marked copy of the target group.
    pub fn with_target(self: &Arc<Self>, target: Arc<MarkedGroup>) -> Result<Arc<QuotientMap>> {
        QuotientMap::new(self.source.clone(), target, self.images.clone())
    }

    /// Abelianization `F_d -> Z^d` with the standard target marking.
    pub fn abelianization(source: Arc<MarkedGroup>) -> Result<Arc<QuotientMap>> {
        let rank = source
            .free_rank()
            .ok_or_else(|| Error::InvalidSpec("abelianization needs a free source".into()))?;
        let target = MarkedGroup::free_abelian(rank);
        let images = source
            .generators()
            .iter()
            .map(|g| {
                let w = g.as_free()?;
                let mut v = vec![0i64; rank];
                for &l in w {
                    let j = (l.unsigned_abs() - 1) as usize;
                    v[j] += if l > 0 { 1 } else { -1 };
                }
                Ok(GroupElement::Abelian(v))
            })
            .collect::<Result<Vec<_>>>()?;
        QuotientMap::new(source, target, images)
    }

    /// `F_d -> Z` sending one basis letter to `1` and the others to `0`.
    pub fn free_to_z(source: Arc<MarkedGroup>, keep_letter: i32) -> Result<Arc<QuotientMap>> {
        let rank = source
            .free_rank()
            .ok_or_else(|| Error::InvalidSpec("free_to_z needs a free source".into()))?;
        if keep_letter <= 0 || keep_letter as usize > rank {
            return Err(Error::InvalidSpec("keep_letter outside the basis".into()));
        }
        let target = MarkedGroup::free_abelian(1);
        let images = source
            .generators()
            .iter()
            .map(|g| {
                let w = g.as_free()?;
                let sum: i64 = w
                    .iter()
                    .map(|&l| {
                        if l.unsigned_abs() as i32 == keep_letter {
                            if l > 0 {
                                1
                            } else {
                                -1
                            }
                        } else {
                            0
                        }
                    })
                    .sum();
                Ok(GroupElement::Abelian(vec![sum]))
            })
            .collect::<Result<Vec<_>>>()?;
        QuotientMap::new(source, target, images)
    }

    pub fn source(&self) -> &Arc<MarkedGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<MarkedGroup> {
        &self.target
    }

    pub fn images(&self) -> &[GroupElement] {
        &self.images
    }

    pub fn declared_compat(&self) -> Option<u64> {
        self.declared_compat
    }

    fn check_inverse_consistency(&self) -> Result<()> {
        for (i, g) in self.source.generators().iter().enumerate() {
            let gi = self.source.invert(g)?;
            let j = self
                .source
                .generators()
                .iter()
                .position(|h| *h == gi)
                .ok_or_else(|| Error::InvalidSpec("marking is not symmetric".into()))?;
            if self.images[j] != self.target.invert(&self.images[i])? {
                return Err(Error::InvalidSpec(format!(
                    "images of {g} and its inverse are not inverse in the target"
                )));
            }
        }
        Ok(())
    }

    fn check_relators(&self) -> Result<()> {
        if let Family::FreeAbelian { .. } = self.source.family() {
            // Commutators are a complete relator list for Z^d.
            for a in &self.images {
                for b in &self.images {
                    let ab = self.target.multiply(a, b)?;
                    let ba = self.target.multiply(b, a)?;
                    if ab != ba {
                        return Err(Error::InvalidSpec(
                            "images of commuting generators do not commute".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_surjective(&self) -> Result<()> {
        let identity = self.target.identity();
        let nontrivial: Vec<GroupElement> = self
            .images
            .iter()
            .filter(|g| **g != identity)
            .cloned()
            .collect();
        if nontrivial.is_empty() {
            match self.target.family() {
                Family::Semidirect { dim: 0, finite } if finite.order() == 1 => return Ok(()),
                _ => return Err(Error::InvalidSpec("images do not generate the target".into())),
            }
        }
        self.target
            .with_marking(nontrivial)
            .map_err(|_| Error::InvalidSpec("images do not generate the target".into()))?;
        Ok(())
    }

    fn check_sampled_homomorphism(&self, samples: usize) -> Result<()> {
        let mut rng = ChaCha20Rng::seed_from_u64(0xD15C);
        let n = self.source.generators().len();
        for _ in 0..samples {
            let g = self.random_word_element(&mut rng, n, 5)?;
            let h = self.random_word_element(&mut rng, n, 5)?;
            let gh = self.source.multiply(&g, &h)?;
            let lhs = self.apply(&gh)?;
            let rhs = self.target.multiply(&self.apply(&g)?, &self.apply(&h)?)?;
            if lhs != rhs {
                return Err(Error::InvalidSpec(
                    "generator images do not define a homomorphism (sampled check failed)".into(),
                ));
            }
            let ginv = self.source.invert(&g)?;
            if self.apply(&ginv)? != self.target.invert(&self.apply(&g)?)? {
                return Err(Error::InvalidSpec(
                    "generator images do not define a homomorphism (inverse check failed)".into(),
                ));
            }
        }
        Ok(())
    }

    fn random_word_element(
        &self,
        rng: &mut ChaCha20Rng,
        n_gens: usize,
        max_len: usize,
    ) -> Result<GroupElement> {
        let len = rng.random_range(0..=max_len);
        let mut g = self.source.identity();
        for _ in 0..len {
            let i = rng.random_range(0..n_gens);
            g = self.source.multiply(&g, &self.source.generators()[i])?;
        }
        Ok(g)
    }

    /// Express `g` as generator indices (a word over the source marking).
    pub fn express(&self, g: &GroupElement) -> Result<Vec<u32>> {
        express_in_marking(&self.source, g)
    }

    /// Image of `g` under the homomorphism.
    pub fn apply(&self, g: &GroupElement) -> Result<GroupElement> {
        if !self.source.belongs(g) {
            return Err(Error::FamilyMismatch(format!(
                "element {g} is not in the quotient source"
            )));
        }
        let word = self.express(g)?;
        let mut img = self.target.identity();
        for i in word {
            img = self
                .target
                .multiply_unchecked(&img, &self.images[i as usize]);
        }
        Ok(img)
    }

    /// Lift of each target generator, as a source element.
    fn gen_lifts(&self) -> Result<&[GroupElement]> {
        if let Some(l) = self.gen_lifts.get() {
            return Ok(l);
        }
        let mut lifts = Vec::with_capacity(self.target.generators().len());
        for t in self.target.generators() {
            if let Some(j) = self.images.iter().position(|img| img == t) {
                lifts.push(self.source.generators()[j].clone());
                continue;
            }
            // Express the target generator as a word over the images, then
            // lift letter by letter.
            let word = express_in_alphabet(&self.target, &self.images, t)?;
            let mut x = self.source.identity();
            for i in word {
                x = self
                    .source
                    .multiply_unchecked(&x, &self.source.generators()[i as usize]);
            }
            lifts.push(x);
        }
        let _ = self.gen_lifts.set(lifts);
        Ok(self.gen_lifts.get().unwrap())
    }

    /// Section: a lift `x` of `q` built by lifting a geodesic word for `q`
    /// over the target marking, letter by letter.
    pub fn section(&self, q: &GroupElement) -> Result<GroupElement> {
        if !self.target.belongs(q) {
            return Err(Error::FamilyMismatch(format!(
                "element {q} is not in the quotient target"
            )));
        }
        let word = express_in_marking(&self.target, q)?;
        let lifts = self.gen_lifts()?;
        let mut x = self.source.identity();
        for i in word {
            x = self.source.multiply_unchecked(&x, &lifts[i as usize]);
        }
        if self.apply(&x)? != *q {
            return Err(Error::AssertionFailed(format!(
                "section lift of {q} does not project back (broken quotient map)"
            )));
        }
        Ok(x)
    }
}

/// Geodesic word for `g` over the group's marking (BFS parent links).
pub fn express_in_marking(group: &MarkedGroup, g: &GroupElement) -> Result<Vec<u32>> {
    // Closed forms for the standard markings.
    if group.has_standard_marking() {
        match g {
            GroupElement::Free(w) => {
                let mut out = Vec::with_capacity(w.len());
                for &l in w {
                    let slot = 2 * (l.unsigned_abs() - 1) + u32::from(l < 0);
                    out.push(slot);
                }
                return Ok(out);
            }
            GroupElement::Abelian(v) => {
                let mut out = Vec::new();
                for (j, &x) in v.iter().enumerate() {
                    let slot = 2 * j as u32 + u32::from(x < 0);
                    for _ in 0..x.unsigned_abs() {
                        out.push(slot);
                    }
                }
                return Ok(out);
            }
            GroupElement::Semidirect(..) => {}
        }
    }
    express_in_alphabet(group, group.generators(), g)
}

/// Geodesic word for `g` over an explicit edge alphabet (BFS parent links;
/// deterministic: alphabet explored in order, first discovery wins).
pub fn express_in_alphabet(
    group: &MarkedGroup,
    alphabet: &[GroupElement],
    g: &GroupElement,
) -> Result<Vec<u32>> {
    let identity = group.identity();
    if *g == identity {
        return Ok(Vec::new());
    }
    let mut parents: HashMap<GroupElement, (GroupElement, u32)> = HashMap::new();
    let mut frontier = VecDeque::new();
    frontier.push_back(identity.clone());
    parents.insert(identity.clone(), (identity.clone(), u32::MAX));
    while let Some(x) = frontier.pop_front() {
        for (i, s) in alphabet.iter().enumerate() {
            if group.is_identity(s) {
                continue;
            }
            let y = group.multiply_unchecked(&x, s);
            if parents.contains_key(&y) {
                continue;
            }
            parents.insert(y.clone(), (x.clone(), i as u32));
            if y == *g {
                let mut word = Vec::new();
                let mut cur = y;
                while cur != identity {
                    let (p, idx) = parents[&cur].clone();
                    word.push(idx);
                    cur = p;
                }
                word.reverse();
                return Ok(word);
            }
            frontier.push_back(y);
        }
        if parents.len() > EXPRESS_CAP {
            return Err(Error::MemoryCap {
                cap: EXPRESS_CAP,
                reached: 0,
            });
        }
    }
    Err(Error::FamilyMismatch(format!(
        "element {g} is not expressible over the alphabet"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteGroup, IntMat};

    fn abelianization_f2() -> Arc<QuotientMap> {
        QuotientMap::abelianization(MarkedGroup::free(2)).unwrap()
    }

    #[test]
    fn commutator_dies_under_abelianization() {
        let pi = abelianization_f2();
        let w = GroupElement::free_word(&[1, 2, -1, -2]);
        assert_eq!(pi.apply(&w).unwrap(), GroupElement::abelian(&[0, 0]));
    }

    #[test]
    fn exponent_sums() {
        let pi = abelianization_f2();
        let w = GroupElement::free_word(&[1, 1, 2]);
        assert_eq!(pi.apply(&w).unwrap(), GroupElement::abelian(&[2, 1]));
        assert_eq!(
            pi.apply(&pi.source().identity()).unwrap(),
            GroupElement::abelian(&[0, 0])
        );
    }

    #[test]
    fn section_lifts_geodesically() {
        let pi = abelianization_f2();
        let q = GroupElement::abelian(&[2, 1]);
        let x = pi.section(&q).unwrap();
        assert_eq!(x, GroupElement::free_word(&[1, 1, 2]));
        assert_eq!(x.free_len().unwrap(), 3);
        assert_eq!(pi.apply(&x).unwrap(), q);
        assert_eq!(pi.section(&pi.target().identity()).unwrap(), pi.source().identity());
    }

    #[test]
    fn dihedral_to_z2_section() {
        let d_inf = MarkedGroup::dihedral_infinite();
        // Kill the translation: D_inf -> Z/2.
        let z2 = MarkedGroup::semidirect(
            0,
            FiniteGroup::cyclic(2, IntMat { dim: 0, data: vec![] }).unwrap(),
            &[(vec![], 1)],
        )
        .unwrap();
        let images = vec![
            GroupElement::semidirect(&[], 1), // s -> flip
            GroupElement::semidirect(&[], 0), // r -> 1
            GroupElement::semidirect(&[], 0), // r^{-1} -> 1
        ];
        let pi = QuotientMap::new(d_inf, z2, images).unwrap();
        let q = GroupElement::semidirect(&[], 1);
        let x = pi.section(&q).unwrap();
        assert_eq!(x, GroupElement::semidirect(&[0], 1)); // the flip itself
    }

    #[test]
    fn non_homomorphic_assignment_rejected() {
        // Z^2 -> Z sending e_1 to 1 but its inverse to 1 as well.
        let z2 = MarkedGroup::free_abelian(2);
        let z = MarkedGroup::free_abelian(1);
        let images = vec![
            GroupElement::abelian(&[1]),
            GroupElement::abelian(&[1]),
            GroupElement::abelian(&[0]),
            GroupElement::abelian(&[0]),
        ];
        assert!(QuotientMap::new(z2, z, images).is_err());
    }

    #[test]
    fn non_surjective_assignment_rejected() {
        let z = MarkedGroup::free_abelian(1);
        let images = vec![GroupElement::abelian(&[2]), GroupElement::abelian(&[-2])];
        assert!(QuotientMap::new(z.clone(), z, images).is_err());
    }

    #[test]
    fn express_over_nonstandard_alphabet() {
        let g = MarkedGroup::free_abelian(1);
        let alphabet = vec![GroupElement::abelian(&[2]), GroupElement::abelian(&[-3])];
        let word = express_in_alphabet(&g, &alphabet, &GroupElement::abelian(&[1])).unwrap();
        // 1 = 2 + 2 - 3 in some order; BFS finds a shortest word of length 3.
        assert_eq!(word.len(), 3);
    }
}
