//! Left-invariant integer metrics on marked groups: word metrics, scaled
//! metrics, metrics induced on finite-index subgroups, and the
//! max-combination of a metric with a quotient metric.

pub mod ball;
pub mod distance;
pub mod validate;

use std::sync::Arc;

pub use ball::{Ball, BallStore, DEFAULT_BALL_CAP};
pub use distance::DistOracle;
pub use validate::{validate_banach_axioms, CheckStatus, ValidationReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{Family, GroupElement, MarkedGroup, QuotientMap};

/// A left-invariant integer metric on a marked group.
#[derive(Debug)]
pub enum MetricSpec {
    /// Graph distance of the Cayley graph over the group's marking.
    Word { group: Arc<MarkedGroup> },
    /// `factor * base`.
    Scaled { factor: u64, base: Arc<MetricSpec> },
    /// Ambient metric restricted to a finite-index subgroup as a subspace.
    Induced {
        subgroup: Arc<MarkedGroup>,
        ambient: Arc<MetricSpec>,
    },
    /// `D(x,y) = max(d_G(x,y), m * d_H(pi(x), pi(y)))` for `m` exceeding the
    /// compatibility constant of the quotient.
    MaxCombo {
        d_g: Arc<MetricSpec>,
        quotient: Arc<QuotientMap>,
        d_h: Arc<MetricSpec>,
        m: u64,
        c_used: u64,
    },
}

impl MetricSpec {
    pub fn word(group: Arc<MarkedGroup>) -> Arc<MetricSpec> {
        Arc::new(MetricSpec::Word { group })
    }

    pub fn scaled(factor: u64, base: Arc<MetricSpec>) -> Result<Arc<MetricSpec>> {
        if factor == 0 {
            return Err(Error::InvalidSpec("scale factor must be positive".into()));
        }
        Ok(Arc::new(MetricSpec::Scaled { factor, base }))
    }

    pub fn induced(subgroup: Arc<MarkedGroup>, ambient: Arc<MetricSpec>) -> Result<Arc<MetricSpec>> {
        match subgroup.family() {
            Family::Subgroup { ambient: amb_group, .. } => {
                if crate::spec::group_hash(amb_group) != crate::spec::group_hash(ambient.group()) {
                    return Err(Error::InvalidSpec(
                        "ambient metric is not over the subgroup's ambient group".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::InvalidSpec(
                    "induced metrics need a subgroup-family group".into(),
                ))
            }
        }
        Ok(Arc::new(MetricSpec::Induced { subgroup, ambient }))
    }

    pub fn max_combo_with_compat(
        d_g: Arc<MetricSpec>,
        quotient: Arc<QuotientMap>,
        d_h: Arc<MetricSpec>,
        m: u64,
        c: u64,
    ) -> Result<Arc<MetricSpec>> {
        if !matches!(*d_g, MetricSpec::Word { .. }) || !matches!(*d_h, MetricSpec::Word { .. }) {
            return Err(Error::HypothesisViolation(
                "max-combination needs word metrics on both sides".into(),
            ));
        }
        let src_hash = crate::spec::group_hash(quotient.source());
        let tgt_hash = crate::spec::group_hash(quotient.target());
        if crate::spec::group_hash(d_g.group()) != src_hash {
            return Err(Error::InvalidSpec("d_g is not over the quotient source".into()));
        }
        if crate::spec::group_hash(d_h.group()) != tgt_hash {
            return Err(Error::InvalidSpec("d_h is not over the quotient target".into()));
        }
        if m <= c {
            return Err(Error::HypothesisViolation(format!(
                "max-combination needs m > C, got m={m} <= C={c}"
            )));
        }
        Ok(Arc::new(MetricSpec::MaxCombo { d_g, quotient, d_h, m, c_used: c }))
    }

    /// Owning group of the metric.
    pub fn group(&self) -> &Arc<MarkedGroup> {
        match self {
            MetricSpec::Word { group } => group,
            MetricSpec::Scaled { base, .. } => base.group(),
            MetricSpec::Induced { subgroup, .. } => subgroup,
            MetricSpec::MaxCombo { d_g, .. } => d_g.group(),
        }
    }

    pub fn hash(&self) -> String {
        crate::spec::metric_hash(self)
    }

    /// Distance to the identity.
    pub fn norm(&self, store: &BallStore, x: &GroupElement) -> Result<u64> {
        self.distance(store, &self.group().identity(), x)
    }

    /// Exact point distance.
    pub fn distance(&self, store: &BallStore, x: &GroupElement, y: &GroupElement) -> Result<u64> {
        match self {
            MetricSpec::Word { group } => {
                if !group.belongs(x) || !group.belongs(y) {
                    return Err(Error::FamilyMismatch(
                        "distance arguments must belong to the group".into(),
                    ));
                }
                let z = group.left_difference(x, y)?;
                if group.has_standard_marking() {
                    match &z {
                        GroupElement::Free(w) => return Ok(w.len() as u64),
                        GroupElement::Abelian(v) => {
                            return Ok(v.iter().map(|a| a.unsigned_abs()).sum())
                        }
                        GroupElement::Semidirect(..) => {}
                    }
                }
                distance::word_norm_bfs(group, &z, store.cap())
            }
            MetricSpec::Scaled { factor, base } => Ok(factor * base.distance(store, x, y)?),
            MetricSpec::Induced { subgroup, ambient } => {
                if !subgroup.belongs(x) || !subgroup.belongs(y) {
                    return Err(Error::FamilyMismatch(
                        "induced distance arguments must satisfy the membership rule".into(),
                    ));
                }
                ambient.distance(store, x, y)
            }
            MetricSpec::MaxCombo { d_g, quotient, d_h, m, .. } => {
                let base = d_g.distance(store, x, y)?;
                let hx = quotient.apply(x)?;
                let hy = quotient.apply(y)?;
                Ok(base.max(m * d_h.distance(store, &hx, &hy)?))
            }
        }
    }

    /// Largest norm of a marking generator; margins are derived from it.
    pub fn max_generator_norm(&self, store: &BallStore) -> Result<u64> {
        let mut best = 0;
        for s in self.group().generators() {
            best = best.max(self.norm(store, s)?);
        }
        Ok(best)
    }

    /// Default witness-shell margin: twice the largest generator norm.
    pub fn default_margin(&self, store: &BallStore) -> Result<u64> {
        Ok(2 * self.max_generator_norm(store)?)
    }
}

/// Exact growth table `r -> |B(1, r)|`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthTable {
    pub metric: String,
    pub rows: Vec<(u64, u64)>,
    /// True when the memory cap stopped the table early.
    pub truncated: bool,
}

pub fn growth(store: &BallStore, metric: &MetricSpec, r_max: u64) -> Result<GrowthTable> {
    let hash = metric.hash();
    // One enumeration of the largest ball serves every radius.
    match store.ball(metric, r_max) {
        Ok(big) => {
            let rows = (0..=r_max).map(|r| (r, big.prefix_len(r) as u64)).collect();
            Ok(GrowthTable { metric: hash, rows, truncated: false })
        }
        Err(Error::MemoryCap { reached, .. }) => {
            let big = store.ball(metric, reached)?;
            let rows = (0..=reached).map(|r| (r, big.prefix_len(r) as u64)).collect();
            Ok(GrowthTable { metric: hash, rows, truncated: true })
        }
        Err(e) => Err(e),
    }
}

/// Smallest integer `C >= 1` compatible with the quotient at radius `R`:
/// `|pi(x)|_H <= C |x|_G` on the source ball and section lifts cost at most
/// `C |q|_H` on the target ball.
pub fn compatibility_constant(
    store: &BallStore,
    d_g: &MetricSpec,
    quotient: &Arc<QuotientMap>,
    d_h: &MetricSpec,
    radius: u64,
) -> Result<u64> {
    if radius == 0 {
        return Err(Error::InvalidSpec("compatibility radius must be >= 1".into()));
    }
    if !matches!(d_g, MetricSpec::Word { .. }) {
        return Err(Error::HypothesisViolation("d_G must be a word metric".into()));
    }
    match d_h {
        MetricSpec::Word { .. } => {}
        MetricSpec::Scaled { base, .. } if matches!(**base, MetricSpec::Word { .. }) => {}
        _ => {
            return Err(Error::HypothesisViolation(
                "d_H must be a word metric (optionally scaled)".into(),
            ))
        }
    }
    let mut c: u64 = 1;
    let src_ball = store.ball(d_g, radius)?;
    for (x, dist) in src_ball.iter() {
        if *dist == 0 {
            continue;
        }
        let img = quotient.apply(x)?;
        let nh = d_h.norm(store, &img)?;
        c = c.max(nh.div_ceil(*dist));
    }
    let tgt_ball = store.ball(d_h, radius)?;
    for (q, dist) in tgt_ball.iter() {
        if *dist == 0 {
            continue;
        }
        let lift = quotient.section(q)?;
        let ng = d_g.norm(store, &lift)?;
        c = c.max(ng.div_ceil(*dist));
    }
    Ok(c)
}

/// Max-combination metric `D = max(d_G, M * d_H o pi)`, checking `M > C`.
pub fn banach_combine(
    store: &BallStore,
    d_g: Arc<MetricSpec>,
    quotient: Arc<QuotientMap>,
    d_h: Arc<MetricSpec>,
    m: u64,
) -> Result<Arc<MetricSpec>> {
    let c = match quotient.declared_compat() {
        Some(c) => c,
        None => compatibility_constant(store, &d_g, &quotient, &d_h, 6)?,
    };
    MetricSpec::max_combo_with_compat(d_g, quotient, d_h, m, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> BallStore {
        BallStore::in_memory()
    }

    #[test]
    fn lattice_distance_is_l1() {
        let z2 = MarkedGroup::free_abelian(2);
        let m = MetricSpec::word(z2);
        let s = store();
        let d = m
            .distance(&s, &GroupElement::abelian(&[0, 0]), &GroupElement::abelian(&[3, -4]))
            .unwrap();
        assert_eq!(d, 7);
    }

    #[test]
    fn free_distance_is_reduced_length() {
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2.clone());
        let s = store();
        let w = GroupElement::free_word(&[1, 2, -1]);
        assert_eq!(m.distance(&s, &f2.identity(), &w).unwrap(), 3);
    }

    #[test]
    fn max_combo_distance_formula() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let pi = QuotientMap::abelianization(f2.clone()).unwrap();
        let d_g = MetricSpec::word(f2.clone());
        let d_h = MetricSpec::word(pi.target().clone());
        let d = banach_combine(&s, d_g, pi, d_h, 2).unwrap();
        // D(1, ab) = max(2, 2*2) = 4.
        let ab = GroupElement::free_word(&[1, 2]);
        assert_eq!(d.distance(&s, &f2.identity(), &ab).unwrap(), 4);
        // D(1, a) = max(1, 2) = 2.
        let a = GroupElement::free_word(&[1]);
        assert_eq!(d.distance(&s, &f2.identity(), &a).unwrap(), 2);
        // Commutator: max(4, 0) = 4.
        let c = GroupElement::free_word(&[1, 2, -1, -2]);
        assert_eq!(d.distance(&s, &f2.identity(), &c).unwrap(), 4);
    }

    #[test]
    fn max_combo_rejects_small_m() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let pi = QuotientMap::abelianization(f2.clone()).unwrap();
        let d_g = MetricSpec::word(f2);
        let d_h = MetricSpec::word(pi.target().clone());
        // C = 1 here, so M = 1 violates M > C.
        match banach_combine(&s, d_g, pi, d_h, 1) {
            Err(Error::HypothesisViolation(_)) => {}
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn max_combo_ball_filters_by_combined_distance() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let pi = QuotientMap::abelianization(f2.clone()).unwrap();
        let d_g = MetricSpec::word(f2);
        let d_h = MetricSpec::word(pi.target().clone());
        let d = banach_combine(&s, d_g.clone(), pi, d_h, 2).unwrap();
        // Independent filter of the d_G-ball by the direct formula.
        let base = s.ball(&d_g, 2).unwrap();
        let expected: Vec<GroupElement> = base
            .iter()
            .filter(|(g, dist)| {
                let sums = match g {
                    GroupElement::Free(w) => {
                        let mut v = [0i64; 2];
                        for &l in w {
                            v[(l.unsigned_abs() - 1) as usize] += if l > 0 { 1 } else { -1 };
                        }
                        v
                    }
                    _ => unreachable!(),
                };
                let l1 = sums[0].unsigned_abs() + sums[1].unsigned_abs();
                (*dist).max(2 * l1) <= 2
            })
            .map(|(g, _)| g.clone())
            .collect();
        assert_eq!(expected.len(), 5); // identity and the four letters
        let b = s.ball(&d, 2).unwrap();
        assert_eq!(b.len(), 5);
        for g in &expected {
            assert!(b.contains(g));
        }
    }

    #[test]
    fn compatibility_constant_for_image_marking_is_one() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let pi = QuotientMap::abelianization(f2.clone()).unwrap();
        let d_g = MetricSpec::word(f2);
        let d_h = MetricSpec::word(pi.target().clone());
        assert_eq!(compatibility_constant(&s, &d_g, &pi, &d_h, 6).unwrap(), 1);
    }

    #[test]
    fn compatibility_constant_scales_with_target() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let pi = QuotientMap::abelianization(f2.clone()).unwrap();
        let d_g = MetricSpec::word(f2);
        let d_h = MetricSpec::scaled(3, MetricSpec::word(pi.target().clone())).unwrap();
        assert_eq!(compatibility_constant(&s, &d_g, &pi, &d_h, 6).unwrap(), 3);
    }

    #[test]
    fn compatibility_constant_doubled_target_generators() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let pi = QuotientMap::abelianization(f2.clone()).unwrap();
        let target = MarkedGroup::free_abelian_with(
            2,
            &[vec![1, 0], vec![0, 1], vec![2, 0], vec![0, 2]],
        )
        .unwrap();
        let pi2 = pi.with_target(target).unwrap();
        let d_g = MetricSpec::word(f2);
        let d_h = MetricSpec::word(pi2.target().clone());
        // The norm bound still has constant 1, but any lift of (2,0) costs
        // 2 source letters while the doubled marking reaches it in one
        // step, so the section side forces C = 2.
        assert_eq!(compatibility_constant(&s, &d_g, &pi2, &d_h, 6).unwrap(), 2);
    }

    #[test]
    fn growth_tables() {
        let s = store();
        let z = MetricSpec::word(MarkedGroup::free_abelian(1));
        let t = growth(&s, &z, 3).unwrap();
        assert_eq!(t.rows, vec![(0, 1), (1, 3), (2, 5), (3, 7)]);
        assert!(!t.truncated);

        let f2 = MetricSpec::word(MarkedGroup::free(2));
        let t = growth(&s, &f2, 2).unwrap();
        assert_eq!(t.rows, vec![(0, 1), (1, 5), (2, 17)]);

        // Bidirectional BFS oracle check for the dihedral group: normal
        // forms give |r^v|_S = |v| and |r^v s|_S = |v| + 1, so the counts
        // are 1, 4, 8, 12, ...
        let d_inf = MetricSpec::word(MarkedGroup::dihedral_infinite());
        let t = growth(&s, &d_inf, 3).unwrap();
        assert_eq!(t.rows, vec![(0, 1), (1, 4), (2, 8), (3, 12)]);
    }

    #[test]
    fn growth_truncates_at_cap() {
        let s = BallStore::in_memory().with_cap(20);
        let f2 = MetricSpec::word(MarkedGroup::free(2));
        let t = growth(&s, &f2, 5).unwrap();
        assert!(t.truncated);
        assert_eq!(t.rows.last(), Some(&(2, 17)));
    }

    #[test]
    fn induced_metric_on_translation_subgroup() {
        use crate::groups::SubgroupRule;
        let s = store();
        let d_inf = MarkedGroup::dihedral_infinite();
        let n = MarkedGroup::subgroup(d_inf.clone(), SubgroupRule::LatticeMultiple { k: 3 }).unwrap();
        let ambient = MetricSpec::word(d_inf);
        let ind = MetricSpec::induced(n.clone(), ambient).unwrap();
        let r3 = GroupElement::semidirect(&[3], 0);
        assert_eq!(ind.norm(&s, &r3).unwrap(), 3);
        // Non-members are rejected.
        let r1 = GroupElement::semidirect(&[1], 0);
        assert!(ind.norm(&s, &r1).is_err());
        // Induced balls are ambient balls intersected with the subgroup.
        let b = s.ball(&ind, 6).unwrap();
        let toks: Vec<String> = b.iter().map(|(g, _)| g.token()).collect();
        assert_eq!(toks, vec!["(0;f0)", "(-3;f0)", "(3;f0)", "(-6;f0)", "(6;f0)"]);
    }
}
