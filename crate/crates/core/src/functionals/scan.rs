//! Boundary scan: restrict every Busemann function of a large ball to a
//! small one, group identical restrictions, and separate restrictions
//! witnessed at the shell from interior ones.
//!
//! In any convergent sequence `b_{x_n} -> h` with `h` on the boundary the
//! witnesses leave every ball, so every true boundary restriction is
//! witnessed arbitrarily deep. The converse is a heuristic and the report
//! says so: candidates carry their witness statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{busemann, Provenance, RestrictedFunctional};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::metrics::{BallStore, DistOracle, MetricSpec};

/// One grouped restriction found by the scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanCandidate {
    /// Values on the restriction ball, in ball order.
    pub values: Vec<i64>,
    /// Number of witnesses realizing this restriction.
    pub witnesses: u64,
    /// Largest witness distance.
    pub max_witness_distance: u64,
    /// Token of the deepest witness (ties broken by normal form).
    pub witness: String,
    #[serde(skip)]
    pub witness_elem: Option<GroupElement>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub metric: String,
    pub r: u64,
    pub r_scan: u64,
    pub margin: u64,
    /// Restriction-ball elements, in ball order.
    pub domain: Vec<String>,
    /// Restrictions witnessed at the shell (candidate boundary points),
    /// ordered by value vector.
    pub candidates: Vec<ScanCandidate>,
    /// Restrictions realized only near the identity.
    pub interior: Vec<ScanCandidate>,
}

impl ScanReport {
    /// Rebuild the candidate's functional from its deepest witness.
    pub fn candidate_functional(
        &self,
        store: &BallStore,
        metric: &MetricSpec,
        idx: usize,
    ) -> Result<RestrictedFunctional> {
        let cand = &self.candidates[idx];
        let w = cand
            .witness_elem
            .clone()
            .ok_or_else(|| Error::InvalidSpec("candidate has no witness element".into()))?;
        let f = busemann(store, metric, &w, self.r)?;
        debug_assert_eq!(f.values(), cand.values.as_slice());
        Ok(f)
    }

    pub fn candidate_values(&self) -> Vec<&[i64]> {
        self.candidates.iter().map(|c| c.values.as_slice()).collect()
    }
}

struct Acc {
    count: u64,
    max_dist: u64,
    best: GroupElement,
}

/// Scan the ball of radius `r_scan`, restricting every `b_x` to the ball of
/// radius `r`. A restriction is a boundary candidate iff some witness has
/// distance at least `r_scan - margin`.
pub fn scan_boundary(
    store: &BallStore,
    metric: &MetricSpec,
    r: u64,
    r_scan: u64,
    margin: u64,
) -> Result<ScanReport> {
    if margin < 1 || r_scan < r + margin {
        return Err(Error::InsufficientScanRadius { r, r_scan, margin });
    }
    let ball_r = store.ball(metric, r)?;
    let ball_scan = store.ball(metric, r_scan)?;
    let oracle = DistOracle::build(store, metric, r + r_scan)?;

    let domain: Vec<&GroupElement> = ball_r.iter().map(|(g, _)| g).collect();
    let rows: Vec<Result<(Vec<i64>, usize)>> = (0..ball_scan.len())
        .into_par_iter()
        .map(|wi| {
            let (x, dist) = (ball_scan.elem(wi), ball_scan.dist(wi));
            let mut values = Vec::with_capacity(domain.len());
            for y in &domain {
                let d = oracle.query(x, y)?;
                values.push(d as i64 - dist as i64);
            }
            Ok((values, wi))
        })
        .collect();

    let mut groups: BTreeMap<Vec<i64>, Acc> = BTreeMap::new();
    for row in rows {
        let (values, wi) = row?;
        let x = ball_scan.elem(wi).clone();
        let dist = ball_scan.dist(wi);
        groups
            .entry(values)
            .and_modify(|acc| {
                acc.count += 1;
                if (dist, &x) > (acc.max_dist, &acc.best) {
                    acc.max_dist = dist;
                    acc.best = x.clone();
                }
            })
            .or_insert_with(|| Acc { count: 1, max_dist: dist, best: x });
    }

    let shell = r_scan - margin;
    let mut candidates = Vec::new();
    let mut interior = Vec::new();
    for (values, acc) in groups {
        let cand = ScanCandidate {
            values,
            witnesses: acc.count,
            max_witness_distance: acc.max_dist,
            witness: acc.best.token(),
            witness_elem: Some(acc.best),
        };
        if cand.max_witness_distance >= shell {
            candidates.push(cand);
        } else {
            interior.push(cand);
        }
    }

    Ok(ScanReport {
        metric: metric.hash(),
        r,
        r_scan,
        margin,
        domain: ball_r.iter().map(|(g, _)| g.token()).collect(),
        candidates,
        interior,
    })
}

/// The scan candidate functionals, rebuilt from their deepest witnesses.
pub fn candidate_functionals(
    store: &BallStore,
    metric: &MetricSpec,
    report: &ScanReport,
) -> Result<Vec<RestrictedFunctional>> {
    (0..report.candidates.len())
        .map(|i| report.candidate_functional(store, metric, i))
        .collect()
}

/// Busemann restriction with the witness recorded in the provenance.
pub fn witness_functional(
    store: &BallStore,
    metric: &MetricSpec,
    w: &GroupElement,
    r: u64,
) -> Result<RestrictedFunctional> {
    let f = busemann(store, metric, w, r)?;
    debug_assert_eq!(f.provenance, Provenance::Witness(w.clone()));
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::MarkedGroup;

    #[test]
    fn line_scan_finds_the_two_directions() {
        let store = BallStore::in_memory();
        let z = MarkedGroup::free_abelian(1);
        let m = MetricSpec::word(z);
        let report = scan_boundary(&store, &m, 2, 10, 2).unwrap();
        // Ball order 0, -1, 1, -2, 2. The two directions restrict to
        // -z and +z; everything else is interior.
        assert_eq!(report.candidates.len(), 2);
        assert_eq!(report.candidates[0].values, vec![0, -1, 1, -2, 2]); // toward -inf
        assert_eq!(report.candidates[1].values, vec![0, 1, -1, 2, -2]); // toward +inf
        assert_eq!(report.interior.len(), 3);
        for c in &report.candidates {
            assert!(c.max_witness_distance >= 8);
        }
        // Witnesses beyond radius 2 all realize a direction: 2..=10 each side.
        assert_eq!(report.candidates[0].witnesses, 9);
        assert_eq!(report.candidates[1].witnesses, 9);
    }

    #[test]
    fn free_group_scan_at_radius_one() {
        let store = BallStore::in_memory();
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2);
        let report = scan_boundary(&store, &m, 1, 8, 2).unwrap();
        // One candidate per first letter.
        assert_eq!(report.candidates.len(), 4);
        // Domain order: e, B, A, a, b.
        assert_eq!(report.domain, vec!["e", "B", "A", "a", "b"]);
        // The candidate whose witnesses start with `a` has value -1 at `a`
        // and +1 at the other letters.
        let cand_a = report
            .candidates
            .iter()
            .find(|c| c.values == vec![0, 1, 1, -1, 1])
            .expect("candidate for letter a");
        assert!(cand_a.witness.starts_with('a'));
        // Interior: only the identity restriction remains.
        assert_eq!(report.interior.len(), 1);
        assert_eq!(report.interior[0].values, vec![0, 1, 1, 1, 1]);
    }

    #[test]
    fn scan_radius_precondition() {
        let store = BallStore::in_memory();
        let z = MarkedGroup::free_abelian(1);
        let m = MetricSpec::word(z);
        assert!(matches!(
            scan_boundary(&store, &m, 3, 3, 2),
            Err(Error::InsufficientScanRadius { .. })
        ));
    }

    #[test]
    fn scans_are_deterministic() {
        let store = BallStore::in_memory();
        let z2 = MarkedGroup::free_abelian(2);
        let m = MetricSpec::word(z2);
        let a = scan_boundary(&store, &m, 2, 8, 2).unwrap();
        let fresh = BallStore::in_memory();
        let b = scan_boundary(&fresh, &m, 2, 8, 2).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
