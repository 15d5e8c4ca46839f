//! Finite-radius metric-functional engine: Busemann restrictions, the group
//! action on functionals, and depth checking for geodesic metrics.
//!
//! A [`RestrictedFunctional`] is an integer-valued 1-Lipschitz function on a
//! metric ball, vanishing at the identity. It is the finite-radius avatar of
//! a point of the functional compactification. Functionals carry a
//! provenance: either a concrete witness element (the functional is exactly
//! `b_x` restricted to the ball) or a closed form, which makes group actions
//! on them exact at every radius.

pub mod orbit;
pub mod scan;

use std::sync::Arc;

use serde::Serialize;

pub use orbit::{extract_virtual_hom, orbit, HomCandidate, OrbitReport, OrbitVerdict};
pub use scan::{scan_boundary, ScanCandidate, ScanReport};

use crate::error::{Error, Result};
use crate::exactzd::{self, ZdFunctional};
use crate::groups::GroupElement;
use crate::metrics::{Ball, BallStore, DistOracle, MetricSpec};

/// How a restricted functional was produced; actions use this to stay exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Exactly `b_x` for the witness `x` (restricted to the ball).
    Witness(GroupElement),
    /// Closed-form lattice functional on `Z^d` with the standard marking.
    ZdClosed(ZdFunctional),
    /// `m * h_alpha o pi` on a max-combination metric (`m` is the metric's).
    ZdLifted(ZdFunctional),
    /// `m * b_w o pi` for a witness `w` in the quotient target.
    TargetWitness(GroupElement),
    /// Bare values; actions shrink the radius.
    Plain,
}

/// Integer-valued 1-Lipschitz function on a ball, vanishing at the identity.
#[derive(Debug, Clone)]
pub struct RestrictedFunctional {
    metric_hash: String,
    ball: Arc<Ball>,
    values: Vec<i64>,
    pub provenance: Provenance,
}

impl PartialEq for RestrictedFunctional {
    fn eq(&self, other: &Self) -> bool {
        self.metric_hash == other.metric_hash
            && self.radius() == other.radius()
            && self.values == other.values
    }
}
impl Eq for RestrictedFunctional {}

impl RestrictedFunctional {
    /// Build and check the structural invariants: the base point value is
    /// zero and `|f(y)| <= d(y, 1)` everywhere.
    pub fn from_values(
        metric: &MetricSpec,
        ball: Arc<Ball>,
        values: Vec<i64>,
        provenance: Provenance,
    ) -> Result<RestrictedFunctional> {
        if values.len() != ball.len() {
            return Err(Error::InvalidSpec(format!(
                "functional needs one value per ball element ({} != {})",
                values.len(),
                ball.len()
            )));
        }
        if values.first().copied().unwrap_or(0) != 0 {
            return Err(Error::AssertionFailed("functional does not vanish at the base point".into()));
        }
        for (i, v) in values.iter().enumerate() {
            let d = ball.dist(i) as i64;
            if v.abs() > d {
                return Err(Error::AssertionFailed(format!(
                    "functional breaks |f(y)| <= d(y,1) at {} (value {v}, distance {d})",
                    ball.elem(i)
                )));
            }
        }
        Ok(RestrictedFunctional {
            metric_hash: metric.hash(),
            ball,
            values,
            provenance,
        })
    }

    pub fn metric_hash(&self) -> &str {
        &self.metric_hash
    }

    pub fn radius(&self) -> u64 {
        self.ball.radius
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value(&self, g: &GroupElement) -> Option<i64> {
        self.ball.position_of(g).map(|i| self.values[i])
    }

    /// Values on the sub-ball of radius `r` (a prefix of the ball order).
    pub fn truncated_values(&self, r: u64) -> &[i64] {
        &self.values[..self.ball.prefix_len(r)]
    }

    /// Restriction to a smaller radius, same provenance.
    pub fn truncate(&self, metric: &MetricSpec, r: u64) -> Result<RestrictedFunctional> {
        if r > self.radius() {
            return Err(Error::RadiusExhausted { have: self.radius(), need: r });
        }
        let n = self.ball.prefix_len(r);
        RestrictedFunctional::from_values(
            metric,
            Arc::new(self.ball.prefix(r)),
            self.values[..n].to_vec(),
            self.provenance.clone(),
        )
    }

    /// Exhaustive 1-Lipschitz check over all ball pairs.
    pub fn check_one_lipschitz(&self, store: &BallStore, metric: &MetricSpec) -> Result<()> {
        let oracle = DistOracle::build(store, metric, 2 * self.radius())?;
        for i in 0..self.ball.len() {
            for j in (i + 1)..self.ball.len() {
                let d = oracle.query(self.ball.elem(i), self.ball.elem(j))? as i64;
                if (self.values[i] - self.values[j]).abs() > d {
                    return Err(Error::AssertionFailed(format!(
                        "functional is not 1-Lipschitz at ({}, {})",
                        self.ball.elem(i),
                        self.ball.elem(j)
                    )));
                }
            }
        }
        Ok(())
    }

    /// JSON view: values in ball order plus provenance tag.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "metric": self.metric_hash,
            "radius": self.radius(),
            "values": self.values,
            "provenance": provenance_tag(&self.provenance),
        })
    }
}

pub(crate) fn provenance_tag(p: &Provenance) -> String {
    match p {
        Provenance::Witness(w) => format!("witness:{}", w.token()),
        Provenance::ZdClosed(a) => format!("zd:{}", a.token()),
        Provenance::ZdLifted(a) => format!("zd-lift:{}", a.token()),
        Provenance::TargetWitness(w) => format!("target-witness:{}", w.token()),
        Provenance::Plain => "plain".into(),
    }
}

/// The Busemann restriction `b_x(y) = d(x, y) - d(x, 1)` on the ball of
/// radius `r`.
pub fn busemann(
    store: &BallStore,
    metric: &MetricSpec,
    x: &GroupElement,
    r: u64,
) -> Result<RestrictedFunctional> {
    let ball = store.ball(metric, r)?;
    let nx = metric.norm(store, x)?;
    let oracle = DistOracle::build(store, metric, nx + r)?;
    let mut values = Vec::with_capacity(ball.len());
    for (y, _) in ball.iter() {
        let d = oracle.query(x, y)?;
        values.push(d as i64 - nx as i64);
    }
    RestrictedFunctional::from_values(metric, ball, values, Provenance::Witness(x.clone()))
}

/// Values of the lifted functional `m * h(pi(x))` for a target functional
/// given in closed form, over the max-combination ball of radius `r`.
pub fn lift_zd_values(
    store: &BallStore,
    metric: &MetricSpec,
    alpha: &ZdFunctional,
    r: u64,
) -> Result<RestrictedFunctional> {
    let (quotient, m) = match metric {
        MetricSpec::MaxCombo { quotient, m, .. } => (quotient, *m),
        _ => {
            return Err(Error::HypothesisViolation(
                "lifted functionals live on a max-combination metric".into(),
            ))
        }
    };
    let ball = store.ball(metric, r)?;
    let mut values = Vec::with_capacity(ball.len());
    for (x, _) in ball.iter() {
        let img = quotient.apply(x)?;
        let z = img.as_abelian()?;
        values.push(m as i64 * exactzd::eval(alpha, z)?);
    }
    RestrictedFunctional::from_values(metric, ball, values, Provenance::ZdLifted(alpha.clone()))
}

/// Values of the lifted functional `m * b_w(pi(x))` for a target witness.
pub fn lift_target_witness(
    store: &BallStore,
    metric: &MetricSpec,
    w: &GroupElement,
    r: u64,
) -> Result<RestrictedFunctional> {
    let (quotient, d_h, m) = match metric {
        MetricSpec::MaxCombo { quotient, d_h, m, .. } => (quotient, d_h, *m),
        _ => {
            return Err(Error::HypothesisViolation(
                "lifted functionals live on a max-combination metric".into(),
            ))
        }
    };
    let ball = store.ball(metric, r)?;
    let nw = d_h.norm(store, w)?;
    let oracle = DistOracle::build(store, d_h, nw + r / m + 1)?;
    let mut values = Vec::with_capacity(ball.len());
    for (x, _) in ball.iter() {
        let img = quotient.apply(x)?;
        let d = oracle.query(w, &img)?;
        values.push(m as i64 * (d as i64 - nw as i64));
    }
    RestrictedFunctional::from_values(metric, ball, values, Provenance::TargetWitness(w.clone()))
}

/// Regenerate (or truncate) a functional at an explicit radius. Closed-form
/// and witness-backed functionals regenerate exactly at any radius; plain
/// value tables can only shrink.
pub fn at_radius(
    store: &BallStore,
    metric: &MetricSpec,
    f: &RestrictedFunctional,
    r: u64,
) -> Result<RestrictedFunctional> {
    if r <= f.radius() {
        return f.truncate(metric, r);
    }
    match &f.provenance {
        Provenance::Witness(w) => busemann(store, metric, w, r),
        Provenance::ZdClosed(alpha) => exactzd::restrict(store, metric.group(), alpha, r),
        Provenance::ZdLifted(alpha) => lift_zd_values(store, metric, alpha, r),
        Provenance::TargetWitness(w) => lift_target_witness(store, metric, w, r),
        Provenance::Plain => Err(Error::RadiusExhausted { have: f.radius(), need: r }),
    }
}

/// The action `(g.h)(y) = h(g^{-1} y) - h(g^{-1})`, returned at radius
/// `h.radius - d(g, 1)`.
pub fn act(
    store: &BallStore,
    metric: &MetricSpec,
    g: &GroupElement,
    h: &RestrictedFunctional,
) -> Result<RestrictedFunctional> {
    let ng = metric.norm(store, g)?;
    if h.radius() < ng {
        return Err(Error::RadiusExhausted { have: h.radius(), need: ng });
    }
    let out_r = h.radius() - ng;
    act_at_radius(store, metric, g, h, out_r)
}

/// The action evaluated at an explicit output radius (provenance-backed
/// functionals may keep or grow their radius; plain ones may not).
pub fn act_at_radius(
    store: &BallStore,
    metric: &MetricSpec,
    g: &GroupElement,
    h: &RestrictedFunctional,
    out_r: u64,
) -> Result<RestrictedFunctional> {
    let group = metric.group();
    if !group.belongs(g) {
        return Err(Error::FamilyMismatch(format!("acting element {g} is not in the group")));
    }
    match &h.provenance {
        // x.b_y = b_{xy}, exactly.
        Provenance::Witness(w) => {
            let gw = group.multiply(g, w)?;
            busemann(store, metric, &gw, out_r)
        }
        Provenance::ZdClosed(alpha) => {
            let z = g.as_abelian()?;
            let moved = exactzd::zd_act(z, alpha)?;
            exactzd::restrict(store, metric.group(), &moved, out_r)
        }
        Provenance::ZdLifted(alpha) => {
            let quotient = match metric {
                MetricSpec::MaxCombo { quotient, .. } => quotient,
                _ => unreachable!("lifted provenance implies a max-combination metric"),
            };
            let img = quotient.apply(g)?;
            let moved = exactzd::zd_act(img.as_abelian()?, alpha)?;
            lift_zd_values(store, metric, &moved, out_r)
        }
        Provenance::TargetWitness(w) => {
            let quotient = match metric {
                MetricSpec::MaxCombo { quotient, .. } => quotient,
                _ => unreachable!("lifted provenance implies a max-combination metric"),
            };
            let img = quotient.apply(g)?;
            let gw = quotient.target().multiply(&img, w)?;
            lift_target_witness(store, metric, &gw, out_r)
        }
        Provenance::Plain => {
            let ng = metric.norm(store, g)?;
            if h.radius() < ng + out_r {
                return Err(Error::RadiusExhausted { have: h.radius(), need: ng + out_r });
            }
            let ball = store.ball(metric, out_r)?;
            let ginv = group.invert(g)?;
            let h_ginv = h
                .value(&ginv)
                .ok_or(Error::RadiusExhausted { have: h.radius(), need: ng })?;
            let mut values = Vec::with_capacity(ball.len());
            for (y, _) in ball.iter() {
                let gy = group.multiply_unchecked(&ginv, y);
                let v = h.value(&gy).ok_or(Error::RadiusExhausted {
                    have: h.radius(),
                    need: ng + out_r,
                })?;
                values.push(v - h_ginv);
            }
            RestrictedFunctional::from_values(metric, ball, values, Provenance::Plain)
        }
    }
}

/// Per-candidate result of the geodesic depth check.
#[derive(Debug, Clone, Serialize)]
pub struct DepthReport {
    /// Largest `r` such that depths `1..=r` are all attained.
    pub deepest: u64,
    /// Depths `<= R` with no element `x` where `d(x,1) = r` and `f(x) = -r`.
    pub failed: Vec<u64>,
}

/// For each functional, check that every depth `r <= R` is attained:
/// some `x` with `d(x, 1) = r` has `f(x) = -r`. On geodesic (word) metrics
/// every true boundary restriction attains all depths; a failure flags a
/// scan artifact such as an interior restriction.
pub fn geodesic_depth_check(
    metric: &MetricSpec,
    funcs: &[RestrictedFunctional],
    r_max: u64,
) -> Result<Vec<DepthReport>> {
    if !matches!(metric, MetricSpec::Word { .. }) {
        return Err(Error::HypothesisViolation(
            "depth check applies to word metrics (geodesic)".into(),
        ));
    }
    let mut out = Vec::with_capacity(funcs.len());
    for f in funcs {
        let r_eff = r_max.min(f.radius());
        let mut failed = Vec::new();
        for r in 1..=r_eff {
            let lo = f.ball().prefix_len(r - 1);
            let hi = f.ball().prefix_len(r);
            let attained = (lo..hi).any(|i| f.values()[i] == -(r as i64));
            if !attained {
                failed.push(r);
            }
        }
        let deepest = failed.first().map_or(r_eff, |&r| r - 1);
        out.push(DepthReport { deepest, failed });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::MarkedGroup;

    fn store() -> BallStore {
        BallStore::in_memory()
    }

    #[test]
    fn busemann_on_the_lattice() {
        let s = store();
        let z2 = MarkedGroup::free_abelian(2);
        let m = MetricSpec::word(z2);
        let b = busemann(&s, &m, &GroupElement::abelian(&[2, 0]), 2).unwrap();
        assert_eq!(b.value(&GroupElement::abelian(&[1, 0])), Some(-1));
        assert_eq!(b.value(&GroupElement::abelian(&[0, 0])), Some(0));
    }

    #[test]
    fn busemann_at_identity_is_the_norm() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2.clone());
        let b = busemann(&s, &m, &f2.identity(), 3).unwrap();
        for (i, (_, d)) in b.ball().iter().enumerate() {
            assert_eq!(b.values()[i], *d as i64);
        }
    }

    #[test]
    fn busemann_free_group_example() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2);
        let x = GroupElement::free_word(&[1, 1, 1]);
        let b = busemann(&s, &m, &x, 2).unwrap();
        // b_{a^3}(a) = |a^{-3} a| - 3 = 2 - 3 = -1.
        assert_eq!(b.value(&GroupElement::free_word(&[1])), Some(-1));
    }

    #[test]
    fn action_moves_the_witness() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2);
        let h = busemann(&s, &m, &GroupElement::free_word(&[1; 5]), 6).unwrap();
        let moved = act(&s, &m, &GroupElement::free_word(&[1]), &h).unwrap();
        let expect = busemann(&s, &m, &GroupElement::free_word(&[1; 6]), 5).unwrap();
        assert_eq!(moved, expect);
        assert_eq!(moved.radius(), 5);
    }

    #[test]
    fn action_by_identity_keeps_values() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2.clone());
        let h = busemann(&s, &m, &GroupElement::free_word(&[2, 1]), 4).unwrap();
        let same = act(&s, &m, &f2.identity(), &h).unwrap();
        assert_eq!(h, same);
    }

    #[test]
    fn plain_action_matches_witness_action() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2);
        let h = busemann(&s, &m, &GroupElement::free_word(&[1, 2, 1]), 5).unwrap();
        let mut plain = h.clone();
        plain.provenance = Provenance::Plain;
        let g = GroupElement::free_word(&[-2]);
        let via_witness = act(&s, &m, &g, &h).unwrap();
        let via_values = act(&s, &m, &g, &plain).unwrap();
        assert_eq!(via_witness.values(), via_values.values());
    }

    #[test]
    fn action_exhausts_radius() {
        let s = store();
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2);
        let h = busemann(&s, &m, &GroupElement::free_word(&[1]), 1).unwrap();
        let g = GroupElement::free_word(&[2, 2]);
        assert!(matches!(
            act(&s, &m, &g, &h),
            Err(Error::RadiusExhausted { .. })
        ));
    }

    #[test]
    fn depth_check_flags_interior_restrictions() {
        let s = store();
        let z = MarkedGroup::free_abelian(1);
        let m = MetricSpec::word(z);
        // Deep witness: all depths attained.
        let deep = busemann(&s, &m, &GroupElement::abelian(&[9]), 4).unwrap();
        // Interior witness at distance 2: b_x >= -2, so depth 3 must fail.
        let shallow = busemann(&s, &m, &GroupElement::abelian(&[2]), 4).unwrap();
        let reports = geodesic_depth_check(&m, &[deep, shallow], 4).unwrap();
        assert_eq!(reports[0].deepest, 4);
        assert!(reports[0].failed.is_empty());
        assert_eq!(reports[1].deepest, 2);
        assert_eq!(reports[1].failed, vec![3, 4]);
    }
}
