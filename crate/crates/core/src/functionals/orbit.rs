//! Orbit search over generator actions, and extraction of the virtual
//! homomorphism carried by a finite orbit.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{act, act_at_radius, at_radius, Provenance, RestrictedFunctional};
use crate::error::{Error, Result};
use crate::metrics::{BallStore, MetricSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "size", rename_all = "snake_case")]
pub enum OrbitVerdict {
    /// Every generator action reproduces the seed.
    FixedPoint,
    /// The orbit closed with this many distinct restrictions.
    FiniteOrbit(u64),
    /// More distinct restrictions than the budget; the count found.
    ExceededBudget(u64),
    /// The seed's radius ran out before closure or budget.
    RadiusExhausted,
}

impl OrbitVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, OrbitVerdict::FixedPoint | OrbitVerdict::FiniteOrbit(_))
    }

    pub fn orbit_size(&self) -> Option<u64> {
        match self {
            OrbitVerdict::FixedPoint => Some(1),
            OrbitVerdict::FiniteOrbit(k) => Some(*k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub verdict: OrbitVerdict,
    pub budget: u64,
    pub compare_radius: u64,
    /// Distinct restrictions reached, as value vectors on the comparison
    /// ball, sorted.
    pub elements: Vec<Vec<i64>>,
    /// Marking generators fixing the seed at the comparison radius.
    pub stabilizer_generators: Vec<String>,
    pub seed_values: Vec<i64>,
    /// Exact verdicts need a closed form; witness-backed verdicts are
    /// restriction-level evidence.
    pub exact: bool,
    #[serde(skip)]
    pub seed: Option<RestrictedFunctional>,
}

/// Identity of an orbit node: closed forms compare exactly, everything
/// else by its value vector at the comparison radius.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum OrbitKey {
    Closed(String),
    Values(Vec<i64>),
}

fn node_key(f: &RestrictedFunctional, compare_radius: u64) -> OrbitKey {
    match &f.provenance {
        Provenance::ZdClosed(a) => OrbitKey::Closed(format!("zd:{}", a.token())),
        Provenance::ZdLifted(a) => OrbitKey::Closed(format!("zd-lift:{}", a.token())),
        _ => OrbitKey::Values(f.truncated_values(compare_radius).to_vec()),
    }
}

fn node_values(f: &RestrictedFunctional, compare_radius: u64) -> Vec<i64> {
    f.truncated_values(compare_radius).to_vec()
}

/// One generator action on an orbit node. Provenance-backed functionals
/// regenerate exactly at the comparison radius; plain value tables shrink.
fn act_node(
    store: &BallStore,
    metric: &MetricSpec,
    gen: &crate::groups::GroupElement,
    f: &RestrictedFunctional,
    compare_radius: u64,
) -> Result<RestrictedFunctional> {
    match f.provenance {
        Provenance::Plain => {
            let out = act(store, metric, gen, f)?;
            if out.radius() < compare_radius {
                return Err(Error::RadiusExhausted {
                    have: out.radius(),
                    need: compare_radius,
                });
            }
            Ok(out)
        }
        _ => act_at_radius(store, metric, gen, f, compare_radius),
    }
}

/// Breadth-first search over generator actions, comparing functionals on
/// the ball of radius `compare_radius`.
pub fn orbit(
    store: &BallStore,
    metric: &MetricSpec,
    seed: &RestrictedFunctional,
    budget: u64,
    compare_radius: u64,
) -> Result<OrbitReport> {
    let seed = &if seed.radius() < compare_radius {
        at_radius(store, metric, seed, compare_radius)?
    } else {
        seed.clone()
    };
    let exact = matches!(
        seed.provenance,
        Provenance::ZdClosed(_) | Provenance::ZdLifted(_)
    );
    let seed_key = node_key(seed, compare_radius);
    let seed_values = node_values(seed, compare_radius);
    let gens = metric.group().generators().to_vec();

    let mut stabilizer = Vec::new();
    let mut visited: BTreeMap<OrbitKey, Vec<i64>> = BTreeMap::new();
    visited.insert(seed_key.clone(), seed_values.clone());
    let mut queue: VecDeque<RestrictedFunctional> = VecDeque::new();
    queue.push_back(seed.clone());

    let mut verdict = None;
    'bfs: while let Some(node) = queue.pop_front() {
        for g in &gens {
            let child = match act_node(store, metric, g, &node, compare_radius) {
                Ok(c) => c,
                Err(Error::RadiusExhausted { .. }) => {
                    verdict = Some(OrbitVerdict::RadiusExhausted);
                    break 'bfs;
                }
                Err(e) => return Err(e),
            };
            let key = node_key(&child, compare_radius);
            if key == seed_key && node_key(&node, compare_radius) == seed_key {
                stabilizer.push(g.token());
            }
            if !visited.contains_key(&key) {
                if visited.len() as u64 >= budget {
                    visited.insert(key, node_values(&child, compare_radius));
                    verdict = Some(OrbitVerdict::ExceededBudget(visited.len() as u64));
                    break 'bfs;
                }
                visited.insert(key, node_values(&child, compare_radius));
                queue.push_back(child);
            }
        }
    }
    // Stabilizer generators were collected per node; keep the seed's only.
    let stabilizer: Vec<String> = {
        let mut seen = std::collections::BTreeSet::new();
        stabilizer.retain(|t| seen.insert(t.clone()));
        stabilizer
    };

    let verdict = verdict.unwrap_or_else(|| {
        if visited.len() == 1 {
            OrbitVerdict::FixedPoint
        } else {
            OrbitVerdict::FiniteOrbit(visited.len() as u64)
        }
    });

    Ok(OrbitReport {
        verdict,
        budget,
        compare_radius,
        elements: visited.into_values().collect(),
        stabilizer_generators: stabilizer,
        seed_values,
        exact,
        seed: Some(seed.clone()),
    })
}

/// The virtual-homomorphism candidate extracted from a finite orbit.
#[derive(Debug, Clone, Serialize)]
pub struct HomCandidate {
    /// Stabilizer elements found in the stabilizer-search ball, with their
    /// values under the functional.
    pub stabilizer_generators: Vec<(String, i64)>,
    /// Elements of the subgroup they generate, within the check ball.
    pub subgroup_elements: u64,
    /// Pairs `(x, y)` with `x y` in the check ball where additivity
    /// `h(xy) = h(x) + h(y)` was verified.
    pub verified_pairs: u64,
    pub additive_exact: bool,
    pub nontrivial: bool,
    /// Additivity failures, as token pairs (empty when additive_exact).
    pub violations: Vec<(String, String)>,
}

/// Extract the homomorphism candidate carried by a finite orbit: find the
/// marking-ball elements stabilizing the seed, enumerate the subgroup they
/// generate inside the ball of radius `r`, and check additivity of the
/// restriction there.
pub fn extract_virtual_hom(
    store: &BallStore,
    metric: &MetricSpec,
    report: &OrbitReport,
    r: u64,
    stab_radius: u64,
) -> Result<HomCandidate> {
    if !report.verdict.is_finite() {
        return Err(Error::NotFiniteOrbit(format!("{:?}", report.verdict)));
    }
    let seed = report
        .seed
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("orbit report carries no seed functional".into()))?;
    let cr = report.compare_radius;
    let seed_key = node_key(seed, cr);

    let h = at_radius(store, metric, seed, r)?;
    let ball = h.ball().clone();
    let group = metric.group();

    // Stabilizer elements within the stabilizer-search ball.
    let stab_ball = store.ball(metric, stab_radius)?;
    let mut stab_elems = Vec::new();
    for (g, dist) in stab_ball.iter() {
        if *dist == 0 {
            continue;
        }
        let moved = act_node(store, metric, g, seed, cr)?;
        if node_key(&moved, cr) == seed_key {
            stab_elems.push(g.clone());
        }
    }

    // Subgroup generated by the stabilizer elements, inside the check ball.
    let identity = group.identity();
    let mut subgroup = vec![identity.clone()];
    let mut seen = std::collections::BTreeSet::new();
    seen.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(x) = frontier.pop() {
        for s in &stab_elems {
            let y = group.multiply(&x, s)?;
            if ball.contains(&y) && seen.insert(y.clone()) {
                subgroup.push(y.clone());
                frontier.push(y);
            }
        }
    }
    subgroup.sort();

    let mut verified = 0u64;
    let mut violations = Vec::new();
    for x in &subgroup {
        for y in &subgroup {
            let xy = group.multiply(x, y)?;
            if let (Some(hxy), Some(hx), Some(hy)) = (h.value(&xy), h.value(x), h.value(y)) {
                if hxy == hx + hy {
                    verified += 1;
                } else {
                    violations.push((x.token(), y.token()));
                }
            }
        }
    }
    let nontrivial = subgroup.iter().any(|x| h.value(x).is_some_and(|v| v != 0));
    if !nontrivial {
        return Err(Error::TrivialRestriction);
    }
    Ok(HomCandidate {
        stabilizer_generators: stab_elems
            .iter()
            .map(|g| (g.token(), h.value(g).unwrap_or(0)))
            .collect(),
        subgroup_elements: subgroup.len() as u64,
        verified_pairs: verified,
        additive_exact: violations.is_empty(),
        nontrivial,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactzd::{restrict, ZdCoord, ZdFunctional};
    use crate::functionals::busemann;
    use crate::groups::{GroupElement, MarkedGroup};

    fn z2_setup() -> (BallStore, std::sync::Arc<MarkedGroup>, std::sync::Arc<MetricSpec>) {
        let store = BallStore::in_memory();
        let z2 = MarkedGroup::free_abelian(2);
        let m = MetricSpec::word(z2.clone());
        (store, z2, m)
    }

    #[test]
    fn all_infinite_coordinates_give_a_fixed_point() {
        let (store, z2, m) = z2_setup();
        let h = restrict(&store, &z2, &ZdFunctional::all_plus_inf(2), 6).unwrap();
        let report = orbit(&store, &m, &h, 10, 3).unwrap();
        assert_eq!(report.verdict, OrbitVerdict::FixedPoint);
        assert!(report.exact);
        assert_eq!(report.stabilizer_generators.len(), 4);
    }

    #[test]
    fn mixed_coordinates_translate_without_bound() {
        let (store, z2, m) = z2_setup();
        let alpha = ZdFunctional(vec![ZdCoord::Finite(0), ZdCoord::PlusInf]);
        let h = restrict(&store, &z2, &alpha, 6).unwrap();
        let report = orbit(&store, &m, &h, 25, 3).unwrap();
        assert_eq!(report.verdict, OrbitVerdict::ExceededBudget(26));
    }

    #[test]
    fn interior_witness_orbit_exceeds_budget() {
        let (store, _, m) = z2_setup();
        let h = busemann(&store, &m, &GroupElement::abelian(&[3, 0]), 8).unwrap();
        let report = orbit(&store, &m, &h, 10, 4).unwrap();
        assert_eq!(report.verdict, OrbitVerdict::ExceededBudget(11));
        assert!(!report.exact);
    }

    #[test]
    fn plain_seed_exhausts_radius() {
        let (store, _, m) = z2_setup();
        let mut h = busemann(&store, &m, &GroupElement::abelian(&[3, 0]), 5).unwrap();
        h.provenance = Provenance::Plain;
        let report = orbit(&store, &m, &h, 100, 4).unwrap();
        assert_eq!(report.verdict, OrbitVerdict::RadiusExhausted);
    }

    #[test]
    fn extract_hom_from_the_lattice_fixed_point() {
        let (store, z2, m) = z2_setup();
        let h = restrict(&store, &z2, &ZdFunctional::all_plus_inf(2), 8).unwrap();
        let report = orbit(&store, &m, &h, 10, 4).unwrap();
        let hom = extract_virtual_hom(&store, &m, &report, 6, 2).unwrap();
        assert!(hom.additive_exact);
        assert!(hom.nontrivial);
        // The candidate is z -> -(z_1 + z_2): value -1 on e_1.
        let e1 = ("(1,0)".to_string(), -1);
        assert!(hom.stabilizer_generators.contains(&e1));
        assert!(hom.verified_pairs > 0);
    }

    #[test]
    fn extract_hom_requires_finiteness() {
        let (store, _, m) = z2_setup();
        let h = busemann(&store, &m, &GroupElement::abelian(&[3, 0]), 8).unwrap();
        let report = orbit(&store, &m, &h, 5, 4).unwrap();
        assert!(matches!(
            extract_virtual_hom(&store, &m, &report, 6, 2),
            Err(Error::NotFiniteOrbit(_))
        ));
    }
}
