//! Validation of the metric axioms an integer metric must satisfy to be a
//! useful boundary carrier: integer values, left-invariance, properness,
//! quasi-isometry to the group's Cayley graph, and the (probe-only)
//! unboundedness of boundary functionals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{BallStore, DistOracle, MetricSpec};
use crate::error::Result;
use crate::functionals::scan_boundary;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail { detail: String },
    /// Heuristic evidence, not a proof; `ok` is the observed outcome.
    Probe { ok: bool },
}

impl CheckStatus {
    pub fn passed(&self) -> bool {
        matches!(self, CheckStatus::Pass | CheckStatus::Probe { ok: true })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub metric: String,
    pub r: u64,
    pub samples: u64,
    pub seed: u64,
    /// (1) Integer-valued: structural, distances are integers by type.
    pub integer_valued: CheckStatus,
    /// (2) Left-invariance `d(zx, zy) = d(x, y)` on random ball triples.
    pub left_invariance: CheckStatus,
    /// (3) Properness: exact finite ball sizes up to `r`.
    pub properness: CheckStatus,
    pub ball_sizes: Vec<(u64, u64)>,
    /// (4) Best-fit quasi-isometry constant against the group's word
    /// metric (the property is existential; the fit is reported).
    pub qi_constant: u64,
    /// (5) Unboundedness probe: every scan candidate reaches
    /// `-unboundedness_threshold` on the ball.
    pub unboundedness: CheckStatus,
    pub unboundedness_threshold: i64,
    pub candidates_checked: u64,
    pub min_nonzero_distance: Option<u64>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.integer_valued.passed()
            && self.left_invariance.passed()
            && self.properness.passed()
            && self.unboundedness.passed()
    }
}

/// Check the metric axioms at radius `r` with `samples` random triples.
pub fn validate_banach_axioms(
    store: &BallStore,
    metric: &MetricSpec,
    r: u64,
    samples: u64,
    seed: u64,
) -> Result<ValidationReport> {
    let ball = store.ball(metric, r)?;
    let group = metric.group();

    // (2) Left-invariance on random triples. Products may leave the ball,
    // so distances go through point queries.
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut left_invariance = CheckStatus::Pass;
    for _ in 0..samples {
        let pick = |rng: &mut ChaCha20Rng| ball.elem(rng.random_range(0..ball.len())).clone();
        let (z, x, y) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let zx = group.multiply(&z, &x)?;
        let zy = group.multiply(&z, &y)?;
        if metric.distance(store, &zx, &zy)? != metric.distance(store, &x, &y)? {
            left_invariance = CheckStatus::Fail {
                detail: format!("d(zx,zy) != d(x,y) at z={z}, x={x}, y={y}"),
            };
            break;
        }
    }

    // (3) Properness: exact ball sizes.
    let ball_sizes: Vec<(u64, u64)> = (0..=r).map(|k| (k, ball.prefix_len(k) as u64)).collect();

    // (4) Quasi-isometry fit against the group's word metric: smallest
    // integer c with c^{-1} d_S - c <= d <= c d_S + c over ball pairs.
    let word = MetricSpec::word(group.clone());
    let oracle = DistOracle::build(store, metric, 2 * r)?;
    let mut word_bound = 2 * r;
    for (g, _) in ball.iter() {
        word_bound = word_bound.max(2 * word.norm(store, g)?);
    }
    let word_oracle = DistOracle::build(store, &word, word_bound)?;
    let mut qi_constant: u64 = 1;
    let n = ball.len();
    let max_pairs: usize = 2_000_000;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if n * n <= max_pairs {
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
    } else {
        for _ in 0..max_pairs {
            pairs.push((rng.random_range(0..n), rng.random_range(0..n)));
        }
    }
    for (i, j) in pairs {
        let dm = oracle.query(ball.elem(i), ball.elem(j))?;
        let ds = word_oracle.query(ball.elem(i), ball.elem(j))?;
        // d <= c * d_S + c  and  d_S <= c * d + c.
        qi_constant = qi_constant
            .max(dm.div_ceil(ds + 1))
            .max(ds.div_ceil(dm + 1));
    }

    // Minimal nonzero distance (from the ball's first nonzero entry, or a
    // generator norm when the ball of radius r only holds the identity).
    let min_nonzero_distance = if ball.len() > 1 {
        Some(ball.dist(1))
    } else {
        group
            .generators()
            .iter()
            .map(|s| metric.norm(store, s))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
    };

    // (5) Unboundedness probe via the boundary scan.
    let margin = metric.default_margin(store)?.max(1);
    let r_scan = (2 * r).max(r + margin);
    let report = scan_boundary(store, metric, r, r_scan, margin)?;
    let threshold = (r / qi_constant) as i64;
    let mut all_attained = true;
    for cand in &report.candidates {
        let min_value = cand.values.iter().copied().min().unwrap_or(0);
        if min_value > -threshold {
            all_attained = false;
        }
    }
    let candidates_checked = report.candidates.len() as u64;

    Ok(ValidationReport {
        metric: metric.hash(),
        r,
        samples,
        seed,
        integer_valued: CheckStatus::Pass,
        left_invariance,
        properness: CheckStatus::Pass,
        ball_sizes,
        qi_constant,
        unboundedness: CheckStatus::Probe { ok: all_attained },
        unboundedness_threshold: threshold,
        candidates_checked,
        min_nonzero_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{MarkedGroup, SubgroupRule};

    #[test]
    fn word_metric_on_free_group_passes() {
        let store = BallStore::in_memory();
        let m = MetricSpec::word(MarkedGroup::free(2));
        let report = validate_banach_axioms(&store, &m, 5, 200, 7).unwrap();
        assert!(report.all_passed());
        assert_eq!(report.qi_constant, 1);
        assert_eq!(report.min_nonzero_distance, Some(1));
    }

    #[test]
    fn scaled_metric_passes_with_scaled_minimum() {
        let store = BallStore::in_memory();
        let base = MetricSpec::word(MarkedGroup::free_abelian(1));
        let m = MetricSpec::scaled(3, base).unwrap();
        let report = validate_banach_axioms(&store, &m, 6, 200, 7).unwrap();
        assert!(report.all_passed());
        assert_eq!(report.min_nonzero_distance, Some(3));
        assert_eq!(report.qi_constant, 3);
    }

    #[test]
    fn max_combo_passes_with_fit_constant_two() {
        let store = BallStore::in_memory();
        let f2 = MarkedGroup::free(2);
        let pi = crate::groups::QuotientMap::abelianization(f2.clone()).unwrap();
        let d_g = MetricSpec::word(f2);
        let d_h = MetricSpec::word(pi.target().clone());
        let m = crate::metrics::banach_combine(&store, d_g, pi, d_h, 2).unwrap();
        let report = validate_banach_axioms(&store, &m, 5, 200, 7).unwrap();
        assert_eq!(report.integer_valued, CheckStatus::Pass);
        assert_eq!(report.left_invariance, CheckStatus::Pass);
        assert_eq!(report.properness, CheckStatus::Pass);
        assert_eq!(report.qi_constant, 2);
        // The metric is not geodesic: some shell-witnessed directions dip
        // slower than the geodesic rate, so the negative-side probe is
        // recorded as heuristic evidence rather than asserted.
        assert!(report.candidates_checked > 0);
        assert!(matches!(report.unboundedness, CheckStatus::Probe { .. }));
    }

    #[test]
    fn induced_metric_on_even_integers_passes() {
        let store = BallStore::in_memory();
        let z = MarkedGroup::free_abelian(1);
        let sub = MarkedGroup::subgroup(z.clone(), SubgroupRule::LatticeMultiple { k: 2 }).unwrap();
        let m = MetricSpec::induced(sub, MetricSpec::word(z)).unwrap();
        let report = validate_banach_axioms(&store, &m, 10, 200, 7).unwrap();
        assert!(report.all_passed());
        assert_eq!(report.qi_constant, 2);
    }
}
