//! Free-group combinatorics behind the no-detection result: first/last
//! letter classes, the length inequality for arbitrary markings, the
//! long-conjugate construction, exhaustive/sampled inequality sweeps, and
//! the stabilizer probe over scan candidates.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{orbit, scan_boundary, OrbitVerdict};
use crate::groups::{GroupElement, MarkedGroup};
use crate::metrics::{BallStore, MetricSpec};

/// First and last letters of the unique reduced word (the identity has
/// neither). `x` is in `B_a` iff `first == a`, in `E_a` iff `last == a`.
pub fn classify(group: &MarkedGroup, x: &GroupElement) -> Result<(i32, i32)> {
    if group.free_rank().is_none() {
        return Err(Error::FamilyMismatch("letter classes need a free group".into()));
    }
    let w = x.as_free()?;
    match (w.first(), w.last()) {
        (Some(&f), Some(&l)) => Ok((f, l)),
        _ => Err(Error::HypothesisViolation("the identity has no letter class".into())),
    }
}

/// Largest basis length of a marking generator, `M = max |s|_A`.
pub fn marking_letter_bound(group: &MarkedGroup) -> Result<u64> {
    group
        .generators()
        .iter()
        .map(|s| Ok(s.as_free()?.len() as u64))
        .try_fold(0u64, |acc, len: Result<u64>| Ok(acc.max(len?)))
}

/// The length hypothesis threshold `(2M + 1) M`.
pub fn length_threshold(group: &MarkedGroup) -> Result<u64> {
    let m = marking_letter_bound(group)?;
    Ok((2 * m + 1) * m)
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub g_len: u64,
    pub gy_len: u64,
    /// Whether `|gy|_S >= |g|_S + 1`. A `false` here is a reportable
    /// discrepancy with a proved statement.
    pub holds: bool,
}

/// Check `|gy|_S >= |g|_S + 1` for `g` ending with `a^{-1}`, `y` not
/// beginning with `a` and `|y|_A` at least the threshold.
pub fn check_length_inequality(
    store: &BallStore,
    group: &Arc<MarkedGroup>,
    g: &GroupElement,
    y: &GroupElement,
    a: i32,
) -> Result<InequalityCheck> {
    let (_, last_g) = classify(group, g)
        .map_err(|_| Error::HypothesisViolation("g must be a non-trivial reduced word".into()))?;
    if last_g != -a {
        return Err(Error::HypothesisViolation(format!(
            "g must end with the inverse letter (ends {last_g}, need {})",
            -a
        )));
    }
    let (first_y, _) = classify(group, y)
        .map_err(|_| Error::HypothesisViolation("y must be a non-trivial reduced word".into()))?;
    if first_y == a {
        return Err(Error::HypothesisViolation("y must not begin with the letter".into()));
    }
    let threshold = length_threshold(group)?;
    if (y.as_free()?.len() as u64) < threshold {
        return Err(Error::HypothesisViolation(format!(
            "y must have basis length >= {threshold}"
        )));
    }
    let metric = MetricSpec::word(group.clone());
    let g_len = metric.norm(store, g)?;
    let gy = group.multiply(g, y)?;
    let gy_len = metric.norm(store, &gy)?;
    Ok(InequalityCheck { g_len, gy_len, holds: gy_len >= g_len + 1 })
}

/// A conjugator `t = b^ell` making `t^{-1} x t` long and keeping it (and
/// its inverse) out of `B_a`: `b` is the first basis letter, in the order
/// `a_1, a_1^{-1}, a_2, ...`, avoiding `{a^{-1}, first(x), last(x)^{-1}}`.
pub fn long_conjugate(rank: usize, a: i32, x: &GroupElement, ell: u64) -> Result<GroupElement> {
    if rank < 2 {
        return Err(Error::HypothesisViolation("need rank >= 2".into()));
    }
    if ell == 0 {
        return Err(Error::HypothesisViolation("need ell >= 1".into()));
    }
    let w = x.as_free()?;
    let (first, last) = match (w.first(), w.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::HypothesisViolation("x must be non-trivial".into())),
    };
    let excluded = [-a, first, -last];
    let mut b = None;
    for i in 1..=rank as i32 {
        for cand in [i, -i] {
            if !excluded.contains(&cand) {
                b = Some(cand);
                break;
            }
        }
        if b.is_some() {
            break;
        }
    }
    let b = b.expect("rank >= 2 leaves an eligible letter");
    Ok(GroupElement::Free(vec![b; ell as usize]))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepViolation {
    pub a: String,
    pub g: String,
    pub y: String,
    pub g_len: u64,
    pub gy_len: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub mode: String,
    pub generating_set: Vec<String>,
    pub letter_bound: u64,
    pub threshold: u64,
    pub g_max: u64,
    pub y_max: u64,
    pub cases: u64,
    pub holds: u64,
    pub violations: Vec<SweepViolation>,
    pub vacuous: bool,
    pub seed: Option<u64>,
    pub note: Option<String>,
}

fn letters(rank: usize) -> Vec<i32> {
    (1..=rank as i32).flat_map(|i| [i, -i]).collect()
}

/// All reduced words over the basis with lengths in `lo..=hi`, in
/// deterministic order (by length, then lexicographically by letters).
fn reduced_words(rank: usize, lo: usize, hi: usize) -> Vec<Vec<i32>> {
    let alphabet = letters(rank);
    let mut by_len: Vec<Vec<Vec<i32>>> = vec![vec![vec![]]];
    for len in 1..=hi {
        let mut level = Vec::new();
        for w in &by_len[len - 1] {
            for &l in &alphabet {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut next = w.clone();
                next.push(l);
                level.push(next);
            }
        }
        level.sort();
        by_len.push(level);
    }
    by_len[lo..=hi].iter().flatten().cloned().collect()
}

/// Exhaustive sweep of the length inequality: every letter `a`, every `g`
/// in `E_{a^{-1}}` up to `g_max`, every admissible `y` up to `y_max`.
pub fn exhaustive_inequality_sweep(
    store: &BallStore,
    group: &Arc<MarkedGroup>,
    g_max: u64,
    y_max: u64,
) -> Result<SweepReport> {
    let rank = group
        .free_rank()
        .ok_or_else(|| Error::FamilyMismatch("sweeps need a free group".into()))?;
    let m = marking_letter_bound(group)?;
    let threshold = (2 * m + 1) * m;
    let gens: Vec<String> = group.generators().iter().map(|g| g.token()).collect();
    if threshold > y_max {
        return Ok(SweepReport {
            mode: "exhaustive".into(),
            generating_set: gens,
            letter_bound: m,
            threshold,
            g_max,
            y_max,
            cases: 0,
            holds: 0,
            violations: Vec::new(),
            vacuous: true,
            seed: None,
            note: Some(format!(
                "empty range: threshold {threshold} exceeds y_max {y_max}; \
                 raise y_max or use the sampled mode"
            )),
        });
    }
    let metric = MetricSpec::word(group.clone());
    let g_words = reduced_words(rank, 1, g_max as usize);
    let y_words = reduced_words(rank, threshold as usize, y_max as usize);

    let results: Vec<(u64, u64, Vec<SweepViolation>)> = letters(rank)
        .into_par_iter()
        .map(|a| {
            let mut cases = 0u64;
            let mut holds = 0u64;
            let mut violations = Vec::new();
            for gw in g_words.iter().filter(|w| *w.last().unwrap() == -a) {
                let g = GroupElement::Free(gw.clone());
                let g_len = metric.norm(store, &g)?;
                for yw in y_words.iter().filter(|w| *w.first().unwrap() != a) {
                    let y = GroupElement::Free(yw.clone());
                    let gy = group.multiply_unchecked(&g, &y);
                    let gy_len = metric.norm(store, &gy)?;
                    cases += 1;
                    if gy_len >= g_len + 1 {
                        holds += 1;
                    } else {
                        violations.push(SweepViolation {
                            a: GroupElement::Free(vec![a]).token(),
                            g: g.token(),
                            y: y.token(),
                            g_len,
                            gy_len,
                        });
                    }
                }
            }
            Ok((cases, holds, violations))
        })
        .collect::<Result<_>>()?;

    let mut cases = 0;
    let mut holds = 0;
    let mut violations = Vec::new();
    for (c, h, v) in results {
        cases += c;
        holds += h;
        violations.extend(v);
    }
    violations.sort_by(|p, q| (&p.a, &p.g, &p.y).cmp(&(&q.a, &q.g, &q.y)));
    Ok(SweepReport {
        mode: "exhaustive".into(),
        generating_set: gens,
        letter_bound: m,
        threshold,
        g_max,
        y_max,
        cases,
        holds,
        violations,
        vacuous: cases == 0,
        seed: None,
        note: None,
    })
}

fn random_reduced_word(rng: &mut ChaCha20Rng, rank: usize, len: usize) -> Vec<i32> {
    let alphabet = letters(rank);
    let mut w: Vec<i32> = Vec::with_capacity(len);
    while w.len() < len {
        let l = alphabet[rng.random_range(0..alphabet.len())];
        if w.last() == Some(&-l) {
            continue;
        }
        w.push(l);
    }
    w
}

/// Seeded sampled sweep for markings whose thresholds make the exhaustive
/// range infeasible.
pub fn sampled_inequality_sweep(
    store: &BallStore,
    group: &Arc<MarkedGroup>,
    samples: u64,
    g_max: u64,
    y_max: u64,
    seed: u64,
) -> Result<SweepReport> {
    let rank = group
        .free_rank()
        .ok_or_else(|| Error::FamilyMismatch("sweeps need a free group".into()))?;
    let m = marking_letter_bound(group)?;
    let threshold = (2 * m + 1) * m;
    let gens: Vec<String> = group.generators().iter().map(|g| g.token()).collect();
    if threshold > y_max {
        return Err(Error::HypothesisViolation(format!(
            "threshold {threshold} exceeds y_max {y_max}"
        )));
    }
    let metric = MetricSpec::word(group.clone());
    let alphabet = letters(rank);

    // Draw all cases up front with one seeded stream, then check in
    // parallel: results do not depend on the worker count.
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut drawn: Vec<(i32, Vec<i32>, Vec<i32>)> = Vec::with_capacity(samples as usize);
    while drawn.len() < samples as usize {
        let a = alphabet[rng.random_range(0..alphabet.len())];
        let g_len = rng.random_range(1..=g_max as usize);
        let mut g = random_reduced_word(&mut rng, rank, g_len);
        let last = *g.last().unwrap();
        if last != -a {
            // Re-aim the final letter when legal; otherwise redraw.
            if g.len() >= 2 && g[g.len() - 2] == a {
                continue;
            }
            *g.last_mut().unwrap() = -a;
        }
        let y_len = rng.random_range(threshold as usize..=y_max as usize);
        let y = random_reduced_word(&mut rng, rank, y_len);
        if y[0] == a {
            continue;
        }
        drawn.push((a, g, y));
    }

    let checks: Vec<(bool, SweepViolation)> = drawn
        .par_iter()
        .map(|(a, gw, yw)| {
            let g = GroupElement::Free(gw.clone());
            let y = GroupElement::Free(yw.clone());
            let g_len = metric.norm(store, &g)?;
            let gy = group.multiply_unchecked(&g, &y);
            let gy_len = metric.norm(store, &gy)?;
            Ok((
                gy_len >= g_len + 1,
                SweepViolation {
                    a: GroupElement::Free(vec![*a]).token(),
                    g: g.token(),
                    y: y.token(),
                    g_len,
                    gy_len,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let holds = checks.iter().filter(|(ok, _)| *ok).count() as u64;
    let mut violations: Vec<SweepViolation> =
        checks.into_iter().filter(|(ok, _)| !ok).map(|(_, v)| v).collect();
    violations.sort_by(|p, q| (&p.a, &p.g, &p.y).cmp(&(&q.a, &q.g, &q.y)));
    Ok(SweepReport {
        mode: "sampled".into(),
        generating_set: gens,
        letter_bound: m,
        threshold,
        g_max,
        y_max,
        cases: samples,
        holds,
        violations,
        vacuous: samples == 0,
        seed: Some(seed),
        note: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeCandidate {
    pub witness: String,
    pub max_witness_distance: u64,
    /// Distinct orbit images reached within the budget.
    pub distinct_images: u64,
    /// Whether the orbit closed into a finite set (a discrepancy with the
    /// no-finite-orbit statement if it ever happens).
    pub closed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayCheck {
    pub a: String,
    pub x: String,
    pub ell: u64,
    pub y: String,
    /// Per shell witness `a^n`: (n, b_{a^n}(y), b_{a^n}(y^{-1})).
    pub checks: Vec<(u64, i64, i64)>,
    /// Both values are >= 1 for every checked n.
    pub all_hold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub r: u64,
    pub r_scan: u64,
    pub budget: u64,
    pub compare_radius: u64,
    pub candidates: Vec<ProbeCandidate>,
    pub replay: Vec<ReplayCheck>,
    /// No candidate orbit closed within the budget.
    pub none_closed: bool,
    pub replay_all_hold: bool,
}

/// Scan the boundary of a free-group word metric, push every candidate
/// through the orbit search, and replay the stabilizer contradiction on
/// shell witnesses: for long conjugates `y` the limits satisfy both
/// `f(y) >= 1` and `f(y^{-1}) >= 1`, which no stabilized functional could.
pub fn stabilizer_probe(
    store: &BallStore,
    group: &Arc<MarkedGroup>,
    r: u64,
    r_scan: u64,
    budget: u64,
) -> Result<ProbeReport> {
    let rank = group
        .free_rank()
        .ok_or_else(|| Error::FamilyMismatch("the probe needs a free group".into()))?;
    if rank < 2 {
        return Err(Error::HypothesisViolation(
            "the probe needs rank >= 2 (rank 1 is the lattice, which has fixed points)".into(),
        ));
    }
    let metric = MetricSpec::word(group.clone());
    let margin = metric.default_margin(store)?;
    let report = scan_boundary(store, &metric, r, r_scan, margin)?;

    // Comparison radius: small enough to act cheaply, large enough that
    // the sphere has more than `budget` restriction classes.
    let mut compare_radius = r.max(1);
    loop {
        let ball = store.ball(&metric, compare_radius)?;
        let sphere = ball.len() - store.ball(&metric, compare_radius - 1)?.len();
        if sphere as u64 > budget {
            break;
        }
        compare_radius += 1;
    }

    let mut candidates = Vec::new();
    for i in 0..report.candidates.len() {
        let seed = report.candidate_functional(store, &metric, i)?;
        let orb = orbit(store, &metric, &seed, budget, compare_radius)?;
        let (distinct, closed) = match orb.verdict {
            OrbitVerdict::ExceededBudget(n) => (n, false),
            OrbitVerdict::FixedPoint => (1, true),
            OrbitVerdict::FiniteOrbit(k) => (k, true),
            OrbitVerdict::RadiusExhausted => (orb.elements.len() as u64, false),
        };
        candidates.push(ProbeCandidate {
            witness: report.candidates[i].witness.clone(),
            max_witness_distance: report.candidates[i].max_witness_distance,
            distinct_images: distinct,
            closed,
        });
    }

    // Lemma replay on shell witnesses g_n = a^n.
    let m_const = marking_letter_bound(group)?;
    let threshold = (2 * m_const + 1) * m_const;
    let mut replay = Vec::new();
    for a in letters(rank) {
        let x_letter = if a.unsigned_abs() == 1 { 2 } else { 1 };
        let x = GroupElement::Free(vec![x_letter]);
        let ell = ((threshold.saturating_sub(1)) / 2 + 1).max(1);
        let t = long_conjugate(rank, a, &x, ell)?;
        let t_inv = group.invert(&t)?;
        let y = group.multiply(&group.multiply(&t_inv, &x)?, &t)?;
        let y_inv = group.invert(&y)?;
        let mut checks = Vec::new();
        let mut all_hold = true;
        for n in 1..=r_scan {
            let gn = GroupElement::Free(vec![a; n as usize]);
            let gn_inv = group.invert(&gn)?;
            let by = metric.norm(store, &group.multiply(&gn_inv, &y)?)? as i64 - n as i64;
            let byi = metric.norm(store, &group.multiply(&gn_inv, &y_inv)?)? as i64 - n as i64;
            if by < 1 || byi < 1 {
                all_hold = false;
            }
            checks.push((n, by, byi));
        }
        replay.push(ReplayCheck {
            a: GroupElement::Free(vec![a]).token(),
            x: x.token(),
            ell,
            y: y.token(),
            checks,
            all_hold,
        });
    }

    let none_closed = candidates.iter().all(|c| !c.closed);
    let replay_all_hold = replay.iter().all(|r| r.all_hold);
    Ok(ProbeReport {
        r,
        r_scan,
        budget,
        compare_radius,
        candidates,
        replay,
        none_closed,
        replay_all_hold,
    })
}
