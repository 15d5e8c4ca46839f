//! Point distance queries and batched pair-distance oracles.

use std::collections::HashMap;
use std::sync::Arc;

use super::ball::Ball;
use super::{BallStore, MetricSpec};
use crate::error::{Error, Result};
use crate::groups::{GroupElement, MarkedGroup, QuotientMap};

/// Word-metric norm `|z|_S` by bidirectional breadth-first search.
pub fn word_norm_bfs(group: &MarkedGroup, z: &GroupElement, cap: usize) -> Result<u64> {
    let identity = group.identity();
    if *z == identity {
        return Ok(0);
    }
    let mut side_a: HashMap<GroupElement, u64> = HashMap::from([(identity, 0)]);
    let mut side_b: HashMap<GroupElement, u64> = HashMap::from([(z.clone(), 0)]);
    let mut frontier_a = vec![side_a.keys().next().unwrap().clone()];
    let mut frontier_b = vec![z.clone()];
    let mut depth_a = 0u64;
    let mut depth_b = 0u64;
    if side_b.contains_key(frontier_a.first().unwrap()) {
        return Ok(0);
    }
    loop {
        // Expand the smaller frontier; the marking is symmetric, so the
        // same edge alphabet works from both ends.
        let expand_a = frontier_a.len() <= frontier_b.len();
        let (seen, other, frontier, depth) = if expand_a {
            (&mut side_a, &side_b, &mut frontier_a, &mut depth_a)
        } else {
            (&mut side_b, &side_a, &mut frontier_b, &mut depth_b)
        };
        *depth += 1;
        let mut next = Vec::new();
        let mut best: Option<u64> = None;
        for g in frontier.iter() {
            for s in group.generators() {
                let y = group.multiply_unchecked(g, s);
                if seen.contains_key(&y) {
                    continue;
                }
                seen.insert(y.clone(), *depth);
                if let Some(d2) = other.get(&y) {
                    let total = *depth + d2;
                    best = Some(best.map_or(total, |b: u64| b.min(total)));
                }
                next.push(y);
            }
        }
        if let Some(b) = best {
            return Ok(b);
        }
        if next.is_empty() {
            return Err(Error::FamilyMismatch(
                "element unreachable over the marking".into(),
            ));
        }
        if side_a.len() + side_b.len() > cap {
            return Err(Error::MemoryCap { cap, reached: depth_a + depth_b });
        }
        *frontier = next;
    }
}

/// Batched distance oracle valid for pairs with `d(x, y) <= bound`.
///
/// Standard markings use closed forms; everything else goes through a
/// precomputed lookup ball of radius `bound`.
pub enum DistOracle {
    /// Reduced word length over the standard free marking.
    FreeLen,
    /// l1 distance over the standard lattice marking.
    L1,
    Table {
        group: Arc<MarkedGroup>,
        ball: Arc<Ball>,
    },
    Scaled {
        factor: u64,
        inner: Box<DistOracle>,
    },
    MaxCombo {
        g: Box<DistOracle>,
        h: Box<DistOracle>,
        quotient: Arc<QuotientMap>,
        m: u64,
    },
}

impl DistOracle {
    pub fn build(store: &BallStore, metric: &MetricSpec, bound: u64) -> Result<DistOracle> {
        match metric {
            MetricSpec::Word { group } => {
                if group.has_standard_marking() {
                    match group.free_rank() {
                        Some(_) => return Ok(DistOracle::FreeLen),
                        None => return Ok(DistOracle::L1),
                    }
                }
                Ok(DistOracle::Table {
                    group: group.clone(),
                    ball: store.ball(metric, bound)?,
                })
            }
            MetricSpec::Scaled { factor, base } => Ok(DistOracle::Scaled {
                factor: *factor,
                inner: Box::new(DistOracle::build(store, base, bound / factor)?),
            }),
            MetricSpec::Induced { ambient, .. } => DistOracle::build(store, ambient, bound),
            MetricSpec::MaxCombo { d_g, quotient, d_h, m, .. } => Ok(DistOracle::MaxCombo {
                g: Box::new(DistOracle::build(store, d_g, bound)?),
                h: Box::new(DistOracle::build(store, d_h, bound / m)?),
                quotient: quotient.clone(),
                m: *m,
            }),
        }
    }

    pub fn query(&self, x: &GroupElement, y: &GroupElement) -> Result<u64> {
        match self {
            DistOracle::FreeLen => {
                let a = x.as_free()?;
                let b = y.as_free()?;
                // |x^{-1} y| with the cancellation done directly: drop the
                // common prefix of x and y.
                let common = a.iter().zip(b.iter()).take_while(|(p, q)| p == q).count();
                Ok((a.len() - common + b.len() - common) as u64)
            }
            DistOracle::L1 => {
                let a = x.as_abelian()?;
                let b = y.as_abelian()?;
                Ok(a.iter().zip(b).map(|(p, q)| p.abs_diff(*q)).sum())
            }
            DistOracle::Table { group, ball } => {
                let z = group.left_difference(x, y)?;
                ball.dist_of(&z).ok_or_else(|| {
                    Error::AssertionFailed("pair distance outside the oracle bound".into())
                })
            }
            DistOracle::Scaled { factor, inner } => Ok(factor * inner.query(x, y)?),
            DistOracle::MaxCombo { g, h, quotient, m } => {
                let base = g.query(x, y)?;
                let hx = quotient.apply(x)?;
                let hy = quotient.apply(y)?;
                Ok(base.max(m * h.query(&hx, &hy)?))
            }
        }
    }

    pub fn norm(&self, identity: &GroupElement, x: &GroupElement) -> Result<u64> {
        self.query(identity, x)
    }
}
