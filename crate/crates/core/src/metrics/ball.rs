//! Exhaustive metric balls with deterministic ordering, an in-memory store
//! and an optional on-disk cache.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use super::MetricSpec;
use crate::error::{Error, Result};
use crate::groups::{GroupElement, MarkedGroup};

/// Default memory cap: 10^7 elements per ball.
pub const DEFAULT_BALL_CAP: usize = 10_000_000;

/// The exact ball `{ x : d(x, 1) <= r }`, ordered by distance then by
/// lexicographic normal form.
#[derive(Debug)]
pub struct Ball {
    pub radius: u64,
    elems: Vec<(GroupElement, u64)>,
    index: HashMap<GroupElement, u32>,
}

impl Ball {
    fn from_sorted(radius: u64, elems: Vec<(GroupElement, u64)>) -> Ball {
        debug_assert!(elems.windows(2).all(|p| (p[0].1, &p[0].0) < (p[1].1, &p[1].0)));
        let index = elems
            .iter()
            .enumerate()
            .map(|(i, (g, _))| (g.clone(), i as u32))
            .collect();
        Ball { radius, elems, index }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(GroupElement, u64)> {
        self.elems.iter()
    }

    pub fn elem(&self, i: usize) -> &GroupElement {
        &self.elems[i].0
    }

    pub fn dist(&self, i: usize) -> u64 {
        self.elems[i].1
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn position_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).map(|&i| i as usize)
    }

    pub fn dist_of(&self, g: &GroupElement) -> Option<u64> {
        self.position_of(g).map(|i| self.elems[i].1)
    }

    /// Number of elements within radius `r` (a prefix, by the ordering).
    pub fn prefix_len(&self, r: u64) -> usize {
        self.elems.partition_point(|(_, d)| *d <= r)
    }

    /// The sub-ball of radius `r <= self.radius`.
    pub fn prefix(&self, r: u64) -> Ball {
        let n = self.prefix_len(r);
        Ball::from_sorted(r, self.elems[..n].to_vec())
    }
}

/// Shared store of computed balls, keyed by metric hash and radius.
///
/// Readers share; writes take the lock briefly to publish an `Arc`.
/// When a directory is set, balls are persisted as sorted text files and
/// corrupt files are rebuilt transparently.
#[derive(Debug)]
pub struct BallStore {
    mem: RwLock<HashMap<(String, u64), Arc<Ball>>>,
    dir: Option<PathBuf>,
    cap: usize,
}

impl Default for BallStore {
    fn default() -> Self {
        BallStore::in_memory()
    }
}

impl BallStore {
    pub fn in_memory() -> Self {
        BallStore {
            mem: RwLock::new(HashMap::new()),
            dir: None,
            cap: DEFAULT_BALL_CAP,
        }
    }

    pub fn with_dir(dir: PathBuf) -> Self {
        BallStore {
            mem: RwLock::new(HashMap::new()),
            dir: Some(dir),
            cap: DEFAULT_BALL_CAP,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// The exact ball of radius `r` for the metric, cached.
    pub fn ball(&self, metric: &MetricSpec, r: u64) -> Result<Arc<Ball>> {
        let hash = metric.hash();
        if let Some(b) = self.lookup(&hash, r) {
            return Ok(b);
        }
        if let Some(path) = self.file_path(&hash, r) {
            if let Some(b) = load_ball_file(&path, r) {
                return Ok(self.publish(hash, r, b));
            }
        }
        let ball = self.compute(metric, r)?;
        if let Some(path) = self.file_path(&hash, r) {
            let _ = write_ball_file(&path, &hash, &ball);
        }
        Ok(self.publish(hash, r, ball))
    }

    fn lookup(&self, hash: &str, r: u64) -> Option<Arc<Ball>> {
        let mem = self.mem.read().unwrap();
        if let Some(b) = mem.get(&(hash.to_string(), r)) {
            return Some(b.clone());
        }
        // A larger cached ball contains this one as a prefix.
        let bigger = mem
            .iter()
            .filter(|((h, rad), _)| h == hash && *rad > r)
            .min_by_key(|((_, rad), _)| *rad)
            .map(|(_, b)| b.clone());
        drop(mem);
        bigger.map(|b| self.publish(hash.to_string(), r, b.prefix(r)))
    }

    fn publish(&self, hash: String, r: u64, ball: Ball) -> Arc<Ball> {
        let arc = Arc::new(ball);
        let mut mem = self.mem.write().unwrap();
        mem.entry((hash, r)).or_insert_with(|| arc.clone()).clone()
    }

    fn file_path(&self, hash: &str, r: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{hash}_r{r}.ball")))
    }

    fn compute(&self, metric: &MetricSpec, r: u64) -> Result<Ball> {
        match metric {
            MetricSpec::Word { group } => bfs_word_ball(group, r, self.cap),
            MetricSpec::Scaled { factor, base } => {
                let inner = self.ball(base, r / factor)?;
                let elems = inner
                    .iter()
                    .map(|(g, d)| (g.clone(), d * factor))
                    .collect();
                Ok(Ball::from_sorted(r, elems))
            }
            MetricSpec::Induced { subgroup, ambient } => {
                let inner = self.ball(ambient, r)?;
                let elems = inner
                    .iter()
                    .filter(|(g, _)| subgroup.belongs(g))
                    .cloned()
                    .collect();
                Ok(Ball::from_sorted(r, elems))
            }
            MetricSpec::MaxCombo { d_g, quotient, d_h, m, .. } => {
                // D >= d_G, so the D-ball is a subset of the d_G-ball.
                let inner = self.ball(d_g, r)?;
                let mut elems: Vec<(GroupElement, u64)> = Vec::new();
                for (g, dist_g) in inner.iter() {
                    let img = quotient.apply(g)?;
                    let dh = d_h.norm(self, &img)?;
                    let combined = (*dist_g).max(m * dh);
                    if combined <= r {
                        elems.push((g.clone(), combined));
                    }
                }
                elems.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
                Ok(Ball::from_sorted(r, elems))
            }
        }
    }
}

/// Breadth-first enumeration of the word-metric ball. The frontier is
/// expanded in parallel shards; each level is sorted, so the result does
/// not depend on the worker count.
pub fn bfs_word_ball(group: &Arc<MarkedGroup>, r: u64, cap: usize) -> Result<Ball> {
    let identity = group.identity();
    let mut seen: HashMap<GroupElement, u64> = HashMap::new();
    seen.insert(identity.clone(), 0);
    let mut elems: Vec<(GroupElement, u64)> = vec![(identity.clone(), 0)];
    let mut frontier = vec![identity];
    for level in 1..=r {
        let candidates: Vec<GroupElement> = if frontier.len() >= 1024 {
            frontier
                .par_chunks(256)
                .flat_map_iter(|chunk| {
                    let mut out = Vec::with_capacity(chunk.len() * group.generators().len());
                    for g in chunk {
                        for s in group.generators() {
                            out.push(group.multiply_unchecked(g, s));
                        }
                    }
                    out
                })
                .collect()
        } else {
            let mut out = Vec::with_capacity(frontier.len() * group.generators().len());
            for g in &frontier {
                for s in group.generators() {
                    out.push(group.multiply_unchecked(g, s));
                }
            }
            out
        };
        let mut next: Vec<GroupElement> = Vec::new();
        for c in candidates {
            if !seen.contains_key(&c) {
                seen.insert(c.clone(), level);
                next.push(c);
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort();
        if elems.len() + next.len() > cap {
            return Err(Error::MemoryCap { cap, reached: level - 1 });
        }
        elems.extend(next.iter().map(|g| (g.clone(), level)));
        frontier = next;
    }
    Ok(Ball::from_sorted(r, elems))
}

fn write_ball_file(path: &PathBuf, hash: &str, ball: &Ball) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("ball.tmp");
    {
        let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
        writeln!(f, "horofront-ball v1 {} r={} n={}", hash, ball.radius, ball.len())?;
        for (g, d) in ball.iter() {
            writeln!(f, "{} {}", g.token(), d)?;
        }
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_ball_file(path: &PathBuf, want_radius: u64) -> Option<Ball> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    let header = lines.next()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "horofront-ball" || parts[1] != "v1" {
        return None;
    }
    let radius: u64 = parts[3].strip_prefix("r=")?.parse().ok()?;
    let count: usize = parts[4].strip_prefix("n=")?.parse().ok()?;
    if radius != want_radius {
        return None;
    }
    let mut elems = Vec::with_capacity(count);
    for line in lines {
        let (tok, dist) = line.split_once(' ')?;
        let g = GroupElement::parse_token(tok).ok()?;
        let d: u64 = dist.parse().ok()?;
        elems.push((g, d));
    }
    if elems.len() != count {
        return None;
    }
    if !elems.windows(2).all(|p| (p[0].1, &p[0].0) < (p[1].1, &p[1].0)) {
        return None;
    }
    Some(Ball::from_sorted(radius, elems))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricSpec;

    #[test]
    fn free_group_ball_sizes() {
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2);
        let store = BallStore::in_memory();
        // Spheres of F_2 have sizes 4 * 3^(k-1).
        assert_eq!(store.ball(&m, 0).unwrap().len(), 1);
        assert_eq!(store.ball(&m, 1).unwrap().len(), 5);
        assert_eq!(store.ball(&m, 2).unwrap().len(), 17);
        assert_eq!(store.ball(&m, 3).unwrap().len(), 53);
    }

    #[test]
    fn lattice_ball_sizes() {
        let z2 = MarkedGroup::free_abelian(2);
        let m = MetricSpec::word(z2);
        let store = BallStore::in_memory();
        // l1 balls: 1, 5, 13, 25.
        assert_eq!(store.ball(&m, 2).unwrap().len(), 13);
        assert_eq!(store.ball(&m, 3).unwrap().len(), 25);
    }

    #[test]
    fn ball_ordering_and_prefix() {
        let z = MarkedGroup::free_abelian(1);
        let m = MetricSpec::word(z);
        let store = BallStore::in_memory();
        let b = store.ball(&m, 2).unwrap();
        let toks: Vec<String> = b.iter().map(|(g, _)| g.token()).collect();
        assert_eq!(toks, vec!["(0)", "(-1)", "(1)", "(-2)", "(2)"]);
        let p = b.prefix(1);
        assert_eq!(p.len(), 3);
        assert_eq!(p.dist_of(&GroupElement::abelian(&[-1])), Some(1));
    }

    #[test]
    fn memory_cap_is_an_error() {
        let f2 = MarkedGroup::free(2);
        let m = MetricSpec::word(f2);
        let store = BallStore::in_memory().with_cap(10);
        match store.ball(&m, 4) {
            Err(Error::MemoryCap { reached, .. }) => assert_eq!(reached, 1),
            other => panic!("expected memory cap, got {other:?}"),
        }
    }

    #[test]
    fn disk_cache_round_trip_and_corruption_recovery() {
        let dir = tempfile::tempdir().unwrap();
        let z2 = MarkedGroup::free_abelian(2);
        let m = MetricSpec::word(z2);
        let store = BallStore::with_dir(dir.path().to_path_buf());
        let b1 = store.ball(&m, 3).unwrap();
        // A fresh store must load the same ball from disk.
        let store2 = BallStore::with_dir(dir.path().to_path_buf());
        let b2 = store2.ball(&m, 3).unwrap();
        assert_eq!(b1.len(), b2.len());
        for (i, (g, d)) in b1.iter().enumerate() {
            assert_eq!((g, d), (b2.elem(i), &b2.dist(i)));
        }
        // Corrupt every cache file: balls are rebuilt transparently.
        for entry in fs::read_dir(dir.path()).unwrap() {
            fs::write(entry.unwrap().path(), b"garbage").unwrap();
        }
        let store3 = BallStore::with_dir(dir.path().to_path_buf());
        let b3 = store3.ball(&m, 3).unwrap();
        assert_eq!(b3.len(), 25);
    }
}
