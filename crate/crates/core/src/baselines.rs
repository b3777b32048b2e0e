//! SimRank and PathSim reference measures.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hin::{Hin, MetaPath, MetaPathSet, NodeId, RelStep};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimRankConfig {
    pub decay: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

impl Default for SimRankConfig {
    fn default() -> Self {
        Self {
            decay: 0.8,
            iterations: 10,
            tolerance: 0.0,
        }
    }
}

impl SimRankConfig {
    fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "SimRank decay must lie in (0, 1), got {}",
                self.decay
            )));
        }
        Ok(())
    }
}

/// Untyped view of a graph: for each node, the union of its neighbours over
/// every relation and direction.
#[derive(Clone, Debug)]
pub struct MergedGraph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl MergedGraph {
    pub fn new(g: &Hin) -> Self {
        let schema = g.schema();
        let mut offsets = Vec::with_capacity(g.node_count() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for u in g.nodes() {
            let start = targets.len();
            for r in schema.relation_ids() {
                let fwd = RelStep::forward(r);
                targets.extend_from_slice(g.neighbors(u, fwd));
                if !schema.relation(r).is_self_inverse() {
                    targets.extend_from_slice(g.neighbors(u, schema.inverse(fwd)));
                }
            }
            targets[start..].sort_unstable();
            let mut row = targets.split_off(start);
            row.dedup();
            targets.extend(row);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[u.index()]..self.offsets[u.index() + 1]]
    }
}

/// Dense all-pairs SimRank scores.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRankTable {
    n: usize,
    scores: Vec<f64>,
    iterations: usize,
}

impl SimRankTable {
    pub fn score(&self, u: NodeId, v: NodeId) -> f64 {
        self.scores[u.index() * self.n + v.index()]
    }

    pub fn row(&self, u: NodeId) -> &[f64] {
        &self.scores[u.index() * self.n..(u.index() + 1) * self.n]
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Power iteration from the identity:
/// `S(a,b) = c/(|N(a)||N(b)|)·Σ S(a′,b′)`, diagonal fixed at 1. Runs
/// `cfg.iterations` rounds, stopping early once no entry moves by more
/// than `cfg.tolerance`.
pub fn simrank_power(g: &Hin, cfg: &SimRankConfig) -> Result<SimRankTable> {
    cfg.validate()?;
    let merged = MergedGraph::new(g);
    let n = merged.node_count();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        s[i * n + i] = 1.0;
    }
    let mut done = 0;
    for _ in 0..cfg.iterations {
        // half[a′·n + b] = mean over b′ ∈ N(b) of S(a′, b′)
        let half: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|a2| {
                let s = &s;
                let merged = &merged;
                (0..n).map(move |b| {
                    let nb = merged.neighbors(NodeId(b as u32));
                    if nb.is_empty() {
                        0.0
                    } else {
                        nb.iter().map(|b2| s[a2 * n + b2.index()]).sum::<f64>() / nb.len() as f64
                    }
                })
            })
            .collect();
        let next: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|a| {
                let half = &half;
                let na = merged.neighbors(NodeId(a as u32));
                (0..n).map(move |b| {
                    if a == b {
                        1.0
                    } else if na.is_empty() {
                        0.0
                    } else {
                        cfg.decay * na.iter().map(|a2| half[a2.index() * n + b]).sum::<f64>() / na.len() as f64
                    }
                })
            })
            .collect();
        let change = next.iter().zip(&s).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        s = next;
        done += 1;
        if change <= cfg.tolerance {
            break;
        }
    }
    Ok(SimRankTable {
        n,
        scores: s,
        iterations: done,
    })
}

/// Two reverse surfers on the merged graph; a first meeting after `ℓ`
/// steps scores `c^ℓ`. Walks are cut off after `cfg.iterations` steps.
pub fn simrank_montecarlo(g: &Hin, u: NodeId, v: NodeId, walks: u64, seed: u64, cfg: &SimRankConfig) -> Result<f64> {
    cfg.validate()?;
    if walks == 0 {
        return Err(Error::InvalidWalkCount);
    }
    if !g.contains(u) || !g.contains(v) {
        return Err(Error::unknown_node(format!("#{}", u.0.max(v.0))));
    }
    if u == v {
        return Ok(1.0);
    }
    let merged = MergedGraph::new(g);
    const CHUNK: u64 = 2048;
    let chunks = walks.div_ceil(CHUNK) as usize;
    let sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = (walks - c as u64 * CHUNK).min(CHUNK);
            let mut sum = 0.0;
            for _ in 0..len {
                let (mut x, mut y) = (u, v);
                let mut weight = 1.0;
                for _ in 0..cfg.iterations {
                    let nx = merged.neighbors(x);
                    let ny = merged.neighbors(y);
                    if nx.is_empty() || ny.is_empty() {
                        break;
                    }
                    x = nx[rng.random_range(0..nx.len())];
                    y = ny[rng.random_range(0..ny.len())];
                    weight *= cfg.decay;
                    if x == y {
                        sum += weight;
                        break;
                    }
                }
            }
            sum
        })
        .collect();
    Ok(sums.iter().sum::<f64>() / walks as f64)
}

/// Number of instances of the half path from `x` to each middle node.
fn half_counts(g: &Hin, x: NodeId, half: &[RelStep]) -> BTreeMap<NodeId, u64> {
    let mut cur = BTreeMap::from([(x, 1u64)]);
    for &step in half {
        let mut next = BTreeMap::new();
        for (&w, &c) in &cur {
            for &w2 in g.neighbors(w, step) {
                *next.entry(w2).or_insert(0) += c;
            }
        }
        cur = next;
    }
    cur
}

fn dot(a: &BTreeMap<NodeId, u64>, b: &BTreeMap<NodeId, u64>) -> u64 {
    a.iter().filter_map(|(w, &c)| b.get(w).map(|&d| c * d)).sum()
}

fn check_path(g: &Hin, u: NodeId, p: &MetaPath) -> Result<()> {
    let schema = g.schema();
    if !p.is_symmetric() {
        return Err(Error::AsymmetricMetaPath(p.label(schema)));
    }
    if p.len() % 2 == 1 {
        return Err(Error::OddLengthMetaPath(p.label(schema)));
    }
    if !g.contains(u) {
        return Err(Error::unknown_node(format!("#{}", u.0)));
    }
    if g.node_type(u) != p.start() {
        return Err(Error::TypeMismatch {
            node: g.external_id(u).to_owned(),
            actual: schema.type_name(g.node_type(u)).to_owned(),
            expected: schema.type_name(p.start()).to_owned(),
        });
    }
    Ok(())
}

/// Number of path instances of `p` between `u` and `v`.
pub fn path_count(g: &Hin, u: NodeId, v: NodeId, p: &MetaPath) -> Result<u64> {
    check_path(g, u, p)?;
    check_path(g, v, p)?;
    Ok(dot(&half_counts(g, u, p.half()), &half_counts(g, v, p.half())))
}

/// `2·p(u,v) / (p(u,u) + p(v,v))`, 0 when the denominator is 0.
pub fn pathsim(g: &Hin, u: NodeId, v: NodeId, p: &MetaPath) -> Result<f64> {
    check_path(g, u, p)?;
    check_path(g, v, p)?;
    let cu = half_counts(g, u, p.half());
    let cv = half_counts(g, v, p.half());
    let denom = dot(&cu, &cu) + dot(&cv, &cv);
    if denom == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * dot(&cu, &cv) as f64 / denom as f64)
}

/// PathSim of `u` against every node of its type, summed over the paths in
/// `mps`; ascending node order, zero scores omitted.
pub fn pathsim_single_source(g: &Hin, u: NodeId, mps: &MetaPathSet) -> Result<Vec<(NodeId, f64)>> {
    let mut total: BTreeMap<NodeId, f64> = BTreeMap::new();
    for p in mps.paths() {
        check_path(g, u, p)?;
        let half = p.half();
        let back: Vec<RelStep> = half.iter().rev().map(|&s| g.schema().inverse(s)).collect();
        let cu = half_counts(g, u, half);
        let self_u = dot(&cu, &cu);
        // Path counts to every v: walk the reverse half from the middle.
        let mut reach: BTreeMap<NodeId, u64> = cu.clone();
        for &step in &back {
            let mut next = BTreeMap::new();
            for (&w, &c) in &reach {
                for &w2 in g.neighbors(w, step) {
                    *next.entry(w2).or_insert(0) += c;
                }
            }
            reach = next;
        }
        for (v, p_uv) in reach {
            let cv = half_counts(g, v, half);
            let denom = self_u + dot(&cv, &cv);
            if denom > 0 && p_uv > 0 {
                *total.entry(v).or_insert(0.0) += 2.0 * p_uv as f64 / denom as f64;
            }
        }
    }
    Ok(total.into_iter().collect())
}
