use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::engine::exact::hetfs_single_source;
use crate::engine::model::{ContentMode, WeightModel};
use crate::engine::montecarlo::hetfs_montecarlo_all;
use crate::error::{Error, Result};
use crate::hin::{enumerate_symmetric_metapaths, MetaPathSet, NodeId};

pub const DEFAULT_EPSILON: f64 = 0.000005;
pub const DEFAULT_K: usize = 1000;
pub const DEFAULT_WALKS: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Exact,
    MonteCarlo { walks: u64, seed: u64 },
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::MonteCarlo { .. } => "mc",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Engine kind without its sampling parameters, as given on a command line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EngineKind {
    #[default]
    Exact,
    MonteCarlo,
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EngineKind::Exact),
            "mc" | "montecarlo" => Ok(EngineKind::MonteCarlo),
            _ => Err(Error::InvalidParameter(format!(
                "engine must be exact or mc, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryOptions {
    pub k: usize,
    pub epsilon: f64,
    pub engine: Engine,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            epsilon: DEFAULT_EPSILON,
            engine: Engine::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedNode {
    pub rank: usize,
    pub node: String,
    pub score: f64,
}

/// Ranked answer to a single-source query.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopKResult {
    pub query: String,
    pub metapaths: Vec<String>,
    pub engine: &'static str,
    pub k: usize,
    pub results: Vec<RankedNode>,
    pub elapsed_ms: f64,
    #[serde(skip)]
    pub nodes: Vec<(NodeId, f64)>,
}

impl TopKResult {
    /// `rank\tnode_id\tscore` with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("rank\tnode_id\tscore\n");
        for r in &self.results {
            out.push_str(&format!("{}\t{}\t{}\n", r.rank, r.node, r.score));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Heap entry ordered so that the *worst* candidate sits on top of the
/// max-heap: lower score is worse, and on equal scores the larger id.
#[derive(PartialEq)]
struct Worst(f64, NodeId);

impl Eq for Worst {}

impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` best entries with score ≥ `epsilon`, excluding `query`, sorted by
/// score descending then node id ascending.
pub fn select_top_k(
    scores: impl IntoIterator<Item = (NodeId, f64)>,
    query: NodeId,
    k: usize,
    epsilon: f64,
) -> Vec<(NodeId, f64)> {
    let mut heap: BinaryHeap<Worst> = BinaryHeap::with_capacity(k + 1);
    if k == 0 {
        return Vec::new();
    }
    for (v, s) in scores {
        if v == query || !(s >= epsilon) {
            continue;
        }
        let entry = Worst(s, v);
        if heap.len() < k {
            heap.push(entry);
        } else if entry < *heap.peek().unwrap() {
            heap.pop();
            heap.push(entry);
        }
    }
    let mut out: Vec<(NodeId, f64)> = heap.into_iter().map(|Worst(s, v)| (v, s)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Single-source scores with the chosen engine.
pub fn single_source(wm: &WeightModel<'_>, u: NodeId, mps: &MetaPathSet, engine: Engine) -> Result<Vec<(NodeId, f64)>> {
    match engine {
        Engine::Exact => {
            if wm.content_mode() == ContentMode::Pairwise {
                return Err(Error::UnsupportedContentMode("pair"));
            }
            hetfs_single_source(wm, u, mps)
        }
        Engine::MonteCarlo { walks, seed } => hetfs_montecarlo_all(wm, u, mps, walks, seed),
    }
}

pub fn topk(wm: &WeightModel<'_>, u: NodeId, mps: &MetaPathSet, opts: &QueryOptions) -> Result<TopKResult> {
    if opts.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let start = Instant::now();
    let scores = single_source(wm, u, mps, opts.engine)?;
    let nodes = select_top_k(scores, u, opts.k, opts.epsilon);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(build_result(
        wm,
        u,
        mps.labels(wm.graph().schema()),
        opts,
        nodes,
        elapsed_ms,
    ))
}

fn build_result(
    wm: &WeightModel<'_>,
    u: NodeId,
    metapaths: Vec<String>,
    opts: &QueryOptions,
    nodes: Vec<(NodeId, f64)>,
    elapsed_ms: f64,
) -> TopKResult {
    let g = wm.graph();
    TopKResult {
        query: g.external_id(u).to_owned(),
        metapaths,
        engine: opts.engine.name(),
        k: opts.k,
        results: nodes
            .iter()
            .enumerate()
            .map(|(i, &(v, score))| RankedNode {
                rank: i + 1,
                node: g.external_id(v).to_owned(),
                score,
            })
            .collect(),
        elapsed_ms,
        nodes,
    }
}

/// Query over every symmetric meta-path up to `max_len` starting at the
/// query node's type. A type without relations yields an empty result.
pub fn metapath_free_query(wm: &WeightModel<'_>, u: NodeId, max_len: usize, opts: &QueryOptions) -> Result<TopKResult> {
    let g = wm.graph();
    if !g.contains(u) {
        return Err(Error::unknown_node(format!("#{}", u.0)));
    }
    let start = Instant::now();
    let set = enumerate_symmetric_metapaths(g.schema(), g.node_type(u), max_len)?;
    if set.is_empty() {
        return Ok(build_result(wm, u, Vec::new(), opts, Vec::new(), 0.0));
    }
    let mut result = topk(wm, u, &set, opts)?;
    result.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heap_matches_full_sort() {
        let scores: Vec<(NodeId, f64)> = [(0, 0.5), (1, 0.2), (2, 0.5), (3, 0.9), (4, 0.0), (5, 0.2)]
            .iter()
            .map(|&(i, s)| (NodeId(i), s))
            .collect();
        let top = select_top_k(scores.clone(), NodeId(3), 3, 1e-6);
        assert_eq!(top, vec![(NodeId(0), 0.5), (NodeId(2), 0.5), (NodeId(1), 0.2)]);
        let all = select_top_k(scores.clone(), NodeId(9), 100, 1e-6);
        assert_eq!(all.len(), 5);
        assert!(select_top_k(scores, NodeId(9), 5, 1.0).is_empty());
    }
}
