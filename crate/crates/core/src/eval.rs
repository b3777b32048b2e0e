//! Link prediction, clustering and classification harness and metrics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{hetfs_single_source, WeightModel};
use crate::error::{Error, Result};
use crate::hin::{enumerate_symmetric_metapaths, Hin, MetaPath, NodeId, RelationId, TypeId};

/// Timestamp per stored edge `(relation, src, dst)`.
pub type EdgeTimes = HashMap<(RelationId, NodeId, NodeId), i64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitMode {
    /// Edges with time `<= threshold` train, later ones test.
    Time(i64),
    /// Each edge trains with probability `ratio`.
    Random { ratio: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub relation: String,
}

/// A training graph plus the new links held out for testing.
#[derive(Clone, Debug)]
pub struct LinkSplit {
    pub train: Hin,
    pub endpoint: TypeId,
    /// Unordered pairs linked in the training graph (smaller id first).
    pub train_links: HashSet<(NodeId, NodeId)>,
    /// Unordered pairs linked only in the full graph (smaller id first).
    pub positives: BTreeSet<(NodeId, NodeId)>,
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Links between endpoint-type nodes induced by relation `r`: the edges
/// themselves for a relation within one type, otherwise pairs of source
/// nodes sharing a target.
fn induced_links(g: &Hin, r: RelationId) -> HashSet<(NodeId, NodeId)> {
    let rel = g.schema().relation(r);
    let mut out = HashSet::new();
    if rel.src == rel.dst {
        for (a, b) in g.edges(r) {
            if a != b {
                out.insert(ordered(a, b));
            }
        }
    } else {
        let back = g.schema().inverse(crate::hin::RelStep::forward(r));
        for &w in g.members(rel.dst) {
            let sharing = g.neighbors(w, back);
            for (i, &a) in sharing.iter().enumerate() {
                for &b in &sharing[i + 1..] {
                    out.insert(ordered(a, b));
                }
            }
        }
    }
    out
}

/// Split the edges of one relation into train and test; every other
/// relation stays in the training graph.
pub fn split_links(g: &Hin, spec: &SplitSpec, times: Option<&EdgeTimes>) -> Result<LinkSplit> {
    let r = g.schema().resolve_step(&spec.relation)?.relation;
    let rel = g.schema().relation(r).clone();
    let train = match spec.mode {
        SplitMode::Time(threshold) => {
            let times = times.ok_or_else(|| Error::InvalidParameter("time split needs an edge time column".into()))?;
            let mut missing = None;
            let train = g.filter_edges(|rr, a, b| {
                if rr != r {
                    return true;
                }
                match times.get(&(rr, a, b)).or_else(|| times.get(&(rr, b, a))) {
                    Some(&t) => t <= threshold,
                    None => {
                        missing.get_or_insert((a, b));
                        true
                    }
                }
            });
            if let Some((a, b)) = missing {
                return Err(Error::InvalidParameter(format!(
                    "edge {} - {} has no time",
                    g.external_id(a),
                    g.external_id(b)
                )));
            }
            train
        }
        SplitMode::Random { ratio, seed } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "train ratio must lie in (0, 1), got {ratio}"
                )));
            }
            let edges: Vec<(NodeId, NodeId)> = g.edges(r).collect();
            let mut order: Vec<usize> = (0..edges.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let keep = (edges.len() as f64 * ratio).round() as usize;
            let kept: HashSet<(NodeId, NodeId)> = order[..keep].iter().map(|&i| edges[i]).collect();
            g.filter_edges(|rr, a, b| rr != r || kept.contains(&(a, b)))
        }
    };
    let full_links = induced_links(g, r);
    let train_links = induced_links(&train, r);
    let positives: BTreeSet<(NodeId, NodeId)> = full_links.into_iter().filter(|p| !train_links.contains(p)).collect();
    if positives.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    Ok(LinkSplit {
        train,
        endpoint: rel.src,
        train_links,
        positives,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkEvalOptions {
    /// Predicted links per query node for F1.
    pub k: usize,
    /// Above this many candidate pairs, negatives are sampled.
    pub sample_above: usize,
    pub negatives_per_positive: usize,
    pub seed: u64,
}

impl Default for LinkEvalOptions {
    fn default() -> Self {
        Self {
            k: 10,
            sample_above: 10_000,
            negatives_per_positive: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkReport {
    pub auc: f64,
    pub mrr: f64,
    pub f1: f64,
    pub queries: usize,
    pub positives: usize,
    pub negatives: usize,
}

/// Score held-out links. `scorer(u)` returns similarity scores of `u`
/// against other nodes (missing entries score 0).
pub fn evaluate_links<F>(split: &LinkSplit, scorer: F, opts: &LinkEvalOptions) -> Result<LinkReport>
where
    F: Fn(NodeId) -> Result<Vec<(NodeId, f64)>> + Sync,
{
    let g = &split.train;
    let candidates: &[NodeId] = g.members(split.endpoint);
    let mut by_query: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &(a, b) in &split.positives {
        by_query.entry(a).or_default().insert(b);
        by_query.entry(b).or_default().insert(a);
    }
    let total_pairs: usize = by_query.len() * candidates.len().saturating_sub(1);
    let sample = total_pairs > opts.sample_above;

    struct PerQuery {
        pos: Vec<f64>,
        neg: Vec<f64>,
        reciprocal: f64,
        hits: usize,
        predicted: usize,
        relevant: usize,
    }

    let queries: Vec<(NodeId, &BTreeSet<NodeId>)> = by_query.iter().map(|(u, s)| (*u, s)).collect();
    let per: Vec<PerQuery> = queries
        .par_iter()
        .map(|&(u, pos)| -> Result<PerQuery> {
            let scores: HashMap<NodeId, f64> = scorer(u)?.into_iter().collect();
            let mut ranked: Vec<(NodeId, f64, bool)> = Vec::new();
            for &v in candidates {
                let linked = split.train_links.contains(&ordered(u, v));
                if v == u || linked {
                    // a positive must never already be a training link
                    assert!(!(linked && pos.contains(&v)), "test link leaked into training graph");
                    continue;
                }
                ranked.push((v, scores.get(&v).copied().unwrap_or(0.0), pos.contains(&v)));
            }
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let reciprocal = ranked.iter().position(|r| r.2).map_or(0.0, |i| 1.0 / (i + 1) as f64);
            let top = &ranked[..opts.k.min(ranked.len())];
            let hits = top.iter().filter(|r| r.2).count();
            let pos_scores: Vec<f64> = ranked.iter().filter(|r| r.2).map(|r| r.1).collect();
            let mut neg_scores: Vec<f64> = ranked.iter().filter(|r| !r.2).map(|r| r.1).collect();
            if sample {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ u64::from(u.0).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let want = (opts.negatives_per_positive * pos_scores.len()).min(neg_scores.len());
                neg_scores = neg_scores.choose_multiple(&mut rng, want).copied().collect();
            }
            Ok(PerQuery {
                relevant: pos_scores.len(),
                pos: pos_scores,
                neg: neg_scores,
                reciprocal,
                hits,
                predicted: top.len(),
            })
        })
        .collect::<Result<_>>()?;

    let pos: Vec<f64> = per.iter().flat_map(|q| q.pos.iter().copied()).collect();
    let neg: Vec<f64> = per.iter().flat_map(|q| q.neg.iter().copied()).collect();
    let auc = auc(&pos, &neg)?;
    let with_pos: Vec<&PerQuery> = per.iter().filter(|q| q.relevant > 0).collect();
    let mrr = with_pos.iter().map(|q| q.reciprocal).sum::<f64>() / with_pos.len().max(1) as f64;
    let hits: usize = per.iter().map(|q| q.hits).sum();
    let predicted: usize = per.iter().map(|q| q.predicted).sum();
    let relevant: usize = per.iter().map(|q| q.relevant).sum();
    Ok(LinkReport {
        auc,
        mrr,
        f1: f1(hits, predicted, relevant),
        queries: per.len(),
        positives: pos.len(),
        negatives: neg.len(),
    })
}

/// Link prediction scored by meta-path-free similarity over paths up to
/// `max_len`. `wm` must be built on `split.train`.
pub fn link_prediction_eval(
    wm: &WeightModel<'_>,
    split: &LinkSplit,
    max_len: usize,
    opts: &LinkEvalOptions,
) -> Result<LinkReport> {
    let set = enumerate_symmetric_metapaths(wm.graph().schema(), split.endpoint, max_len)?;
    evaluate_links(
        split,
        |u| {
            if set.is_empty() {
                Ok(Vec::new())
            } else {
                hetfs_single_source(wm, u, &set)
            }
        },
        opts,
    )
}

/// Deterministic pseudo-random scores, for sanity-checking the harness.
pub fn random_scores(g: &Hin, u: NodeId, endpoint: TypeId, seed: u64) -> Vec<(NodeId, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(u.0));
    g.members(endpoint)
        .iter()
        .map(|&v| (v, rand::Rng::random::<f64>(&mut rng)))
        .collect()
}

fn f1(hits: usize, predicted: usize, relevant: usize) -> f64 {
    if hits == 0 {
        return 0.0;
    }
    let p = hits as f64 / predicted as f64;
    let r = hits as f64 / relevant as f64;
    2.0 * p * r / (p + r)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // ranks i+1..=j share their average
        let avg = (i + 1 + j) as f64 / 2.0;
        rank_sum += avg * all[i..j].iter().filter(|x| x.1).count() as f64;
        i = j;
    }
    let np = positives.len() as f64;
    let nn = negatives.len() as f64;
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Mean over lists of the reciprocal rank of the first relevant entry.
/// Lists are in ranked order; lists without a relevant entry are skipped.
pub fn mean_reciprocal_rank(rankings: &[Vec<bool>]) -> Result<f64> {
    let rr: Vec<f64> = rankings
        .iter()
        .filter_map(|r| r.iter().position(|&hit| hit).map(|i| 1.0 / (i + 1) as f64))
        .collect();
    if rr.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rr.iter().sum::<f64>() / rr.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusteringReport {
    pub nmi: f64,
    pub ari: f64,
}

fn encode<L: Eq + Hash + Clone + Ord>(labels: &[L]) -> (Vec<usize>, usize) {
    let distinct: BTreeSet<&L> = labels.iter().collect();
    let index: HashMap<&L, usize> = distinct.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    (labels.iter().map(|l| index[l]).collect(), distinct.len())
}

/// NMI (arithmetic-mean normalization) and adjusted Rand index.
pub fn clustering_metrics<L: Eq + Hash + Clone + Ord>(pred: &[L], truth: &[L]) -> Result<ClusteringReport> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = pred.len() as f64;
    let (p, kp) = encode(pred);
    let (t, kt) = encode(truth);
    let mut table = vec![vec![0usize; kp]; kt];
    for (&a, &b) in t.iter().zip(&p) {
        table[a][b] += 1;
    }
    let rows: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..kp).map(|j| table.iter().map(|r| r[j]).sum()).collect();

    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let q = c as f64 / n;
                -q * q.ln()
            })
            .sum()
    };
    let ht = entropy(&rows);
    let hp = entropy(&cols);
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    let nmi = if ht == 0.0 && hp == 0.0 {
        1.0
    } else {
        (mi / ((ht + hp) / 2.0)).clamp(0.0, 1.0)
    };

    let pairs = |x: usize| (x * x.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = rows.iter().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = cols.iter().map(|&c| pairs(c)).sum();
    let expected = sum_rows * sum_cols / pairs(pred.len());
    let max = (sum_rows + sum_cols) / 2.0;
    let ari = if max == expected {
        1.0
    } else {
        (index - expected) / (max - expected)
    };
    Ok(ClusteringReport { nmi, ari })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
}

/// Micro and macro F1 over the labels that occur. `None` means "no label":
/// it is never a class of its own, so predicting a label for an unlabeled
/// node is a false positive and predicting nothing for a labeled node a
/// false negative.
pub fn classification_metrics<L: Eq + Hash + Clone + Ord>(
    pred: &[Option<L>],
    truth: &[Option<L>],
) -> Result<ClassificationReport> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts: BTreeMap<&L, (usize, usize, usize)> = BTreeMap::new();
    for (p, t) in pred.iter().zip(truth) {
        match (p, t) {
            (Some(a), Some(b)) if a == b => counts.entry(a).or_default().0 += 1,
            _ => {
                if let Some(a) = p {
                    counts.entry(a).or_default().1 += 1;
                }
                if let Some(b) = t {
                    counts.entry(b).or_default().2 += 1;
                }
            }
        }
    }
    let (tp, fp, fn_) = counts
        .values()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
    let micro = f1(tp, tp + fp, tp + fn_);
    let macro_f1 = if counts.is_empty() {
        // nothing labeled and nothing predicted: perfect agreement
        1.0
    } else {
        counts
            .values()
            .map(|&(tp, fp, fn_)| f1(tp, tp + fp, tp + fn_))
            .sum::<f64>()
            / counts.len() as f64
    };
    let micro = if counts.is_empty() { 1.0 } else { micro };
    Ok(ClassificationReport {
        micro_f1: micro,
        macro_f1,
    })
}

/// Class labels for a subset of nodes; the vocabulary is sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledNodes {
    vocabulary: Vec<String>,
    labels: BTreeMap<NodeId, usize>,
}

impl LabeledNodes {
    pub fn new(g: &Hin, pairs: &[(String, String)]) -> Result<Self> {
        let vocabulary: Vec<String> = pairs
            .iter()
            .map(|(_, l)| l.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut labels = BTreeMap::new();
        for (id, l) in pairs {
            let u = g.node(id)?;
            labels.insert(u, vocabulary.binary_search(l).unwrap());
        }
        Ok(Self { vocabulary, labels })
    }

    fn from_indices(vocabulary: Vec<String>, labels: BTreeMap<NodeId, usize>) -> Self {
        Self { vocabulary, labels }
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn label(&self, u: NodeId) -> Option<&str> {
        self.labels.get(&u).map(|&i| self.vocabulary[i].as_str())
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Deterministic split into a labeled fraction and the rest.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(LabeledNodes, LabeledNodes)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        // Stratify so every class keeps at least one labeled node.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train = BTreeMap::new();
        let mut test = BTreeMap::new();
        for class in 0..self.vocabulary.len() {
            let mut members: Vec<NodeId> = self
                .labels
                .iter()
                .filter(|(_, &c)| c == class)
                .map(|(&u, _)| u)
                .collect();
            members.shuffle(&mut rng);
            let keep = ((members.len() as f64 * train_fraction).round() as usize).max(1);
            for (i, u) in members.into_iter().enumerate() {
                if i < keep {
                    train.insert(u, class);
                } else {
                    test.insert(u, class);
                }
            }
        }
        Ok((
            Self::from_indices(self.vocabulary.clone(), train),
            Self::from_indices(self.vocabulary.clone(), test),
        ))
    }

    /// Label nodes of `path`'s start type by the most frequent label among
    /// the labeled nodes its instances reach, counting instances. Ties go to
    /// the earlier label in vocabulary order.
    pub fn via_anchor(&self, g: &Hin, path: &MetaPath) -> LabeledNodes {
        let mut labels = BTreeMap::new();
        for &u in g.members(path.start()) {
            let mut cur: BTreeMap<NodeId, u64> = BTreeMap::from([(u, 1)]);
            for &step in path.steps() {
                let mut next = BTreeMap::new();
                for (&w, &c) in &cur {
                    for &w2 in g.neighbors(w, step) {
                        *next.entry(w2).or_insert(0u64) += c;
                    }
                }
                cur = next;
            }
            let mut votes = vec![0u64; self.vocabulary.len()];
            for (w, c) in cur {
                if let Some(&l) = self.labels.get(&w) {
                    votes[l] += c;
                }
            }
            if let Some(best) = argmax_first(&votes) {
                labels.insert(u, best);
            }
        }
        Self::from_indices(self.vocabulary.clone(), labels)
    }
}

fn argmax_first<T: PartialOrd + Copy + Default>(values: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v > T::default() && best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub accuracy: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub labeled: usize,
    pub targets: usize,
    pub unlabeled: usize,
}

/// Predict a label for every target: each labeled node `v` votes for its
/// label with weight `s(u, v)` under meta-path-free similarity. `None`
/// when no labeled node has positive similarity.
pub fn similarity_label_transfer(
    wm: &WeightModel<'_>,
    labels: &LabeledNodes,
    targets: &[NodeId],
    max_len: usize,
) -> Result<Vec<Option<String>>> {
    let g = wm.graph();
    let mut sets = HashMap::new();
    for &u in targets {
        let t = g.node_type(u);
        if let std::collections::hash_map::Entry::Vacant(e) = sets.entry(t) {
            e.insert(enumerate_symmetric_metapaths(g.schema(), t, max_len)?);
        }
    }
    targets
        .par_iter()
        .map(|&u| {
            let set = &sets[&g.node_type(u)];
            if set.is_empty() {
                return Ok(None);
            }
            let mut votes = vec![0.0f64; labels.vocabulary.len()];
            for (v, s) in hetfs_single_source(wm, u, set)? {
                if v == u {
                    continue;
                }
                if let Some(&l) = labels.labels.get(&v) {
                    votes[l] += s;
                }
            }
            Ok(argmax_first(&votes).map(|i| labels.vocabulary[i].clone()))
        })
        .collect()
}

/// Label transfer from `train` onto the nodes of `test`, scored against
/// the held-out labels.
pub fn label_transfer_eval(
    wm: &WeightModel<'_>,
    train: &LabeledNodes,
    test: &LabeledNodes,
    max_len: usize,
) -> Result<TransferReport> {
    let targets: Vec<NodeId> = test.nodes().collect();
    if targets.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pred = similarity_label_transfer(wm, train, &targets, max_len)?;
    let truth: Vec<Option<String>> = targets.iter().map(|&u| test.label(u).map(str::to_owned)).collect();
    let correct = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
    let report = classification_metrics(&pred, &truth)?;
    Ok(TransferReport {
        accuracy: correct as f64 / targets.len() as f64,
        micro_f1: report.micro_f1,
        macro_f1: report.macro_f1,
        labeled: train.len(),
        targets: targets.len(),
        unlabeled: pred.iter().filter(|p| p.is_none()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[0.9, 0.8], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5, 0.5], &[0.5, 0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1], &[0.9]).unwrap(), 0.0);
        assert!(matches!(auc(&[], &[0.1]), Err(Error::EmptyInput)));
    }

    #[test]
    fn mrr_first_hit() {
        let r = mean_reciprocal_rank(&[vec![true, false, true, false]]).unwrap();
        assert_eq!(r, 1.0);
        let r = mean_reciprocal_rank(&[vec![false, true], vec![false, false, false, true]]).unwrap();
        assert_eq!(r, (0.5 + 0.25) / 2.0);
    }

    #[test]
    fn clustering_hand_case() {
        let truth = [0, 0, 0, 1, 1, 1];
        let pred = [0, 0, 1, 1, 1, 1];
        let r = clustering_metrics(&pred, &truth).unwrap();
        assert!((r.ari - 12.0 / 37.0).abs() < 1e-12);
        // MI = (2/6)ln(3/2)·... evaluated independently below
        let n = 6.0f64;
        let cells = [(2.0, 3.0, 2.0), (1.0, 3.0, 4.0), (3.0, 3.0, 4.0)];
        let mi: f64 = cells.iter().map(|(c, r, k)| c / n * (c * n / (r * k)).ln()).sum();
        let ht = 2f64.ln();
        let hp = -(2.0 / 6.0 * (2.0f64 / 6.0).ln() + 4.0 / 6.0 * (4.0f64 / 6.0).ln());
        assert!((r.nmi - mi / ((ht + hp) / 2.0)).abs() < 1e-12);
        assert!((r.nmi - 0.478_708).abs() < 1e-5);
    }

    #[test]
    fn clustering_edge_cases() {
        let r = clustering_metrics(&[1, 1, 2], &[5, 5, 7]).unwrap();
        assert_eq!((r.nmi, r.ari), (1.0, 1.0));
        let r = clustering_metrics(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.nmi, 0.0);
        assert!(matches!(clustering_metrics::<u8>(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(
            clustering_metrics(&[1], &[1, 2]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn classification_cases() {
        let truth = [Some("pos"), Some("pos"), None, None];
        let pred = [Some("pos"); 4];
        let r = classification_metrics(&pred, &truth).unwrap();
        assert!((r.micro_f1 - 2.0 / 3.0).abs() < 1e-15);

        let truth = [Some("a"), Some("b"), Some("c")];
        let r = classification_metrics(&truth, &truth).unwrap();
        assert_eq!((r.micro_f1, r.macro_f1), (1.0, 1.0));

        let truth = [Some("a"), Some("a"), Some("b")];
        let pred = [Some("a"), Some("a"), Some("a")];
        let r = classification_metrics(&pred, &truth).unwrap();
        // class a: P=2/3 R=1 → 0.8; class b: 0
        assert!((r.macro_f1 - 0.4).abs() < 1e-12);
    }
}
