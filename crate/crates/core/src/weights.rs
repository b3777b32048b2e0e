//! Node centrality and per-relation edge contribution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hin::{Hin, NodeId, RelStep, RelationId, Schema};

pub const DEFAULT_NODE_DECAY: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralityConfig {
    /// Damping `c_n`, in (0, 1).
    pub decay: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for CentralityConfig {
    fn default() -> Self {
        Self {
            decay: DEFAULT_NODE_DECAY,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Per-node centrality `α`, normalized to mean 1 within each node type.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralityTable {
    alpha: Vec<f64>,
    raw: Vec<f64>,
    decay: f64,
    residuals: Vec<f64>,
    converged: bool,
}

impl CentralityTable {
    /// `α ≡ 1`.
    pub fn uniform(n: usize) -> Self {
        Self {
            alpha: vec![1.0; n],
            raw: vec![1.0; n],
            decay: DEFAULT_NODE_DECAY,
            residuals: Vec::new(),
            converged: true,
        }
    }

    pub(crate) fn from_parts(alpha: Vec<f64>, decay: f64, residuals: Vec<f64>, converged: bool) -> Self {
        Self {
            raw: alpha.clone(),
            alpha,
            decay,
            residuals,
            converged,
        }
    }

    #[inline]
    pub fn alpha(&self, u: NodeId) -> f64 {
        self.alpha[u.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    /// Fixed-point vector before per-type normalization.
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    /// Max-norm change recorded after each iteration.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// One application of the centrality update.
///
/// Each node `x` splits `c_n·α(x)` evenly over the relation directions in
/// which it has neighbours, and each share evenly over those neighbours.
/// A node with no neighbours at all spreads `c_n·α(x)` uniformly over its own
/// type. Every node also receives `1 − c_n`, which keeps the total at `n`.
pub fn centrality_step(g: &Hin, decay: f64, alpha: &[f64]) -> Vec<f64> {
    let schema = g.schema();
    let n = g.node_count();
    let steps: Vec<Vec<RelStep>> = schema.types().map(|t| schema.steps_from(t)).collect();

    // Share each node hands to every neighbour along each of its directions.
    let share: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = NodeId(i as u32);
            let dirs = steps[g.node_type(x).0 as usize]
                .iter()
                .filter(|&&s| g.structure_weight(x, s) > 0)
                .count();
            if dirs == 0 {
                0.0
            } else {
                decay * alpha[i] / dirs as f64
            }
        })
        .collect();

    let mut dangling = vec![0.0; schema.type_count()];
    for x in g.nodes() {
        if g.total_degree(x) == 0 {
            dangling[g.node_type(x).0 as usize] += decay * alpha[x.index()];
        }
    }
    let dangling: Vec<f64> = schema
        .types()
        .map(|t| {
            let size = g.members(t).len();
            if size == 0 {
                0.0
            } else {
                dangling[t.0 as usize] / size as f64
            }
        })
        .collect();

    (0..n)
        .into_par_iter()
        .map(|i| {
            let u = NodeId(i as u32);
            let t = g.node_type(u);
            let mut acc = 0.0;
            for r in schema.relation_ids() {
                let rel = schema.relation(r);
                let fwd = RelStep::forward(r);
                // `u` receives along direction `s` from every `x` with u ∈ N_s(x).
                let mut receive = |s: RelStep| {
                    for &x in g.neighbors(u, schema.inverse(s)) {
                        acc += share[x.index()] / g.structure_weight(x, s) as f64;
                    }
                };
                if rel.dst == t {
                    receive(fwd);
                }
                if rel.src == t && !rel.is_self_inverse() {
                    receive(schema.inverse(fwd));
                }
            }
            (1.0 - decay) + acc + dangling[t.0 as usize]
        })
        .collect()
}

/// Rescale so that every node type has mean 1.
pub fn normalize_per_type(g: &Hin, values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    for t in g.schema().types() {
        let members = g.members(t);
        let total: f64 = members.iter().map(|u| values[u.index()]).sum();
        if total > 0.0 {
            let scale = members.len() as f64 / total;
            for u in members {
                out[u.index()] = values[u.index()] * scale;
            }
        } else {
            for u in members {
                out[u.index()] = 1.0;
            }
        }
    }
    out
}

/// Power iteration of the centrality update from `α ≡ 1` until the max-norm
/// change drops to `tolerance` or `max_iter` is reached.
pub fn compute_centrality(g: &Hin, cfg: &CentralityConfig) -> Result<CentralityTable> {
    if !(cfg.decay > 0.0 && cfg.decay < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "node decay must lie in (0, 1), got {}",
            cfg.decay
        )));
    }
    if !(cfg.tolerance >= 0.0) {
        return Err(Error::InvalidParameter("tolerance must be non-negative".into()));
    }
    let mut alpha = vec![1.0; g.node_count()];
    let mut residuals = Vec::new();
    let mut converged = g.node_count() == 0;
    for _ in 0..cfg.max_iter {
        let next = centrality_step(g, cfg.decay, &alpha);
        let residual = max_abs_diff(&next, &alpha);
        alpha = next;
        residuals.push(residual);
        if residual <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ok(CentralityTable {
        alpha: normalize_per_type(g, &alpha),
        raw: alpha,
        decay: cfg.decay,
        residuals,
        converged,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Schema-level graph of relation weights `μ_R = RF(R)·IRF(R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContributionGraph {
    schema: Schema,
    rf: Vec<f64>,
    irf: Vec<f64>,
    mu: Vec<f64>,
}

impl ContributionGraph {
    /// Every relation weighted `value`; RF and IRF are recorded as 0.
    pub fn uniform(schema: &Schema, value: f64) -> Self {
        let r = schema.relation_count();
        Self {
            schema: schema.clone(),
            rf: vec![0.0; r],
            irf: vec![0.0; r],
            mu: vec![value; r],
        }
    }

    pub(crate) fn from_parts(schema: &Schema, rf: Vec<f64>, irf: Vec<f64>, mu: Vec<f64>) -> Self {
        Self {
            schema: schema.clone(),
            rf,
            irf,
            mu,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rf(&self, r: RelationId) -> f64 {
        self.rf[r.0 as usize]
    }

    pub fn irf(&self, r: RelationId) -> f64 {
        self.irf[r.0 as usize]
    }

    /// `μ` of a relation; the inverse direction shares it.
    #[inline]
    pub fn mu(&self, r: RelationId) -> f64 {
        self.mu[r.0 as usize]
    }

    pub fn mu_by_name(&self, name: &str) -> Result<f64> {
        Ok(self.mu(self.schema.resolve_step(name)?.relation))
    }

    /// Relations whose weight is zero.
    pub fn zero_relations(&self) -> Vec<&str> {
        self.schema
            .relation_ids()
            .filter(|&r| self.mu(r) == 0.0)
            .map(|r| self.schema.relation(r).name.as_str())
            .collect()
    }

    /// Copy with `μ` of the named relation (either direction) replaced.
    pub fn override_contribution(&self, relation: &str, value: f64) -> Result<Self> {
        let r = self.schema.resolve_step(relation)?.relation;
        if value.is_nan() {
            return Err(Error::InvalidParameter("relation weight is NaN".into()));
        }
        if value < 0.0 {
            return Err(Error::NegativeValue(value));
        }
        let mut out = self.clone();
        out.mu[r.0 as usize] = value;
        Ok(out)
    }

    /// DOT rendering: one node per node type and one labelled edge per
    /// relation, weights to two decimals.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph contribution {\n");
        for t in self.schema.types() {
            out.push_str(&format!("  {};\n", dot_id(self.schema.type_name(t))));
        }
        for r in self.schema.relation_ids() {
            let rel = self.schema.relation(r);
            out.push_str(&format!(
                "  {} -> {} [label=\"{:.2}\"];\n",
                dot_id(self.schema.type_name(rel.src)),
                dot_id(self.schema.type_name(rel.dst)),
                self.mu(r)
            ));
        }
        out.push_str("}\n");
        out
    }
}

fn dot_id(name: &str) -> String {
    let plain =
        name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !name.starts_with(|c: char| c.is_ascii_digit());
    if plain {
        name.to_owned()
    } else {
        format!("\"{}\"", name.replace('"', "\\\""))
    }
}

/// `RF(R) = m_R / m`, `IRF(R) = ln(n / n_R)` with `n_R` the number of nodes
/// touching an `R` edge, `μ_R = RF·IRF`. Relations without edges get 0.
pub fn compute_edge_contribution(g: &Hin) -> Result<ContributionGraph> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.node_count() as f64;
    let schema = g.schema();
    let mut rf = Vec::with_capacity(schema.relation_count());
    let mut irf = Vec::with_capacity(schema.relation_count());
    for r in schema.relation_ids() {
        let m_r = g.relation_edge_count(r);
        let n_r = g.incident_node_count(r);
        rf.push(m_r as f64 / m as f64);
        irf.push(if n_r == 0 { 0.0 } else { (n / n_r as f64).ln() });
    }
    let mu = rf.iter().zip(&irf).map(|(a, b)| a * b).collect();
    Ok(ContributionGraph {
        schema: schema.clone(),
        rf,
        irf,
        mu,
    })
}

/// Convenience wrapper matching the free-function style of the other
/// operations.
pub fn export_contribution_graph(cg: &ContributionGraph) -> String {
    cg.to_dot()
}
