use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use crate::content::ContentScoreTable;
use crate::error::{Error, Result};
use crate::hin::{Hin, MetaPath, MetaPathSet, NodeId, RelStep};
use crate::weights::{CentralityTable, ContributionGraph};

pub const DEFAULT_DECAY: f64 = 0.8;

/// How node content enters the similarity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ContentMode {
    /// `χ(x′)` on each side of every step.
    #[default]
    PerNode,
    /// `rel(x′, y′)` in place of `χ(x′)·χ(y′)`; paired engines only.
    Pairwise,
    /// Content ignored.
    Off,
}

impl ContentMode {
    pub fn name(self) -> &'static str {
        match self {
            ContentMode::PerNode => "node",
            ContentMode::Pairwise => "pair",
            ContentMode::Off => "off",
        }
    }
}

impl fmt::Display for ContentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ContentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node" => Ok(ContentMode::PerNode),
            "pair" => Ok(ContentMode::Pairwise),
            "off" => Ok(ContentMode::Off),
            _ => Err(Error::InvalidParameter(format!(
                "content mode must be node, pair or off, got `{s}`"
            ))),
        }
    }
}

/// Switches that replace a weight family by the constant 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ablation {
    pub unit_content: bool,
    pub unit_centrality: bool,
    pub unit_contribution: bool,
}

impl Ablation {
    pub fn all() -> Self {
        Self {
            unit_content: true,
            unit_centrality: true,
            unit_contribution: true,
        }
    }
}

/// Per-level correction for walkers that already met earlier on the path.
/// `levels[i][x]` is the weight applied to a meeting at node `x` of level
/// `i + 1`; the last level is all ones and not stored.
#[derive(Debug)]
pub(crate) struct Diagonal {
    pub(crate) levels: Vec<Vec<f64>>,
}

/// All weights needed to score a query, bound to one graph.
pub struct WeightModel<'g> {
    graph: &'g Hin,
    content: ContentScoreTable,
    centrality: CentralityTable,
    contribution: ContributionGraph,
    decay: f64,
    mode: ContentMode,
    ablation: Ablation,
    node_weight: Vec<f64>,
    diagonals: RwLock<HashMap<MetaPath, Arc<Diagonal>>>,
}

impl fmt::Debug for WeightModel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightModel")
            .field("decay", &self.decay)
            .field("mode", &self.mode)
            .field("ablation", &self.ablation)
            .finish_non_exhaustive()
    }
}

impl<'g> WeightModel<'g> {
    pub fn new(
        graph: &'g Hin,
        content: ContentScoreTable,
        centrality: CentralityTable,
        contribution: ContributionGraph,
    ) -> Result<Self> {
        let n = graph.node_count();
        if content.len() != n || centrality.len() != n {
            return Err(Error::InvalidParameter(
                "weight tables were built for a different graph".into(),
            ));
        }
        if contribution.schema() != graph.schema() {
            return Err(Error::InvalidParameter(
                "contribution graph was built for a different schema".into(),
            ));
        }
        let mut model = Self {
            graph,
            content,
            centrality,
            contribution,
            decay: DEFAULT_DECAY,
            mode: ContentMode::PerNode,
            ablation: Ablation::default(),
            node_weight: Vec::new(),
            diagonals: RwLock::new(HashMap::new()),
        };
        model.refresh();
        Ok(model)
    }

    /// `χ ≡ α ≡ μ ≡ 1`.
    pub fn unit(graph: &'g Hin) -> Self {
        let n = graph.node_count();
        Self::new(
            graph,
            ContentScoreTable::uniform(n),
            CentralityTable::uniform(n),
            ContributionGraph::uniform(graph.schema(), 1.0),
        )
        .expect("uniform tables match the graph")
    }

    pub fn with_decay(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParameter(format!("decay must lie in (0, 1), got {c}")));
        }
        self.decay = c;
        self.refresh();
        Ok(self)
    }

    pub fn with_content_mode(mut self, mode: ContentMode) -> Self {
        self.mode = mode;
        self.refresh();
        self
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self.refresh();
        self
    }

    pub fn with_contribution(mut self, contribution: ContributionGraph) -> Result<Self> {
        if contribution.schema() != self.graph.schema() {
            return Err(Error::InvalidParameter(
                "contribution graph was built for a different schema".into(),
            ));
        }
        self.contribution = contribution;
        self.refresh();
        Ok(self)
    }

    fn refresh(&mut self) {
        let use_chi = self.mode == ContentMode::PerNode && !self.ablation.unit_content;
        self.node_weight = self
            .graph
            .nodes()
            .map(|u| {
                let chi = if use_chi { self.content.chi(u) } else { 1.0 };
                let alpha = if self.ablation.unit_centrality {
                    1.0
                } else {
                    self.centrality.alpha(u)
                };
                chi * alpha
            })
            .collect();
        self.diagonals.write().unwrap().clear();
    }

    pub fn graph(&self) -> &'g Hin {
        self.graph
    }

    pub fn content(&self) -> &ContentScoreTable {
        &self.content
    }

    pub fn centrality(&self) -> &CentralityTable {
        &self.centrality
    }

    pub fn contribution(&self) -> &ContributionGraph {
        &self.contribution
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn content_mode(&self) -> ContentMode {
        self.mode
    }

    pub fn ablation(&self) -> Ablation {
        self.ablation
    }

    /// `μ` of the step's relation, or 1 under ablation.
    #[inline]
    pub fn mu(&self, step: RelStep) -> f64 {
        if self.ablation.unit_contribution {
            1.0
        } else {
            self.contribution.mu(step.relation)
        }
    }

    /// `χ(x)·α(x)` as used by the factorized engines (χ is 1 unless the
    /// per-node content mode is active).
    #[inline]
    pub(crate) fn node_weight(&self, x: NodeId) -> f64 {
        self.node_weight[x.index()]
    }

    /// Relatedness used in place of `χ(x′)·χ(y′)` at a step.
    #[inline]
    pub(crate) fn pair_content(&self, x: NodeId, y: NodeId) -> f64 {
        if self.mode == ContentMode::Pairwise && !self.ablation.unit_content {
            self.content.pairwise_relatedness(x, y)
        } else {
            1.0
        }
    }

    /// `√(c·μ_R)` for a step.
    #[inline]
    pub(crate) fn step_scale(&self, step: RelStep) -> f64 {
        (self.decay * self.mu(step)).sqrt()
    }

    /// One side's factor for moving onto `x′` along `step`:
    /// `√(c·μ_R)·χ(x′)·α(x′)/β_{R⁻¹}(x′)`. The caller guarantees `x′` was
    /// reached along `step`, so the backward degree is positive.
    #[inline]
    pub(crate) fn factor_unchecked(&self, scale: f64, x_next: NodeId, step: RelStep) -> f64 {
        let back = self.graph.structure_weight(x_next, self.graph.schema().inverse(step));
        scale * self.node_weight(x_next) / back as f64
    }

    /// Checked single-side step factor.
    pub fn canonical_step_factor(&self, x: NodeId, x_next: NodeId, relation: &str) -> Result<f64> {
        let step = self.graph.schema().resolve_step(relation)?;
        if !self.graph.contains(x) || !self.graph.contains(x_next) {
            return Err(Error::unknown_node(format!("#{}", x.0.max(x_next.0))));
        }
        if !self.graph.is_neighbor(x, x_next, step) {
            return Err(Error::NotNeighbor {
                from: self.graph.external_id(x).to_owned(),
                node: self.graph.external_id(x_next).to_owned(),
                relation: relation.to_owned(),
            });
        }
        Ok(self.factor_unchecked(self.step_scale(step), x_next, step))
    }

    /// Check that a query node fits the meta-path set.
    pub(crate) fn check_endpoint(&self, u: NodeId, mps: &MetaPathSet) -> Result<()> {
        let g = self.graph;
        if !g.contains(u) {
            return Err(Error::unknown_node(format!("#{}", u.0)));
        }
        if g.node_type(u) != mps.endpoint() {
            let schema = g.schema();
            return Err(Error::TypeMismatch {
                node: g.external_id(u).to_owned(),
                actual: schema.type_name(g.node_type(u)).to_owned(),
                expected: schema.type_name(mps.endpoint()).to_owned(),
            });
        }
        Ok(())
    }

    pub(crate) fn cached_diagonal(&self, path: &MetaPath) -> Option<Arc<Diagonal>> {
        self.diagonals.read().unwrap().get(path).cloned()
    }

    pub(crate) fn store_diagonal(&self, path: &MetaPath, d: Arc<Diagonal>) {
        self.diagonals.write().unwrap().insert(path.clone(), d);
    }
}
