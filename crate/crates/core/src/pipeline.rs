//! All precomputed weights of a graph in one step.

use crate::content::{build_field_models, content_scores, ContentScoreTable, Corpus, FieldModel, Tokenizer};
use crate::engine::WeightModel;
use crate::error::Result;
use crate::hin::Hin;
use crate::weights::{
    compute_centrality, compute_edge_contribution, CentralityConfig, CentralityTable, ContributionGraph,
};

/// Content, centrality and contribution tables for one graph.
#[derive(Clone, Debug)]
pub struct Precomputed {
    pub content: ContentScoreTable,
    pub centrality: CentralityTable,
    pub contribution: ContributionGraph,
    pub field_models: Vec<FieldModel>,
}

impl Precomputed {
    pub fn build(g: &Hin, corpora: &[Corpus], tokenizer: &Tokenizer, cfg: &CentralityConfig) -> Result<Self> {
        let field_models = build_field_models(corpora, tokenizer)?;
        Ok(Self {
            content: content_scores(g, &field_models),
            centrality: compute_centrality(g, cfg)?,
            contribution: compute_edge_contribution(g)?,
            field_models,
        })
    }

    /// A weight model over `g` with default decay and per-node content.
    pub fn model<'g>(&self, g: &'g Hin) -> Result<WeightModel<'g>> {
        WeightModel::new(
            g,
            self.content.clone(),
            self.centrality.clone(),
            self.contribution.clone(),
        )
    }
}
