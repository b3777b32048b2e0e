//! Similarity engines: brute-force recursion, factorized single-source
//! propagation, Monte-Carlo surfers, and top-k retrieval.

mod exact;
mod model;
mod montecarlo;
mod topk;

pub use exact::{hetfs_bruteforce, hetfs_single_source, prepare};
pub use model::{Ablation, ContentMode, WeightModel, DEFAULT_DECAY};
pub use montecarlo::{hetfs_montecarlo, hetfs_montecarlo_all};
pub use topk::{
    metapath_free_query, select_top_k, single_source, topk, Engine, EngineKind, QueryOptions, RankedNode, TopKResult,
    DEFAULT_EPSILON, DEFAULT_K, DEFAULT_WALKS,
};
