//! Meta-path constrained similarity search over heterogeneous information
//! networks.

pub mod baselines;
pub mod content;
pub mod engine;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod hin;
pub mod ingest;
pub mod pipeline;
pub mod store;
pub mod weights;

pub use engine::{
    hetfs_bruteforce, hetfs_montecarlo, hetfs_montecarlo_all, hetfs_single_source, metapath_free_query, topk, Ablation,
    ContentMode, Engine, QueryOptions, TopKResult, WeightModel,
};
pub use error::{Error, Origin, Result};
pub use hin::{
    enumerate_symmetric_metapaths, freeze_graph, EdgeRecord, GraphBuilder, Hin, MetaPath, MetaPathSet, NodeId,
    NodeRecord, RelStep, RelationDecl, RelationId, RelationType, Schema, SchemaFile, TypeId,
};
