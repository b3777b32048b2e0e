//! Typed graph, schema and meta-path handling.

mod graph;
mod metapath;
mod schema;

pub use graph::{freeze_graph, EdgeRecord, GraphBuilder, Hin, NodeId, NodeRecord};
pub use metapath::{enumerate_symmetric_metapaths, MetaPath, MetaPathSet};
pub use schema::{RelStep, RelationDecl, RelationId, RelationType, Schema, SchemaFile, TypeId};
