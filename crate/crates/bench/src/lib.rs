//! Shared setup for the benchmarks.

use hetfs_core::content::Tokenizer;
use hetfs_core::ingest::{generate_synthetic_hin, SynthSpec};
use hetfs_core::pipeline::Precomputed;
use hetfs_core::weights::CentralityConfig;
use hetfs_core::{Hin, NodeId};

/// A bibliographic network at `scale` with its weights precomputed.
pub fn bibliographic(scale: f64, seed: u64) -> (Hin, Precomputed) {
    let bundle = generate_synthetic_hin(&SynthSpec::bibliographic(scale, seed)).expect("feasible preset");
    let hin = bundle.to_dataset().expect("generated bundle loads").hin;
    let pre = Precomputed::build(&hin, &[], &Tokenizer::default(), &CentralityConfig::default()).expect("precompute");
    (hin, pre)
}

/// Every `stride`-th author with at least one edge.
pub fn sample_authors(g: &Hin, stride: usize) -> Vec<NodeId> {
    let a = g.schema().type_id("A").expect("bibliographic schema");
    g.members(a)
        .iter()
        .copied()
        .filter(|&u| g.total_degree(u) > 0)
        .step_by(stride.max(1))
        .collect()
}
