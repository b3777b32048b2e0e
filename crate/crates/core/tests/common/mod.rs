#![allow(dead_code)]

use hetfs_core::content::Tokenizer;
use hetfs_core::fixtures::{random_corpus, random_hin, RandomHinShape};
use hetfs_core::pipeline::Precomputed;
use hetfs_core::weights::CentralityConfig;
use hetfs_core::{Hin, MetaPath, NodeId, WeightModel};

/// Random graph with text on about half of its nodes.
pub fn random_case(seed: u64) -> (Hin, Precomputed) {
    let g = random_hin(seed, RandomHinShape::default());
    let corpus = random_corpus(&g, seed ^ 0x5eed, "text", 0.5);
    let pre =
        Precomputed::build(&g, &[corpus], &Tokenizer::default(), &CentralityConfig::default()).expect("precompute");
    (g, pre)
}

/// Tour enumeration straight from the definition: walk both sides in
/// lockstep along the half path and stop at the first level where they
/// coincide, multiplying the per-side step factors (and, in pairwise mode,
/// the relatedness of the two new nodes) along the way.
pub fn tour_oracle(wm: &WeightModel<'_>, u: NodeId, v: NodeId, path: &MetaPath, pairwise: bool) -> f64 {
    if u == v {
        return 1.0;
    }
    let g = wm.graph();
    let schema = g.schema();
    let names: Vec<String> = path.half().iter().map(|&s| schema.step_name(s)).collect();
    let mut total = 0.0;
    // stack of (level, x, y, weight so far)
    let mut stack = vec![(0usize, u, v, 1.0f64)];
    while let Some((level, x, y, w)) = stack.pop() {
        if level == names.len() {
            continue;
        }
        let step = path.half()[level];
        for &x2 in g.neighbors(x, step) {
            for &y2 in g.neighbors(y, step) {
                let fx = wm.canonical_step_factor(x, x2, &names[level]).unwrap();
                let fy = wm.canonical_step_factor(y, y2, &names[level]).unwrap();
                let rel = if pairwise {
                    wm.content().pairwise_relatedness(x2, y2)
                } else {
                    1.0
                };
                let w2 = w * fx * fy * rel;
                if x2 == y2 {
                    total += w2;
                } else {
                    stack.push((level + 1, x2, y2, w2));
                }
            }
        }
    }
    total
}
