//! Small deterministic graphs for tests, benchmarks and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::content::Corpus;
use crate::hin::{GraphBuilder, Hin, NodeId, RelationDecl, Schema};

/// Movies `m1..m3`, actors `a1, a2`, director `d1`.
/// `MA`: m1–a1, m2–a1, m2–a2, m3–a2. `MD`: m1–d1, m2–d1.
pub fn movie_graph() -> Hin {
    let schema = Schema::new(
        &["M", "A", "D"],
        vec![RelationDecl::new("MA", "M", "A"), RelationDecl::new("MD", "M", "D")],
    )
    .expect("valid schema");
    let mut b = GraphBuilder::new(schema);
    for (id, t) in [
        ("m1", "M"),
        ("m2", "M"),
        ("m3", "M"),
        ("a1", "A"),
        ("a2", "A"),
        ("d1", "D"),
    ] {
        b.add_node(id, t).expect("fresh node");
    }
    for (s, d, r) in [
        ("m1", "a1", "MA"),
        ("m2", "a1", "MA"),
        ("m2", "a2", "MA"),
        ("m3", "a2", "MA"),
        ("m1", "d1", "MD"),
        ("m2", "d1", "MD"),
    ] {
        b.add_edge(s, d, r).expect("valid edge");
    }
    b.freeze()
}

/// Movie titles for [`movie_graph`] in field `title`.
pub fn movie_titles(g: &Hin) -> Corpus {
    let doc = |id: &str, text: &str| (g.node(id).expect("movie node"), text.to_owned());
    Corpus {
        field: "title".into(),
        docs: vec![
            doc("m1", "terminator future"),
            doc("m2", "terminator"),
            doc("m3", "ship"),
        ],
    }
}

/// Shape limits for [`random_hin`].
#[derive(Clone, Copy, Debug)]
pub struct RandomHinShape {
    pub max_nodes: usize,
    pub types: (usize, usize),
    pub relations: (usize, usize),
    /// Probability that any given node pair of a relation is linked.
    pub density: (f64, f64),
}

impl Default for RandomHinShape {
    fn default() -> Self {
        Self {
            max_nodes: 60,
            types: (2, 4),
            relations: (2, 4),
            density: (0.05, 0.3),
        }
    }
}

/// Random typed graph. Relations are drawn between random type pairs; a
/// relation within one type is undirected half the time.
pub fn random_hin(seed: u64, shape: RandomHinShape) -> Hin {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(shape.types.0..=shape.types.1);
    let names: Vec<String> = (0..k).map(|i| format!("T{i}")).collect();
    let per_type_max = (shape.max_nodes / k).max(1);
    let counts: Vec<usize> = (0..k).map(|_| rng.random_range(1..=per_type_max)).collect();

    let r = rng.random_range(shape.relations.0..=shape.relations.1);
    let mut decls = Vec::with_capacity(r);
    let mut rel_types = Vec::with_capacity(r);
    for i in 0..r {
        // the first relations chain the types so most of them are connected
        let (s, d) = if i + 1 < k {
            (i, i + 1)
        } else {
            (rng.random_range(0..k), rng.random_range(0..k))
        };
        let name = format!("R{i}");
        let mut decl = RelationDecl::new(&name, &names[s], &names[d]);
        if s == d && rng.random_bool(0.5) {
            decl = decl.with_inverse(&name);
        }
        decls.push(decl);
        rel_types.push((s, d));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let schema = Schema::new(&refs, decls).expect("generated schema is valid");
    let mut b = GraphBuilder::new(schema);
    let mut ids: Vec<Vec<String>> = Vec::with_capacity(k);
    for (t, &n) in counts.iter().enumerate() {
        let list: Vec<String> = (0..n).map(|j| format!("t{t}n{j}")).collect();
        for id in &list {
            b.add_node(id, &names[t]).expect("fresh node");
        }
        ids.push(list);
    }
    let mut any = false;
    for (i, &(s, d)) in rel_types.iter().enumerate() {
        let p = rng.random_range(shape.density.0..=shape.density.1);
        for a in &ids[s] {
            for c in &ids[d] {
                if rng.random_bool(p) {
                    b.add_edge(a, c, &format!("R{i}")).expect("typed edge");
                    any = true;
                }
            }
        }
    }
    if !any {
        // never hand out an edgeless graph
        let (s, d) = rel_types[0];
        b.add_edge(&ids[s][0], &ids[d][0], "R0").expect("typed edge");
    }
    b.freeze()
}

/// Random simple `degree`-regular graph on `n` nodes of type `N` under one
/// undirected relation `NN`. Requires `n·degree` even and `degree < n`.
pub fn regular_graph(n: usize, degree: usize, seed: u64) -> Hin {
    assert!(
        degree < n && (n * degree) % 2 == 0,
        "no simple {degree}-regular graph on {n} nodes"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = loop {
        // configuration model, restarted until simple
        let mut stubs: Vec<usize> = (0..n).flat_map(|u| std::iter::repeat_n(u, degree)).collect();
        stubs.shuffle(&mut rng);
        let mut pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
        if pairs.iter().any(|(a, b)| a == b) {
            continue;
        }
        pairs.sort_unstable();
        let len = pairs.len();
        pairs.dedup();
        if pairs.len() == len {
            break pairs;
        }
    };
    let schema = Schema::new(&["N"], vec![RelationDecl::new("NN", "N", "N").with_inverse("NN")]).expect("valid schema");
    let mut b = GraphBuilder::new(schema);
    for u in 0..n {
        b.add_node(&format!("n{u}"), "N").expect("fresh node");
    }
    for (a, c) in pairs {
        b.add_edge(&format!("n{a}"), &format!("n{c}"), "NN")
            .expect("valid edge");
    }
    b.freeze()
}

/// Random text for every node of the graph, drawn from a small vocabulary so
/// documents overlap.
pub fn random_corpus(g: &Hin, seed: u64, field: &str, cover: f64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs: Vec<(NodeId, String)> = Vec::new();
    for u in g.nodes() {
        if !rng.random_bool(cover) {
            continue;
        }
        let len = rng.random_range(1..6);
        let words: Vec<String> = (0..len).map(|_| format!("word{}", rng.random_range(0..12))).collect();
        docs.push((u, words.join(" ")));
    }
    Corpus {
        field: field.to_owned(),
        docs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_graph_degrees() {
        let g = regular_graph(20, 3, 1);
        assert!(g.nodes().all(|u| g.total_degree(u) == 3));
        assert_eq!(g.edge_count(), 30);
    }

    #[test]
    fn random_hin_is_deterministic() {
        let a = random_hin(3, RandomHinShape::default());
        let b = random_hin(3, RandomHinShape::default());
        assert_eq!(a.node_count(), b.node_count());
        assert_eq!(a.edge_count(), b.edge_count());
        assert!(a.node_count() <= 60);
    }
}
