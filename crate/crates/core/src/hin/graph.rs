use std::collections::HashMap;

use crate::error::{Error, Origin, Result};
use crate::hin::schema::{RelStep, RelationId, Schema, TypeId};

/// Dense node handle assigned at freeze time, in node insertion order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Compressed sparse rows over global node ids. Rows of nodes outside the
/// relation's source type are empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Csr {
    pub(crate) offsets: Vec<usize>,
    pub(crate) targets: Vec<NodeId>,
}

impl Csr {
    fn from_pairs(n: usize, pairs: &mut [(u32, u32)]) -> Self {
        pairs.sort_unstable();
        let mut offsets = vec![0usize; n + 1];
        for &(s, _) in pairs.iter() {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.iter().map(|&(_, t)| NodeId(t)).collect();
        Self { offsets, targets }
    }

    #[inline]
    fn row(&self, u: NodeId) -> &[NodeId] {
        let i = u.index();
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// A node record fed to [`freeze_graph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
    pub node_type: String,
}

impl NodeRecord {
    pub fn new(id: &str, node_type: &str) -> Self {
        Self {
            id: id.to_owned(),
            node_type: node_type.to_owned(),
        }
    }
}

/// An edge record. `relation` may name either direction of a relation;
/// inverse names are flipped into the forward direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub src: String,
    pub dst: String,
    pub relation: String,
}

impl EdgeRecord {
    pub fn new(src: &str, dst: &str, relation: &str) -> Self {
        Self {
            src: src.to_owned(),
            dst: dst.to_owned(),
            relation: relation.to_owned(),
        }
    }
}

/// Single-writer builder for a [`Hin`].
pub struct GraphBuilder {
    schema: Schema,
    node_types: Vec<TypeId>,
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
    pairs: Vec<Vec<(u32, u32)>>,
}

impl GraphBuilder {
    pub fn new(schema: Schema) -> Self {
        let relations = schema.relation_count();
        Self {
            schema,
            node_types: Vec::new(),
            ids: Vec::new(),
            index: HashMap::new(),
            pairs: vec![Vec::new(); relations],
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn add_node(&mut self, id: &str, node_type: &str) -> Result<NodeId> {
        let t = self.schema.type_id(node_type)?;
        if self.index.contains_key(id) {
            return Err(Error::DuplicateNode {
                id: id.to_owned(),
                origin: None,
            });
        }
        if self.ids.len() >= u32::MAX as usize {
            return Err(Error::InvalidParameter("too many nodes".into()));
        }
        let node = NodeId(self.ids.len() as u32);
        self.ids.push(id.to_owned());
        self.node_types.push(t);
        self.index.insert(id.to_owned(), node);
        Ok(node)
    }

    pub fn node(&self, id: &str) -> Result<NodeId> {
        self.index.get(id).copied().ok_or_else(|| Error::unknown_node(id))
    }

    /// Add an edge and return the forward relation plus oriented endpoints.
    pub fn add_edge(&mut self, src: &str, dst: &str, relation: &str) -> Result<(RelationId, NodeId, NodeId)> {
        let step = self.schema.resolve_step(relation)?;
        let s = self.node(src)?;
        let d = self.node(dst)?;
        let (from, to) = if step.inverse { (d, s) } else { (s, d) };
        let rel = self.schema.relation(step.relation);
        if self.node_types[from.index()] != rel.src || self.node_types[to.index()] != rel.dst {
            return Err(Error::EndpointTypeMismatch {
                src: src.to_owned(),
                dst: dst.to_owned(),
                relation: relation.to_owned(),
                origin: None,
            });
        }
        let (from, to) = if rel.is_self_inverse() && to < from {
            (to, from)
        } else {
            (from, to)
        };
        self.pairs[step.relation.0 as usize].push((from.0, to.0));
        Ok((step.relation, from, to))
    }

    pub fn freeze(self) -> Hin {
        let n = self.ids.len();
        let mut adjacency = Vec::with_capacity(2 * self.pairs.len());
        let mut edge_counts = Vec::with_capacity(self.pairs.len());
        for (r, mut pairs) in self.pairs.into_iter().enumerate() {
            pairs.sort_unstable();
            pairs.dedup();
            edge_counts.push(pairs.len());
            let self_inverse = self.schema.relation(RelationId(r as u16)).is_self_inverse();
            let mut reversed: Vec<(u32, u32)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
            if self_inverse {
                // undirected: both orientations in one table, self-loops once
                reversed.retain(|&(a, b)| a != b);
                let mut both = pairs;
                both.extend(reversed);
                let csr = Csr::from_pairs(n, &mut both);
                adjacency.push(csr.clone());
                adjacency.push(csr);
            } else {
                adjacency.push(Csr::from_pairs(n, &mut pairs));
                adjacency.push(Csr::from_pairs(n, &mut reversed));
            }
        }
        let mut members = vec![Vec::new(); self.schema.type_count()];
        for (i, t) in self.node_types.iter().enumerate() {
            members[t.0 as usize].push(NodeId(i as u32));
        }
        Hin {
            schema: self.schema,
            node_types: self.node_types,
            ids: self.ids,
            index: self.index,
            members,
            adjacency,
            edge_counts,
        }
    }
}

/// Build an immutable graph from in-memory records. Errors carry the
/// 1-based position of the offending record.
pub fn freeze_graph(schema: Schema, nodes: &[NodeRecord], edges: &[EdgeRecord]) -> Result<Hin> {
    let mut builder = GraphBuilder::new(schema);
    for (i, rec) in nodes.iter().enumerate() {
        builder
            .add_node(&rec.id, &rec.node_type)
            .map_err(|e| e.with_origin(Origin::line(i + 1)))?;
    }
    for (i, rec) in edges.iter().enumerate() {
        builder
            .add_edge(&rec.src, &rec.dst, &rec.relation)
            .map_err(|e| e.with_origin(Origin::line(i + 1)))?;
    }
    Ok(builder.freeze())
}

/// Immutable typed graph with forward and inverse adjacency per relation.
#[derive(Clone, Debug)]
pub struct Hin {
    schema: Schema,
    node_types: Vec<TypeId>,
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
    members: Vec<Vec<NodeId>>,
    adjacency: Vec<Csr>,
    edge_counts: Vec<usize>,
}

impl Hin {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Number of nodes, `n`.
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of edge instances over all relations, `m`.
    pub fn edge_count(&self) -> usize {
        self.edge_counts.iter().sum()
    }

    pub fn relation_edge_count(&self, r: RelationId) -> usize {
        self.edge_counts[r.0 as usize]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.ids.len() as u32).map(NodeId)
    }

    pub fn members(&self, t: TypeId) -> &[NodeId] {
        &self.members[t.0 as usize]
    }

    pub fn node_type(&self, u: NodeId) -> TypeId {
        self.node_types[u.index()]
    }

    pub fn external_id(&self, u: NodeId) -> &str {
        &self.ids[u.index()]
    }

    pub fn node(&self, id: &str) -> Result<NodeId> {
        self.index.get(id).copied().ok_or_else(|| Error::unknown_node(id))
    }

    pub fn contains(&self, u: NodeId) -> bool {
        u.index() < self.ids.len()
    }

    #[inline]
    fn table(&self, step: RelStep) -> &Csr {
        &self.adjacency[2 * step.relation.0 as usize + step.inverse as usize]
    }

    /// `N_R(u)` in ascending id order. Empty when `u` is not of the step's
    /// source type.
    #[inline]
    pub fn neighbors(&self, u: NodeId, step: RelStep) -> &[NodeId] {
        self.table(step).row(u)
    }

    /// Structure weight `β_R(u) = |N_R(u)|`.
    #[inline]
    pub fn structure_weight(&self, u: NodeId, step: RelStep) -> usize {
        let t = self.table(step);
        t.offsets[u.index() + 1] - t.offsets[u.index()]
    }

    /// Total number of neighbours over every relation and direction.
    pub fn total_degree(&self, u: NodeId) -> usize {
        self.schema
            .relation_ids()
            .map(|r| {
                let fwd = RelStep::forward(r);
                if self.schema.relation(r).is_self_inverse() {
                    self.structure_weight(u, fwd)
                } else {
                    self.structure_weight(u, fwd) + self.structure_weight(u, self.schema.inverse(fwd))
                }
            })
            .sum()
    }

    pub fn is_neighbor(&self, u: NodeId, v: NodeId, step: RelStep) -> bool {
        self.neighbors(u, step).binary_search(&v).is_ok()
    }

    /// Lookup by external id and relation name (forward, inverse or `R^-1`).
    pub fn neighbors_by_name(&self, id: &str, relation: &str) -> Result<&[NodeId]> {
        let u = self.node(id)?;
        let step = self.schema.resolve_step(relation)?;
        Ok(self.neighbors(u, step))
    }

    pub fn structure_weight_by_name(&self, id: &str, relation: &str) -> Result<usize> {
        self.neighbors_by_name(id, relation).map(<[NodeId]>::len)
    }

    /// Distinct edges of relation `r`, oriented source to target. For a
    /// self-inverse relation each undirected edge appears once.
    pub fn edges(&self, r: RelationId) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let self_inverse = self.schema.relation(r).is_self_inverse();
        let step = RelStep::forward(r);
        self.nodes().flat_map(move |u| {
            self.neighbors(u, step)
                .iter()
                .copied()
                .filter(move |&v| !self_inverse || u <= v)
                .map(move |v| (u, v))
        })
    }

    /// Nodes incident to at least one edge of relation `r`.
    pub fn incident_node_count(&self, r: RelationId) -> usize {
        let fwd = RelStep::forward(r);
        let inv = self.schema.inverse(fwd);
        self.nodes()
            .filter(|&u| self.structure_weight(u, fwd) > 0 || self.structure_weight(u, inv) > 0)
            .count()
    }

    /// Same node set, keeping only edges for which `keep` returns true.
    pub fn filter_edges(&self, mut keep: impl FnMut(RelationId, NodeId, NodeId) -> bool) -> Hin {
        let mut builder = GraphBuilder::new(self.schema.clone());
        builder.node_types = self.node_types.clone();
        builder.ids = self.ids.clone();
        builder.index = self.index.clone();
        for r in self.schema.relation_ids() {
            let kept: Vec<(u32, u32)> = self
                .edges(r)
                .filter(|&(u, v)| keep(r, u, v))
                .map(|(u, v)| (u.0, v.0))
                .collect();
            builder.pairs[r.0 as usize] = kept;
        }
        builder.freeze()
    }

    pub(crate) fn node_types_raw(&self) -> &[TypeId] {
        &self.node_types
    }

    pub(crate) fn ids_raw(&self) -> &[String] {
        &self.ids
    }

    /// Rebuild from raw parts (used by the snapshot reader).
    pub(crate) fn from_parts(
        schema: Schema,
        node_types: Vec<TypeId>,
        ids: Vec<String>,
        edges: Vec<Vec<(u32, u32)>>,
    ) -> Result<Hin> {
        let mut builder = GraphBuilder::new(schema);
        for (id, t) in ids.iter().zip(&node_types) {
            let name = builder.schema.type_name(*t).to_owned();
            builder.add_node(id, &name)?;
        }
        if edges.len() != builder.pairs.len() {
            return Err(Error::format("relation count does not match schema", None));
        }
        let n = ids.len() as u32;
        for (r, list) in edges.iter().enumerate() {
            let rel = builder.schema.relation(RelationId(r as u16)).clone();
            for &(a, b) in list {
                if a >= n || b >= n {
                    return Err(Error::format("edge endpoint out of range", None));
                }
                if node_types[a as usize] != rel.src || node_types[b as usize] != rel.dst {
                    return Err(Error::format("edge endpoint type mismatch", None));
                }
            }
            builder.pairs[r] = list.clone();
        }
        Ok(builder.freeze())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hin::schema::RelationDecl;

    fn g1() -> Hin {
        let schema = Schema::new(
            &["M", "A", "D"],
            vec![RelationDecl::new("MA", "M", "A"), RelationDecl::new("MD", "M", "D")],
        )
        .unwrap();
        let nodes: Vec<NodeRecord> = [
            ("m1", "M"),
            ("m2", "M"),
            ("m3", "M"),
            ("a1", "A"),
            ("a2", "A"),
            ("d1", "D"),
        ]
        .iter()
        .map(|(i, t)| NodeRecord::new(i, t))
        .collect();
        let edges: Vec<EdgeRecord> = [
            ("m1", "a1", "MA"),
            ("m2", "a1", "MA"),
            ("m2", "a2", "MA"),
            ("m3", "a2", "MA"),
            ("m1", "d1", "MD"),
            ("m2", "d1", "MD"),
        ]
        .iter()
        .map(|(s, d, r)| EdgeRecord::new(s, d, r))
        .collect();
        freeze_graph(schema, &nodes, &edges).unwrap()
    }

    fn ids(g: &Hin, list: &[NodeId]) -> Vec<String> {
        list.iter().map(|&u| g.external_id(u).to_owned()).collect()
    }

    #[test]
    fn fixture_counts() {
        let g = g1();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn neighbor_lookups() {
        let g = g1();
        assert_eq!(ids(&g, g.neighbors_by_name("a1", "MA^-1").unwrap()), ["m1", "m2"]);
        assert!(g.neighbors_by_name("m3", "MD").unwrap().is_empty());
        assert_eq!(ids(&g, g.neighbors_by_name("m2", "MA").unwrap()), ["a1", "a2"]);
        assert!(matches!(
            g.neighbors_by_name("zz", "MA"),
            Err(Error::UnknownNode { .. })
        ));
        assert!(matches!(
            g.neighbors_by_name("m1", "XY"),
            Err(Error::UnknownRelation { .. })
        ));
    }

    #[test]
    fn structure_weights() {
        let g = g1();
        assert_eq!(g.structure_weight_by_name("a1", "MA^-1").unwrap(), 2);
        assert_eq!(g.structure_weight_by_name("m3", "MD").unwrap(), 0);
        assert_eq!(g.structure_weight_by_name("d1", "MD^-1").unwrap(), 2);
    }

    #[test]
    fn empty_edges_and_duplicates() {
        let schema = Schema::new(&["M", "A"], vec![RelationDecl::new("MA", "M", "A")]).unwrap();
        let nodes = vec![
            NodeRecord::new("m1", "M"),
            NodeRecord::new("m2", "M"),
            NodeRecord::new("a1", "A"),
        ];
        let g = freeze_graph(schema.clone(), &nodes, &[]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.nodes().all(|u| g.total_degree(u) == 0));

        let edges = vec![EdgeRecord::new("m1", "a1", "MA"), EdgeRecord::new("m1", "a1", "MA")];
        let g = freeze_graph(schema, &nodes, &edges).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn inverse_named_edge_is_flipped() {
        let schema = Schema::new(&["M", "A"], vec![RelationDecl::new("MA", "M", "A")]).unwrap();
        let nodes = vec![NodeRecord::new("m1", "M"), NodeRecord::new("a1", "A")];
        let edges = vec![EdgeRecord::new("a1", "m1", "MA^-1")];
        let g = freeze_graph(schema, &nodes, &edges).unwrap();
        assert_eq!(ids(&g, g.neighbors_by_name("m1", "MA").unwrap()), ["a1"]);
    }

    #[test]
    fn record_errors_name_the_line() {
        let schema = Schema::new(&["M", "A"], vec![RelationDecl::new("MA", "M", "A")]).unwrap();
        let nodes = vec![NodeRecord::new("m1", "M"), NodeRecord::new("a1", "Q")];
        let err = freeze_graph(schema.clone(), &nodes, &[]).unwrap_err();
        assert!(matches!(&err, Error::UnknownType { origin: Some(o), .. } if o.line == 2));

        let nodes = vec![NodeRecord::new("m1", "M"), NodeRecord::new("a1", "A")];
        let edges = vec![EdgeRecord::new("m1", "a1", "MA"), EdgeRecord::new("a1", "m1", "MA")];
        let err = freeze_graph(schema.clone(), &nodes, &edges).unwrap_err();
        assert!(matches!(&err, Error::EndpointTypeMismatch { origin: Some(o), .. } if o.line == 2));

        let edges = vec![EdgeRecord::new("m1", "x9", "MA")];
        let err = freeze_graph(schema, &nodes, &edges).unwrap_err();
        assert!(matches!(&err, Error::UnknownNode { id, origin: Some(o) } if id == "x9" && o.line == 1));
    }

    #[test]
    fn self_inverse_relation_is_undirected() {
        let schema = Schema::new(&["X"], vec![RelationDecl::new("knows", "X", "X").with_inverse("knows")]).unwrap();
        let nodes: Vec<_> = ["a", "b", "c"].iter().map(|i| NodeRecord::new(i, "X")).collect();
        let edges = vec![
            EdgeRecord::new("a", "b", "knows"),
            EdgeRecord::new("b", "a", "knows"),
            EdgeRecord::new("c", "b", "knows"),
        ];
        let g = freeze_graph(schema, &nodes, &edges).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(ids(&g, g.neighbors_by_name("b", "knows").unwrap()), ["a", "c"]);
        assert_eq!(g.edges(RelationId(0)).count(), 2);
    }
}
