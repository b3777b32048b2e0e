//! Binary graph snapshots and the plain-text weight tables written by
//! precomputation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::content::{ContentScoreTable, Corpus, FieldModel};
use crate::error::{Error, Origin, Result};
use crate::eval::EdgeTimes;
use crate::hin::{Hin, NodeId, RelationId, Schema, SchemaFile, TypeId};
use crate::ingest::Dataset;
use crate::weights::{CentralityTable, ContributionGraph};

const MAGIC: &[u8; 8] = b"HETFSNAP";
const VERSION: u32 = 1;

pub const SNAPSHOT_FILE: &str = "graph.snap";
pub const ALPHA_FILE: &str = "alpha.tsv";
pub const MU_FILE: &str = "mu.tsv";
pub const CHI_FILE: &str = "chi.tsv";
pub const TFIDF_FILE: &str = "tfidf.tsv";
pub const META_FILE: &str = "precompute.json";

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::format("snapshot truncated", None))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        // every counted item takes at least one byte
        if n > (self.buf.len() - self.pos) as u64 {
            return Err(Error::format("snapshot length field out of range", None));
        }
        Ok(n as usize)
    }
    fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::format("snapshot string is not UTF-8", None))
    }
}

/// Serialize a dataset into a self-contained byte string.
pub fn encode_snapshot(d: &Dataset) -> Vec<u8> {
    let g = &d.hin;
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    let schema = serde_json::to_string(&g.schema().to_file()).expect("schema serializes");
    w.str(&schema);
    w.u64(g.node_count() as u64);
    for (t, id) in g.node_types_raw().iter().zip(g.ids_raw()) {
        w.u32(u32::from(t.0));
        w.str(id);
    }
    for r in g.schema().relation_ids() {
        let edges: Vec<(NodeId, NodeId)> = g.edges(r).collect();
        w.u64(edges.len() as u64);
        for (a, b) in edges {
            w.u32(a.0);
            w.u32(b.0);
        }
    }
    w.u64(d.corpora.len() as u64);
    for c in &d.corpora {
        w.str(&c.field);
        w.u64(c.docs.len() as u64);
        for (u, text) in &c.docs {
            w.u32(u.0);
            w.str(text);
        }
    }
    match &d.edge_times {
        None => w.u32(0),
        Some(times) => {
            w.u32(1);
            let mut sorted: Vec<_> = times.iter().collect();
            sorted.sort();
            w.u64(sorted.len() as u64);
            for (&(r, a, b), &t) in sorted {
                w.u32(u32::from(r.0));
                w.u32(a.0);
                w.u32(b.0);
                w.i64(t);
            }
        }
    }
    w.0
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(MAGIC.len()).ok() != Some(MAGIC.as_slice()) {
        return Err(Error::format("not a graph snapshot", None));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format(format!("unsupported snapshot version {version}"), None));
    }
    let file: SchemaFile =
        serde_json::from_str(&r.str()?).map_err(|e| Error::format(format!("snapshot schema: {e}"), None))?;
    let schema = Schema::from_file(file)?;
    let n = r.len()?;
    let mut types = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        let t = r.u32()?;
        if t as usize >= schema.type_count() {
            return Err(Error::format("snapshot node type out of range", None));
        }
        types.push(TypeId(t as u16));
        ids.push(r.str()?);
    }
    let mut edges = Vec::with_capacity(schema.relation_count());
    for _ in 0..schema.relation_count() {
        let m = r.len()?;
        let mut list = Vec::with_capacity(m);
        for _ in 0..m {
            list.push((r.u32()?, r.u32()?));
        }
        edges.push(list);
    }
    let hin = Hin::from_parts(schema, types, ids, edges)?;
    let node = |r: &mut Reader<'_>| -> Result<NodeId> {
        let u = NodeId(r.u32()?);
        if !hin.contains(u) {
            return Err(Error::format("snapshot node id out of range", None));
        }
        Ok(u)
    };
    let fields = r.len()?;
    let mut corpora = Vec::with_capacity(fields);
    for _ in 0..fields {
        let field = r.str()?;
        let k = r.len()?;
        let mut docs = Vec::with_capacity(k);
        for _ in 0..k {
            let u = node(&mut r)?;
            docs.push((u, r.str()?));
        }
        corpora.push(Corpus { field, docs });
    }
    let edge_times = match r.u32()? {
        0 => None,
        1 => {
            let k = r.len()?;
            let mut times = EdgeTimes::with_capacity(k);
            for _ in 0..k {
                let rel = r.u32()?;
                if rel as usize >= hin.schema().relation_count() {
                    return Err(Error::format("snapshot relation out of range", None));
                }
                let a = node(&mut r)?;
                let b = node(&mut r)?;
                times.insert((RelationId(rel as u16), a, b), r.i64()?);
            }
            Some(times)
        }
        _ => return Err(Error::format("bad snapshot time marker", None)),
    };
    if r.pos != bytes.len() {
        return Err(Error::format("trailing bytes after snapshot", None));
    }
    Ok(Dataset {
        hin,
        corpora,
        edge_times,
    })
}

pub fn write_snapshot(path: &Path, d: &Dataset) -> Result<Vec<u8>> {
    let bytes = encode_snapshot(d);
    std::fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes)
}

pub fn read_snapshot(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes).map_err(|e| match e {
        Error::Format { reason, origin: None } => Error::Format {
            reason,
            origin: Some(Origin::in_file(path, 0)),
        },
        other => other,
    })
}

/// Settings and outcome of a precomputation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecomputeMeta {
    pub node_decay: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub fields: Vec<String>,
    pub zero_contribution: Vec<String>,
}

/// Weight tables as read back from disk.
#[derive(Clone, Debug)]
pub struct StoredWeights {
    pub centrality: CentralityTable,
    pub contribution: ContributionGraph,
    pub content: ContentScoreTable,
    pub meta: PrecomputeMeta,
}

fn fmt_f64(x: f64) -> String {
    // shortest representation that parses back to the same value
    format!("{x:?}")
}

pub fn alpha_tsv(g: &Hin, c: &CentralityTable) -> String {
    let mut out = String::from("node_id\talpha\n");
    for u in g.nodes() {
        let _ = writeln!(out, "{}\t{}", g.external_id(u), fmt_f64(c.alpha(u)));
    }
    out
}

pub fn mu_tsv(cg: &ContributionGraph) -> String {
    let schema = cg.schema();
    let mut out = String::from("relation\trf\tirf\tmu\n");
    for r in schema.relation_ids() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            schema.relation(r).name,
            fmt_f64(cg.rf(r)),
            fmt_f64(cg.irf(r)),
            fmt_f64(cg.mu(r))
        );
    }
    out
}

pub fn chi_tsv(g: &Hin, t: &ContentScoreTable) -> String {
    let mut out = String::from("node_id\tchi\n");
    for u in g.nodes() {
        let _ = writeln!(out, "{}\t{}", g.external_id(u), fmt_f64(t.chi(u)));
    }
    out
}

pub fn tfidf_tsv(g: &Hin, models: &[FieldModel]) -> String {
    let mut out = String::from("node_id\tfield\tterm\tweight\n");
    for fm in models {
        let terms = fm.model.terms();
        for (doc, &u) in fm.nodes.iter().enumerate() {
            for &(t, w) in fm.model.vector(doc) {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    g.external_id(u),
                    fm.field,
                    terms[t as usize],
                    fmt_f64(w)
                );
            }
        }
    }
    out
}

fn put(dir: &Path, name: &str, body: &str) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
}

/// Write all weight tables into `dir`.
pub fn write_weights(
    dir: &Path,
    g: &Hin,
    centrality: &CentralityTable,
    contribution: &ContributionGraph,
    content: &ContentScoreTable,
    models: &[FieldModel],
    meta: &PrecomputeMeta,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    put(dir, ALPHA_FILE, &alpha_tsv(g, centrality))?;
    put(dir, MU_FILE, &mu_tsv(contribution))?;
    put(dir, CHI_FILE, &chi_tsv(g, content))?;
    put(dir, TFIDF_FILE, &tfidf_tsv(g, models))?;
    put(
        dir,
        META_FILE,
        &(serde_json::to_string_pretty(meta).expect("meta serializes") + "\n"),
    )
}

/// Rows of a two-or-more column TSV file after its header, with 1-based
/// line numbers.
fn rows<'a>(path: &Path, text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => {}
        _ => {
            return Err(Error::format(
                format!("expected header `{}`", header.replace('\t', "\\t")),
                Some(Origin::in_file(path, 1)),
            ))
        }
    }
    let width = header.split('\t').count();
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != width {
            return Err(Error::format(
                format!("expected {width} fields"),
                Some(Origin::in_file(path, i + 1)),
            ));
        }
        out.push((i + 1, f));
    }
    Ok(out)
}

fn num(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::format(format!("bad number `{s}`"), Some(Origin::in_file(path, line))))
}

fn per_node(g: &Hin, dir: &Path, name: &str, header: &str) -> Result<Vec<f64>> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut values = vec![f64::NAN; g.node_count()];
    for (line, f) in rows(&path, &text, header)? {
        let u = g.node(f[0]).map_err(|e| e.with_origin(Origin::in_file(&path, line)))?;
        values[u.index()] = num(&path, line, f[1])?;
    }
    if let Some(u) = values.iter().position(|x| x.is_nan()) {
        return Err(Error::format(
            format!("missing row for node `{}`", g.external_id(NodeId(u as u32))),
            Some(Origin::in_file(&path, 0)),
        ));
    }
    Ok(values)
}

/// Rebuild the summed per-node vectors from `tfidf.tsv`. A node counts as
/// having content when it has at least one term row, so a document whose
/// every token was filtered out reads back as content-free.
fn read_content(dir: &Path, g: &Hin, chi: Vec<f64>) -> Result<ContentScoreTable> {
    let path = dir.join(TFIDF_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let rows = rows(&path, &text, "node_id\tfield\tterm\tweight")?;
    let mut vocabulary: Vec<String> = rows.iter().map(|(_, f)| f[2].to_owned()).collect();
    vocabulary.sort();
    vocabulary.dedup();
    let n = g.node_count();
    let mut has_content = vec![false; n];
    let mut summed: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); n];
    for (line, f) in &rows {
        let u = g.node(f[0]).map_err(|e| e.with_origin(Origin::in_file(&path, *line)))?;
        let t = vocabulary.binary_search_by(|x| x.as_str().cmp(f[2])).unwrap() as u32;
        has_content[u.index()] = true;
        *summed[u.index()].entry(t).or_insert(0.0) += num(&path, *line, f[3])?;
    }
    let vectors = summed
        .into_iter()
        .map(|m| m.into_iter().filter(|&(_, w)| w != 0.0).collect())
        .collect();
    Ok(ContentScoreTable::from_parts(chi, has_content, vocabulary, vectors))
}

/// Read back the tables written by [`write_weights`].
pub fn read_weights(dir: &Path, g: &Hin) -> Result<StoredWeights> {
    let meta_path = dir.join(META_FILE);
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: PrecomputeMeta = serde_json::from_str(&meta_text)
        .map_err(|e| Error::format(e.to_string(), Some(Origin::in_file(&meta_path, e.line()))))?;

    let alpha = per_node(g, dir, ALPHA_FILE, "node_id\talpha")?;
    let centrality = CentralityTable::from_parts(
        alpha,
        meta.node_decay,
        vec![meta.final_residual; meta.iterations],
        meta.converged,
    );

    let chi = per_node(g, dir, CHI_FILE, "node_id\tchi")?;
    let content = read_content(dir, g, chi)?;

    let path = dir.join(MU_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let schema = g.schema().clone();
    let k = schema.relation_count();
    let (mut rf, mut irf, mut mu) = (vec![f64::NAN; k], vec![f64::NAN; k], vec![f64::NAN; k]);
    for (line, f) in rows(&path, &text, "relation\trf\tirf\tmu")? {
        let r = schema
            .relation_id(f[0].trim())
            .map_err(|e| e.with_origin(Origin::in_file(&path, line)))?;
        let i = r.0 as usize;
        rf[i] = num(&path, line, f[1])?;
        irf[i] = num(&path, line, f[2])?;
        mu[i] = num(&path, line, f[3])?;
    }
    if mu.iter().any(|x| x.is_nan()) {
        return Err(Error::format("missing relation row", Some(Origin::in_file(&path, 0))));
    }
    let contribution = ContributionGraph::from_parts(&schema, rf, irf, mu);
    Ok(StoredWeights {
        centrality,
        contribution,
        content,
        meta,
    })
}
