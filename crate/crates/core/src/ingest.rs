//! Dataset files, loading, and the synthetic network generator.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::content::Corpus;
use crate::error::{Error, Origin, Result};
use crate::eval::EdgeTimes;
use crate::hin::{GraphBuilder, Hin, RelationDecl, Schema, SchemaFile};

pub const SCHEMA_FILE: &str = "schema.json";
pub const NODES_FILE: &str = "nodes.tsv";
pub const EDGES_FILE: &str = "edges.tsv";
pub const TEXT_FILE: &str = "text.tsv";
pub const LABELS_FILE: &str = "labels.tsv";

/// File locations of a dataset. The text and label tables are optional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetPaths {
    pub schema: PathBuf,
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub text: Option<PathBuf>,
}

impl DatasetPaths {
    /// Standard file names inside `dir`; `text.tsv` is used if present.
    pub fn in_dir(dir: &Path) -> Self {
        let text = dir.join(TEXT_FILE);
        Self {
            schema: dir.join(SCHEMA_FILE),
            nodes: dir.join(NODES_FILE),
            edges: dir.join(EDGES_FILE),
            text: text.exists().then_some(text),
        }
    }
}

/// A loaded network with its text corpora and optional edge times.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub hin: Hin,
    pub corpora: Vec<Corpus>,
    pub edge_times: Option<EdgeTimes>,
}

/// Undo the escaping used in `text.tsv`: `\t`, `\n`, `\r`, `\\`.
pub fn unescape(field: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// A parsed TSV table: column positions looked up from the header.
struct Table<'a> {
    path: &'a Path,
    columns: Vec<&'a str>,
    rows: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> Table<'a> {
    fn parse(path: &'a Path, text: &'a str, required: &[&str], optional: &[&str]) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((hline, header)) = lines.next() else {
            return Err(Error::format("missing header row", Some(Origin::in_file(path, 1))));
        };
        let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
        let origin = Some(Origin::in_file(path, hline + 1));
        for c in &columns {
            if !required.contains(c) && !optional.contains(c) {
                return Err(Error::format(format!("unexpected column `{c}`"), origin));
            }
        }
        for r in required {
            if !columns.contains(r) {
                return Err(Error::format(format!("missing column `{r}`"), origin));
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != columns.len() {
                return Err(Error::format(
                    format!("expected {} fields, found {}", columns.len(), fields.len()),
                    Some(Origin::in_file(path, i + 1)),
                ));
            }
            rows.push((i + 1, fields));
        }
        Ok(Self { path, columns, rows })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    fn origin(&self, line: usize) -> Origin {
        Origin::in_file(self.path, line)
    }
}

pub fn read_schema(path: &Path) -> Result<Schema> {
    let text = read(path)?;
    let file: SchemaFile =
        serde_json::from_str(&text).map_err(|e| Error::format(e.to_string(), Some(Origin::in_file(path, e.line()))))?;
    Schema::from_file(file)
}

/// Load and freeze a dataset. Every malformed row is reported with its
/// file and line.
pub fn load_dataset(paths: &DatasetPaths) -> Result<Dataset> {
    let schema = read_schema(&paths.schema)?;
    let mut builder = GraphBuilder::new(schema);

    let text = read(&paths.nodes)?;
    let nodes = Table::parse(&paths.nodes, &text, &["id", "type"], &[])?;
    let (ci, ct) = (nodes.col("id").unwrap(), nodes.col("type").unwrap());
    for (line, row) in &nodes.rows {
        builder
            .add_node(row[ci].trim(), row[ct].trim())
            .map_err(|e| e.with_origin(nodes.origin(*line)))?;
    }

    let text = read(&paths.edges)?;
    let edges = Table::parse(&paths.edges, &text, &["src", "dst", "relation"], &["time"])?;
    let (cs, cd, cr) = (
        edges.col("src").unwrap(),
        edges.col("dst").unwrap(),
        edges.col("relation").unwrap(),
    );
    let ctime = edges.col("time");
    let mut times: EdgeTimes = EdgeTimes::new();
    for (line, row) in &edges.rows {
        let (r, a, b) = builder
            .add_edge(row[cs].trim(), row[cd].trim(), row[cr].trim())
            .map_err(|e| e.with_origin(edges.origin(*line)))?;
        if let Some(ct) = ctime {
            let t: i64 = row[ct]
                .trim()
                .parse()
                .map_err(|_| Error::format(format!("bad time `{}`", row[ct]), Some(edges.origin(*line))))?;
            // duplicate edges keep their earliest time
            times
                .entry((r, a, b))
                .and_modify(|old| *old = (*old).min(t))
                .or_insert(t);
        }
    }
    let hin = builder.freeze();

    let corpora = match &paths.text {
        Some(p) => load_text(&hin, p)?,
        None => Vec::new(),
    };
    Ok(Dataset {
        hin,
        corpora,
        edge_times: ctime.map(|_| times),
    })
}

fn load_text(hin: &Hin, path: &Path) -> Result<Vec<Corpus>> {
    let text = read(path)?;
    let table = Table::parse(path, &text, &["id", "field", "text"], &[])?;
    let (ci, cf, ct) = (
        table.col("id").unwrap(),
        table.col("field").unwrap(),
        table.col("text").unwrap(),
    );
    let mut fields: BTreeMap<String, BTreeMap<crate::hin::NodeId, String>> = BTreeMap::new();
    for (line, row) in &table.rows {
        let origin = table.origin(*line);
        let u = hin.node(row[ci].trim()).map_err(|e| e.with_origin(origin.clone()))?;
        let body = unescape(row[ct]).map_err(|r| Error::format(r, Some(origin)))?;
        let doc = fields
            .entry(row[cf].trim().to_owned())
            .or_default()
            .entry(u)
            .or_default();
        if !doc.is_empty() {
            doc.push(' ');
        }
        doc.push_str(&body);
    }
    Ok(fields
        .into_iter()
        .map(|(field, docs)| Corpus {
            field,
            docs: docs.into_iter().collect(),
        })
        .collect())
}

/// Read `labels.tsv` (`id`, `label`) as raw pairs.
pub fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read(path)?;
    let table = Table::parse(path, &text, &["id", "label"], &[])?;
    let (ci, cl) = (table.col("id").unwrap(), table.col("label").unwrap());
    Ok(table
        .rows
        .iter()
        .map(|(_, r)| (r[ci].trim().to_owned(), r[cl].trim().to_owned()))
        .collect())
}

/// In-memory copy of dataset files, as produced by the generator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetBundle {
    pub schema: Option<SchemaFile>,
    /// `(id, type)`
    pub nodes: Vec<(String, String)>,
    /// `(src, dst, relation, time)`
    pub edges: Vec<(String, String, String, Option<i64>)>,
    /// `(id, field, text)`
    pub texts: Vec<(String, String, String)>,
    /// `(id, label)`
    pub labels: Vec<(String, String)>,
}

impl DatasetBundle {
    pub fn schema_json(&self) -> String {
        let schema = self.schema.as_ref().expect("bundle has a schema");
        serde_json::to_string_pretty(schema).expect("schema serializes") + "\n"
    }

    pub fn nodes_tsv(&self) -> String {
        let mut out = String::from("id\ttype\n");
        for (id, t) in &self.nodes {
            let _ = writeln!(out, "{id}\t{t}");
        }
        out
    }

    pub fn edges_tsv(&self) -> String {
        let timed = self.edges.iter().any(|e| e.3.is_some());
        let mut out = String::from(if timed {
            "src\tdst\trelation\ttime\n"
        } else {
            "src\tdst\trelation\n"
        });
        for (s, d, r, t) in &self.edges {
            if timed {
                let _ = writeln!(out, "{s}\t{d}\t{r}\t{}", t.unwrap_or(0));
            } else {
                let _ = writeln!(out, "{s}\t{d}\t{r}");
            }
        }
        out
    }

    pub fn text_tsv(&self) -> String {
        let mut out = String::from("id\tfield\ttext\n");
        for (id, f, t) in &self.texts {
            let _ = writeln!(out, "{id}\t{f}\t{}", escape(t));
        }
        out
    }

    pub fn labels_tsv(&self) -> String {
        let mut out = String::from("id\tlabel\n");
        for (id, l) in &self.labels {
            let _ = writeln!(out, "{id}\t{l}");
        }
        out
    }

    /// Write the standard files into `dir`, creating it if needed. The text
    /// and label tables are written only when non-empty.
    pub fn write(&self, dir: &Path) -> Result<DatasetPaths> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, body: String| -> Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        put(SCHEMA_FILE, self.schema_json())?;
        put(NODES_FILE, self.nodes_tsv())?;
        put(EDGES_FILE, self.edges_tsv())?;
        if !self.texts.is_empty() {
            put(TEXT_FILE, self.text_tsv())?;
        }
        if !self.labels.is_empty() {
            put(LABELS_FILE, self.labels_tsv())?;
        }
        Ok(DatasetPaths::in_dir(dir))
    }

    /// Freeze without touching the file system.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let schema = Schema::from_file(self.schema.clone().expect("bundle has a schema"))?;
        let mut b = GraphBuilder::new(schema);
        for (i, (id, t)) in self.nodes.iter().enumerate() {
            b.add_node(id, t).map_err(|e| e.with_origin(Origin::line(i + 1)))?;
        }
        let mut times = EdgeTimes::new();
        let timed = self.edges.iter().any(|e| e.3.is_some());
        for (i, (s, d, r, t)) in self.edges.iter().enumerate() {
            let key = b.add_edge(s, d, r).map_err(|e| e.with_origin(Origin::line(i + 1)))?;
            if let Some(t) = t {
                times.entry(key).and_modify(|o| *o = (*o).min(*t)).or_insert(*t);
            }
        }
        let hin = b.freeze();
        let mut fields: BTreeMap<&str, BTreeMap<crate::hin::NodeId, String>> = BTreeMap::new();
        for (i, (id, f, t)) in self.texts.iter().enumerate() {
            let u = hin.node(id).map_err(|e| e.with_origin(Origin::line(i + 1)))?;
            let doc = fields.entry(f).or_default().entry(u).or_default();
            if !doc.is_empty() {
                doc.push(' ');
            }
            doc.push_str(t);
        }
        let corpora = fields
            .into_iter()
            .map(|(f, docs)| Corpus {
                field: f.to_owned(),
                docs: docs.into_iter().collect(),
            })
            .collect();
        Ok(Dataset {
            hin,
            corpora,
            edge_times: timed.then_some(times),
        })
    }
}

/// One relation of a synthetic network.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthRelation {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub edges: usize,
    /// Undirected relation within one type.
    pub self_inverse: bool,
}

impl SynthRelation {
    pub fn new(name: &str, src: &str, dst: &str, edges: usize) -> Self {
        Self {
            name: name.to_owned(),
            src: src.to_owned(),
            dst: dst.to_owned(),
            edges,
            self_inverse: false,
        }
    }

    pub fn undirected(mut self) -> Self {
        self.self_inverse = true;
        self
    }
}

/// Random text attached to every node of one type.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthText {
    pub node_type: String,
    pub field: String,
    pub vocabulary: usize,
    pub words: usize,
}

/// Parameters of a synthetic network.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    /// `(type name, node count)`
    pub types: Vec<(String, usize)>,
    pub relations: Vec<SynthRelation>,
    /// 0 gives uniform endpoints; larger values approach a power law with
    /// weight `1/(i+1)^skew` for the `i`-th node of a type.
    pub skew: f64,
    pub text: Option<SynthText>,
    /// Attach a random year in `[start, end]` to every edge.
    pub years: Option<(i64, i64)>,
    pub seed: u64,
}

impl SynthSpec {
    /// Bibliographic network with author/paper/term/venue counts scaled
    /// from a 3·10⁵-edge reference (`scale = 1` gives ≈296k edges).
    pub fn bibliographic(scale: f64, seed: u64) -> Self {
        let s = |x: f64| ((x * scale).round() as usize).max(1);
        Self {
            types: vec![
                ("A".into(), s(28645.0)),
                ("P".into(), s(21044.0)),
                ("T".into(), s(22551.0)),
                ("V".into(), 18),
            ],
            relations: vec![
                SynthRelation::new("AP", "A", "P", s(69311.0)),
                SynthRelation::new("PP", "P", "P", s(34238.0)),
                SynthRelation::new("PT", "P", "T", s(171774.0)),
                SynthRelation::new("VP", "V", "P", s(21044.0)),
            ],
            skew: 0.8,
            text: None,
            years: None,
            seed,
        }
    }
}

fn node_id(type_name: &str, i: usize) -> String {
    format!("{}{}", type_name.to_lowercase(), i)
}

/// Deterministic random network: the same spec always yields the same
/// bundle.
pub fn generate_synthetic_hin(spec: &SynthSpec) -> Result<DatasetBundle> {
    let counts: BTreeMap<&str, usize> = spec.types.iter().map(|(t, n)| (t.as_str(), *n)).collect();
    let count = |t: &str| -> Result<usize> {
        counts.get(t).copied().ok_or_else(|| Error::UnknownType {
            name: t.to_owned(),
            origin: None,
        })
    };
    if spec.types.iter().any(|(_, n)| *n == 0) {
        return Err(Error::InfeasibleSpec("every node type needs at least one node".into()));
    }
    if !(spec.skew >= 0.0) {
        return Err(Error::InfeasibleSpec("skew must be non-negative".into()));
    }
    let schema = SchemaFile {
        node_types: spec.types.iter().map(|(t, _)| t.clone()).collect(),
        relations: spec
            .relations
            .iter()
            .map(|r| {
                let d = RelationDecl::new(&r.name, &r.src, &r.dst);
                if r.self_inverse {
                    d.with_inverse(&r.name)
                } else {
                    d
                }
            })
            .collect(),
    };
    Schema::from_file(schema.clone())?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut bundle = DatasetBundle {
        schema: Some(schema),
        ..Default::default()
    };
    for (t, n) in &spec.types {
        for i in 0..*n {
            bundle.nodes.push((node_id(t, i), t.clone()));
        }
    }

    for rel in &spec.relations {
        let (ns, nd) = (count(&rel.src)?, count(&rel.dst)?);
        let capacity = if rel.self_inverse { ns * (ns - 1) / 2 } else { ns * nd };
        if rel.edges > capacity {
            return Err(Error::InfeasibleSpec(format!(
                "relation {} asks for {} edges but only {} distinct pairs exist",
                rel.name, rel.edges, capacity
            )));
        }
        let pairs = if rel.edges * 2 > capacity {
            // dense: a uniform subset of all pairs
            let mut all: Vec<(usize, usize)> = if rel.self_inverse {
                (0..ns).flat_map(|a| (a + 1..ns).map(move |b| (a, b))).collect()
            } else {
                (0..ns).flat_map(|a| (0..nd).map(move |b| (a, b))).collect()
            };
            all.shuffle(&mut rng);
            all.truncate(rel.edges);
            all
        } else {
            let weights = |n: usize| -> Vec<f64> { (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(spec.skew)).collect() };
            let src = WeightedAliasIndex::new(weights(ns)).map_err(|e| Error::InfeasibleSpec(e.to_string()))?;
            let dst = WeightedAliasIndex::new(weights(nd)).map_err(|e| Error::InfeasibleSpec(e.to_string()))?;
            let mut seen = HashSet::with_capacity(rel.edges);
            let mut out = Vec::with_capacity(rel.edges);
            let mut attempts = 0usize;
            while out.len() < rel.edges {
                attempts += 1;
                if attempts > rel.edges.saturating_mul(200).max(10_000) {
                    return Err(Error::InfeasibleSpec(format!(
                        "relation {} is too dense for skew {}",
                        rel.name, spec.skew
                    )));
                }
                let (mut a, mut b) = (src.sample(&mut rng), dst.sample(&mut rng));
                if rel.self_inverse {
                    if a == b {
                        continue;
                    }
                    if a > b {
                        std::mem::swap(&mut a, &mut b);
                    }
                }
                if seen.insert((a, b)) {
                    out.push((a, b));
                }
            }
            out
        };
        for (a, b) in pairs {
            let year = spec.years.map(|(lo, hi)| rng.random_range(lo..=hi));
            bundle
                .edges
                .push((node_id(&rel.src, a), node_id(&rel.dst, b), rel.name.clone(), year));
        }
    }

    if let Some(text) = &spec.text {
        let n = count(&text.node_type)?;
        if text.vocabulary == 0 {
            return Err(Error::InfeasibleSpec("text vocabulary must be non-empty".into()));
        }
        for i in 0..n {
            let words: Vec<String> = (0..text.words)
                .map(|_| format!("w{}", rng.random_range(0..text.vocabulary)))
                .collect();
            bundle
                .texts
                .push((node_id(&text.node_type, i), text.field.clone(), words.join(" ")));
        }
    }
    Ok(bundle)
}

/// Two-community author/paper/venue network with planted author labels
/// `b0`/`b1`. Authors are split evenly; each paper belongs to one block,
/// and each of its authors and its venue come from that block with
/// probability `cohesion`.
pub fn planted_partition(authors: usize, papers: usize, cohesion: f64, seed: u64) -> Result<DatasetBundle> {
    if authors < 8 || papers < 2 || !(0.5..=1.0).contains(&cohesion) {
        return Err(Error::InfeasibleSpec(
            "need at least 8 authors, 2 papers and cohesion in [0.5, 1]".into(),
        ));
    }
    let venues = 4;
    let schema = SchemaFile {
        node_types: vec!["A".into(), "P".into(), "V".into()],
        relations: vec![RelationDecl::new("AP", "A", "P"), RelationDecl::new("PV", "P", "V")],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bundle = DatasetBundle {
        schema: Some(schema),
        ..Default::default()
    };
    let block_of = |i: usize, n: usize| usize::from(i >= n / 2);
    let block_members = |b: usize, n: usize| -> std::ops::Range<usize> {
        if b == 0 {
            0..n / 2
        } else {
            n / 2..n
        }
    };
    for i in 0..authors {
        bundle.nodes.push((node_id("A", i), "A".into()));
        bundle
            .labels
            .push((node_id("A", i), format!("b{}", block_of(i, authors))));
    }
    for i in 0..papers {
        bundle.nodes.push((node_id("P", i), "P".into()));
    }
    for i in 0..venues {
        bundle.nodes.push((node_id("V", i), "V".into()));
    }
    for p in 0..papers {
        let block = block_of(p, papers);
        let mut chosen = HashSet::new();
        while chosen.len() < 3 {
            let b = if rng.random_bool(cohesion) { block } else { 1 - block };
            let a = rng.random_range(block_members(b, authors));
            if chosen.insert(a) {
                bundle.edges.push((node_id("A", a), node_id("P", p), "AP".into(), None));
            }
        }
        let b = if rng.random_bool(cohesion) { block } else { 1 - block };
        let v = rng.random_range(block_members(b, venues));
        bundle.edges.push((node_id("P", p), node_id("V", v), "PV".into(), None));
    }
    Ok(bundle)
}

/// Parameters of the planted two-block network used for label recovery
/// checks: 200 authors, 600 papers, 2% cross-block links.
pub const PLANTED_AUTHORS: usize = 200;
pub const PLANTED_PAPERS: usize = 600;
pub const PLANTED_COHESION: f64 = 0.98;

pub fn planted_preset(seed: u64) -> DatasetBundle {
    planted_partition(PLANTED_AUTHORS, PLANTED_PAPERS, PLANTED_COHESION, seed).expect("preset is feasible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_round_trip() {
        let s = "tab\there\nnew \\ slash";
        assert_eq!(unescape(&escape(s)).unwrap(), s);
        assert!(unescape("bad\\q").is_err());
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = SynthSpec {
            types: vec![("X".into(), 10), ("Y".into(), 10)],
            relations: vec![SynthRelation::new("XY", "X", "Y", 30)],
            skew: 0.5,
            text: None,
            years: None,
            seed: 7,
        };
        let a = generate_synthetic_hin(&spec).unwrap();
        let b = generate_synthetic_hin(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edges_tsv(), b.edges_tsv());
        let d = a.to_dataset().unwrap();
        assert_eq!(d.hin.edge_count(), 30);
    }

    #[test]
    fn generator_rejects_infeasible() {
        let spec = SynthSpec {
            types: vec![("X".into(), 10), ("Y".into(), 10)],
            relations: vec![SynthRelation::new("XY", "X", "Y", 101)],
            skew: 0.0,
            text: None,
            years: None,
            seed: 1,
        };
        assert!(matches!(generate_synthetic_hin(&spec), Err(Error::InfeasibleSpec(_))));
        let spec = SynthSpec {
            relations: vec![SynthRelation::new("XY", "X", "Y", 100)],
            ..spec
        };
        assert_eq!(generate_synthetic_hin(&spec).unwrap().edges.len(), 100);
    }

    #[test]
    fn planted_partition_shape() {
        let b = planted_partition(200, 300, 0.9, 5).unwrap();
        assert_eq!(b.labels.len(), 200);
        assert_eq!(b.edges.len(), 300 * 4);
        let d = b.to_dataset().unwrap();
        assert_eq!(d.hin.node_count(), 200 + 300 + 4);
    }
}
