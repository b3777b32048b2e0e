//! Text content scores: tokenization, tf-idf and per-node content weights.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hin::{Hin, NodeId};

const STOP_WORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

/// Lowercasing tokenizer with a stop-word filter and an optional suffix
/// stemmer.
#[derive(Clone, Debug)]
pub struct Tokenizer {
    stop_words: HashSet<String>,
    stem: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self {
            stop_words: STOP_WORDS.iter().map(|s| s.to_string()).collect(),
            stem: false,
        }
    }
}

impl Tokenizer {
    pub fn with_stop_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            stop_words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
            stem: false,
        }
    }

    /// Read a stop-word list, one token per line; blank lines are skipped.
    pub fn from_stopwords_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::with_stop_words(
            text.lines().map(str::trim).filter(|l| !l.is_empty()),
        ))
    }

    pub fn stemming(mut self, on: bool) -> Self {
        self.stem = on;
        self
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| t.chars().count() >= 2 && !self.stop_words.contains(t))
            .map(|t| if self.stem { stem(&t) } else { t })
            .collect()
    }
}

/// Tokenize with the built-in stop-word list and no stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

/// Strip a handful of common English inflection suffixes.
fn stem(token: &str) -> String {
    let rules: &[(&str, &str)] = &[("sses", "ss"), ("ies", "y"), ("ing", ""), ("ed", ""), ("s", "")];
    for (suffix, repl) in rules {
        if let Some(base) = token.strip_suffix(suffix) {
            if *suffix == "s" && base.ends_with('s') {
                continue;
            }
            if base.chars().count() >= 3 {
                return format!("{base}{repl}");
            }
        }
    }
    token.to_owned()
}

/// Sparse vector of (term id, weight), sorted by term id, no zero entries.
pub type SparseVec = Vec<(u32, f64)>;

/// Term statistics and tf-idf vectors for one corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct TfIdfModel {
    terms: Vec<String>,
    df: Vec<usize>,
    vectors: Vec<SparseVec>,
}

impl TfIdfModel {
    /// Build from tokenized documents. Term ids follow lexicographic order.
    pub fn build(docs: &[Vec<String>]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let unique: HashSet<&str> = doc.iter().map(String::as_str).collect();
            for t in unique {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let terms: Vec<String> = df.keys().map(|t| t.to_string()).collect();
        let ids: HashMap<&str, u32> = df.keys().enumerate().map(|(i, t)| (*t, i as u32)).collect();
        let df: Vec<usize> = df.values().copied().collect();
        let d = docs.len() as f64;
        let vectors = docs
            .iter()
            .map(|doc| {
                let mut tf: BTreeMap<u32, usize> = BTreeMap::new();
                for t in doc {
                    *tf.entry(ids[t.as_str()]).or_insert(0) += 1;
                }
                tf.into_iter()
                    .map(|(id, count)| (id, count as f64 * (d / df[id as usize] as f64).ln()))
                    .filter(|&(_, w)| w != 0.0)
                    .collect()
            })
            .collect();
        Ok(Self { terms, df, vectors })
    }

    pub fn doc_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.terms
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()
            .map(|i| i as u32)
    }

    pub fn df(&self, term: &str) -> usize {
        self.term_id(term).map_or(0, |i| self.df[i as usize])
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        let df = self.df(term);
        (df > 0).then(|| (self.doc_count() as f64 / df as f64).ln())
    }

    pub fn vector(&self, doc: usize) -> &SparseVec {
        &self.vectors[doc]
    }

    /// Weight of `term` in document `doc`, zero when absent.
    pub fn weight(&self, doc: usize, term: &str) -> f64 {
        let Some(id) = self.term_id(term) else {
            return 0.0;
        };
        self.vectors[doc]
            .binary_search_by_key(&id, |&(i, _)| i)
            .map_or(0.0, |k| self.vectors[doc][k].1)
    }
}

/// Documents of one text field, each attached to a node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub field: String,
    pub docs: Vec<(NodeId, String)>,
}

/// A tf-idf model for one field together with the node owning each document.
#[derive(Clone, Debug)]
pub struct FieldModel {
    pub field: String,
    pub nodes: Vec<NodeId>,
    pub model: TfIdfModel,
}

impl FieldModel {
    pub fn build(corpus: &Corpus, tokenizer: &Tokenizer) -> Result<Self> {
        let tokens: Vec<Vec<String>> = corpus.docs.iter().map(|(_, text)| tokenizer.tokenize(text)).collect();
        Ok(Self {
            field: corpus.field.clone(),
            nodes: corpus.docs.iter().map(|(u, _)| *u).collect(),
            model: TfIdfModel::build(&tokens)?,
        })
    }
}

/// Build one tf-idf model per field.
pub fn build_field_models(corpora: &[Corpus], tokenizer: &Tokenizer) -> Result<Vec<FieldModel>> {
    corpora.iter().map(|c| FieldModel::build(c, tokenizer)).collect()
}

/// Per-node content score `χ` plus the summed tf-idf vector used for
/// pairwise relatedness.
#[derive(Clone, Debug, PartialEq)]
pub struct ContentScoreTable {
    chi: Vec<f64>,
    has_content: Vec<bool>,
    vocabulary: Vec<String>,
    vectors: Vec<SparseVec>,
}

impl ContentScoreTable {
    /// Every node without content: `χ ≡ 1`.
    pub fn uniform(n: usize) -> Self {
        Self {
            chi: vec![1.0; n],
            has_content: vec![false; n],
            vocabulary: Vec::new(),
            vectors: vec![Vec::new(); n],
        }
    }

    pub(crate) fn from_parts(
        chi: Vec<f64>,
        has_content: Vec<bool>,
        vocabulary: Vec<String>,
        vectors: Vec<SparseVec>,
    ) -> Self {
        Self {
            chi,
            has_content,
            vocabulary,
            vectors,
        }
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    #[inline]
    pub fn chi(&self, u: NodeId) -> f64 {
        self.chi[u.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.chi
    }

    pub fn has_content(&self, u: NodeId) -> bool {
        self.has_content[u.index()]
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Summed tf-idf vector over all fields, keyed into [`Self::vocabulary`].
    pub fn vector(&self, u: NodeId) -> &SparseVec {
        &self.vectors[u.index()]
    }

    /// Dot product of the two nodes' summed tf-idf vectors; 1 when either
    /// node has no content.
    pub fn pairwise_relatedness(&self, u: NodeId, v: NodeId) -> f64 {
        if !self.has_content(u) || !self.has_content(v) {
            return 1.0;
        }
        dot(self.vector(u), self.vector(v))
    }
}

fn dot(a: &SparseVec, b: &SparseVec) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn norm(v: &SparseVec) -> f64 {
    v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
}

/// `χ(u)`: sum over fields of the norm of the node's tf-idf vector, divided
/// by the mean over content-bearing nodes of the same type. Nodes without
/// content score 1; a type whose content nodes all score 0 gets 1 throughout.
pub fn content_scores(g: &Hin, fields: &[FieldModel]) -> ContentScoreTable {
    let n = g.node_count();
    let mut raw = vec![0.0; n];
    let mut has_content = vec![false; n];

    let mut vocabulary: Vec<String> = fields.iter().flat_map(|f| f.model.terms().iter().cloned()).collect();
    vocabulary.sort();
    vocabulary.dedup();
    let global = |t: &str| vocabulary.binary_search_by(|x| x.as_str().cmp(t)).unwrap() as u32;

    let mut summed: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); n];
    for f in fields {
        let remap: Vec<u32> = f.model.terms().iter().map(|t| global(t)).collect();
        for (doc, &u) in f.nodes.iter().enumerate() {
            let vec = f.model.vector(doc);
            has_content[u.index()] = true;
            raw[u.index()] += norm(vec);
            for &(id, w) in vec {
                *summed[u.index()].entry(remap[id as usize]).or_insert(0.0) += w;
            }
        }
    }

    let mut chi = vec![1.0; n];
    for t in g.schema().types() {
        let with: Vec<NodeId> = g
            .members(t)
            .iter()
            .copied()
            .filter(|u| has_content[u.index()])
            .collect();
        if with.is_empty() {
            continue;
        }
        let mean = with.iter().map(|u| raw[u.index()]).sum::<f64>() / with.len() as f64;
        if mean > 0.0 {
            for u in with {
                chi[u.index()] = raw[u.index()] / mean;
            }
        }
    }

    let vectors = summed
        .into_iter()
        .map(|m| m.into_iter().filter(|&(_, w)| w != 0.0).collect())
        .collect();
    ContentScoreTable {
        chi,
        has_content,
        vocabulary,
        vectors,
    }
}
