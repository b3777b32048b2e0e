//! Subcommand implementations. Every command writes its primary output to
//! `out`; warnings go to stderr. Lines carrying wall-clock timings contain
//! `_ms`, everything else is deterministic for a fixed configuration.

use std::io::Write;
use std::time::Instant;

use hetfs_core::content::Tokenizer;
use hetfs_core::engine::{metapath_free_query, topk, Engine, EngineKind, QueryOptions, TopKResult};
use hetfs_core::eval::{
    clustering_metrics, evaluate_links, label_transfer_eval, link_prediction_eval, random_scores,
    similarity_label_transfer, split_links, LabeledNodes, LinkEvalOptions, SplitMode, SplitSpec,
};
use hetfs_core::ingest::{
    generate_synthetic_hin, load_dataset, planted_preset, read_labels, Dataset, DatasetPaths, SynthRelation, SynthSpec,
    SynthText,
};
use hetfs_core::pipeline::Precomputed;
use hetfs_core::store::{
    read_snapshot, read_weights, write_snapshot, write_weights, PrecomputeMeta, StoredWeights, ALPHA_FILE, CHI_FILE,
    META_FILE, MU_FILE, SNAPSHOT_FILE, TFIDF_FILE,
};
use hetfs_core::weights::CentralityConfig;
use hetfs_core::{ContentMode, Error, Hin, MetaPathSet, WeightModel};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ProjectConfig;
use crate::{CliError, CliResult, EvalArgs, EvalTask, Preset, Scorer, SynthArgs};

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn tokenizer(cfg: &ProjectConfig) -> CliResult<Tokenizer> {
    let t = match &cfg.stopwords {
        Some(p) => Tokenizer::from_stopwords_file(p)?,
        None => Tokenizer::default(),
    };
    Ok(t.stemming(cfg.stem))
}

fn centrality_config(cfg: &ProjectConfig) -> CentralityConfig {
    CentralityConfig {
        decay: cfg.node_decay,
        tolerance: cfg.tolerance,
        max_iter: cfg.max_iter,
    }
}

/// `nodes: M=3 A=2 D=1; edges: MA=4 MD=2`
pub fn summary_line(g: &Hin) -> String {
    let s = g.schema();
    let nodes: Vec<String> = s
        .types()
        .map(|t| format!("{}={}", s.type_name(t), g.members(t).len()))
        .collect();
    let edges: Vec<String> = s
        .relation_ids()
        .map(|r| format!("{}={}", s.relation(r).name, g.relation_edge_count(r)))
        .collect();
    format!("nodes: {}; edges: {}", nodes.join(" "), edges.join(" "))
}

fn snapshot_path(cfg: &ProjectConfig) -> std::path::PathBuf {
    cfg.store.join(SNAPSHOT_FILE)
}

fn load_snapshot(cfg: &ProjectConfig) -> CliResult<Dataset> {
    let p = snapshot_path(cfg);
    if !p.exists() {
        return Err(CliError::Usage(format!(
            "no graph snapshot at {}; run `hetfs ingest` first",
            p.display()
        )));
    }
    Ok(read_snapshot(&p)?)
}

pub fn ingest(cfg: &ProjectConfig, out: &mut dyn Write) -> CliResult {
    let dataset = load_dataset(&DatasetPaths::in_dir(&cfg.data))?;
    std::fs::create_dir_all(&cfg.store)?;
    let p = snapshot_path(cfg);
    let bytes = write_snapshot(&p, &dataset)?;
    writeln!(out, "{}", summary_line(&dataset.hin))?;
    let fields: Vec<&str> = dataset.corpora.iter().map(|c| c.field.as_str()).collect();
    if !fields.is_empty() {
        writeln!(out, "text fields: {}", fields.join(" "))?;
    }
    if dataset.edge_times.is_some() {
        writeln!(out, "edge times: yes")?;
    }
    writeln!(out, "snapshot: {} sha256={}", p.display(), sha256_hex(&bytes))?;
    Ok(())
}

pub fn precompute(cfg: &ProjectConfig, out: &mut dyn Write) -> CliResult {
    let dataset = load_snapshot(cfg)?;
    let g = &dataset.hin;
    let pre = Precomputed::build(g, &dataset.corpora, &tokenizer(cfg)?, &centrality_config(cfg))?;
    let zero: Vec<String> = pre
        .contribution
        .zero_relations()
        .into_iter()
        .map(str::to_owned)
        .collect();
    let meta = PrecomputeMeta {
        node_decay: cfg.node_decay,
        tolerance: cfg.tolerance,
        max_iter: cfg.max_iter,
        iterations: pre.centrality.iterations(),
        converged: pre.centrality.converged(),
        final_residual: pre.centrality.final_residual(),
        fields: pre.field_models.iter().map(|m| m.field.clone()).collect(),
        zero_contribution: zero.clone(),
    };
    write_weights(
        &cfg.store,
        g,
        &pre.centrality,
        &pre.contribution,
        &pre.content,
        &pre.field_models,
        &meta,
    )?;
    writeln!(
        out,
        "centrality: iterations={} final_residual={:e} converged={}",
        meta.iterations, meta.final_residual, meta.converged
    )?;
    if !meta.converged {
        eprintln!(
            "warning: centrality did not converge within {} iterations (residual {:e})",
            cfg.max_iter, meta.final_residual
        );
    }
    let s = g.schema();
    for r in s.relation_ids() {
        writeln!(
            out,
            "contribution: {} rf={} irf={} mu={}",
            s.relation(r).name,
            pre.contribution.rf(r),
            pre.contribution.irf(r),
            pre.contribution.mu(r)
        )?;
    }
    for name in &zero {
        eprintln!("warning: μ=0 for {name}; paths through it score 0");
    }
    if meta.fields.is_empty() {
        writeln!(out, "content: none (χ = 1)")?;
    } else {
        writeln!(out, "content: fields {}", meta.fields.join(" "))?;
    }
    writeln!(
        out,
        "wrote {ALPHA_FILE} {MU_FILE} {CHI_FILE} {TFIDF_FILE} {META_FILE} to {}",
        cfg.store.display()
    )?;
    Ok(())
}

/// A loaded snapshot with its weight tables.
pub struct Session {
    pub dataset: Dataset,
    pub weights: StoredWeights,
    pub load_ms: f64,
}

impl Session {
    pub fn load(cfg: &ProjectConfig) -> CliResult<Self> {
        let start = Instant::now();
        let dataset = load_snapshot(cfg)?;
        if !cfg.store.join(META_FILE).exists() {
            return Err(CliError::Usage(format!(
                "no weight tables in {}; run `hetfs precompute` first",
                cfg.store.display()
            )));
        }
        let weights = read_weights(&cfg.store, &dataset.hin)?;
        Ok(Self {
            dataset,
            weights,
            load_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn model(&self, decay: f64, mode: ContentMode) -> CliResult<WeightModel<'_>> {
        let w = &self.weights;
        Ok(WeightModel::new(
            &self.dataset.hin,
            w.content.clone(),
            w.centrality.clone(),
            w.contribution.clone(),
        )?
        .with_decay(decay)?
        .with_content_mode(mode))
    }
}

/// What a query ranks over.
pub enum Target<'a> {
    Paths(&'a str),
    Free(usize),
}

pub fn engine_of(cfg: &ProjectConfig) -> Engine {
    match cfg.engine {
        EngineKind::Exact => Engine::Exact,
        EngineKind::MonteCarlo => Engine::MonteCarlo {
            walks: cfg.walks,
            seed: cfg.seed,
        },
    }
}

pub fn run_query(wm: &WeightModel<'_>, cfg: &ProjectConfig, node: &str, target: Target<'_>) -> CliResult<TopKResult> {
    let g = wm.graph();
    let u = g.node(node)?;
    let opts = QueryOptions {
        k: cfg.k,
        epsilon: cfg.epsilon,
        engine: engine_of(cfg),
    };
    let result = match target {
        Target::Paths(spec) => {
            let set = MetaPathSet::parse(spec, g.schema())?;
            topk(wm, u, &set, &opts)
        }
        Target::Free(max_len) => metapath_free_query(wm, u, max_len, &opts),
    };
    result.map_err(|e| match e {
        Error::UnsupportedContentMode(mode) => CliError::Usage(format!(
            "content mode `{mode}` needs the Monte-Carlo engine; pass --engine mc"
        )),
        other => other.into(),
    })
}

pub fn render(result: &TopKResult, json: bool, out: &mut dyn Write) -> CliResult {
    if json {
        writeln!(out, "{}", result.to_json())?;
    } else {
        writeln!(
            out,
            "# query={} metapaths={} engine={} k={}",
            result.query,
            result.metapaths.join(","),
            result.engine,
            result.k
        )?;
        out.write_all(result.to_tsv().as_bytes())?;
        writeln!(out, "# elapsed_ms={:.3}", result.elapsed_ms)?;
    }
    Ok(())
}

pub fn query(
    cfg: &ProjectConfig,
    node: &str,
    mp: Option<&str>,
    free: Option<usize>,
    json: bool,
    out: &mut dyn Write,
) -> CliResult {
    let session = Session::load(cfg)?;
    let wm = session.model(cfg.decay, cfg.content_mode)?;
    let target = match (mp, free) {
        (Some(m), _) => Target::Paths(m),
        (None, Some(l)) => Target::Free(l),
        (None, None) => return Err(CliError::Usage("give --mp or --free".into())),
    };
    let result = run_query(&wm, cfg, node, target)?;
    render(&result, json, out)
}

fn parse_split(text: &str, seed: u64) -> CliResult<SplitMode> {
    let bad = || CliError::Usage(format!("--split must be time:T or random:R, got `{text}`"));
    match text.split_once(':') {
        Some(("time", t)) => Ok(SplitMode::Time(t.parse().map_err(|_| bad())?)),
        Some(("random", r)) => Ok(SplitMode::Random {
            ratio: r.parse().map_err(|_| bad())?,
            seed,
        }),
        _ => Err(bad()),
    }
}

pub fn eval(cfg: &ProjectConfig, args: &EvalArgs, out: &mut dyn Write) -> CliResult {
    let max_len = args.max_len.unwrap_or(cfg.max_len);
    let seed = args.seed.unwrap_or(cfg.seed);
    let scorer = match args.scorer {
        Scorer::Hetfs => "hetfs",
        Scorer::Random => "random",
    };
    let report = match args.task {
        EvalTask::Linkpred => {
            let relation = args
                .relation
                .clone()
                .ok_or_else(|| CliError::Usage("linkpred needs --relation".into()))?;
            let dataset = load_snapshot(cfg)?;
            let spec = SplitSpec {
                mode: parse_split(&args.split, seed)?,
                relation: relation.clone(),
            };
            let split = split_links(&dataset.hin, &spec, dataset.edge_times.as_ref())?;
            let opts = LinkEvalOptions {
                k: args.k.unwrap_or(cfg.k),
                seed,
                ..LinkEvalOptions::default()
            };
            let report = match args.scorer {
                Scorer::Random => evaluate_links(
                    &split,
                    |u| Ok(random_scores(&split.train, u, split.endpoint, seed)),
                    &opts,
                )?,
                Scorer::Hetfs => {
                    if cfg.content_mode == ContentMode::Pairwise {
                        return Err(CliError::Usage(
                            "link prediction uses the exact engine; content mode `pair` is not available".into(),
                        ));
                    }
                    // weights are recomputed on the training graph so held-out
                    // links leak into neither α nor μ
                    let pre = Precomputed::build(
                        &split.train,
                        &dataset.corpora,
                        &tokenizer(cfg)?,
                        &centrality_config(cfg),
                    )?;
                    let wm = pre
                        .model(&split.train)?
                        .with_decay(cfg.decay)?
                        .with_content_mode(cfg.content_mode);
                    link_prediction_eval(&wm, &split, max_len, &opts)?
                }
            };
            json!({
                "task": "linkpred",
                "scorer": scorer,
                "relation": relation,
                "split": args.split,
                "max_len": max_len,
                "k": opts.k,
                "auc": report.auc,
                "mrr": report.mrr,
                "f1": report.f1,
                "queries": report.queries,
                "positives": report.positives,
                "negatives": report.negatives,
            })
        }
        EvalTask::Cluster | EvalTask::Classify => {
            if args.scorer == Scorer::Random {
                return Err(CliError::Usage(
                    "the random scorer is only available for linkpred".into(),
                ));
            }
            if cfg.content_mode == ContentMode::Pairwise {
                return Err(CliError::Usage(
                    "label transfer uses the exact engine; content mode `pair` is not available".into(),
                ));
            }
            let session = Session::load(cfg)?;
            let g = &session.dataset.hin;
            let path = args.labels.clone().unwrap_or_else(|| cfg.labels_path());
            let labeled = LabeledNodes::new(g, &read_labels(&path)?)?;
            let (train, test) = labeled.split(args.train_fraction, seed)?;
            let wm = session.model(cfg.decay, cfg.content_mode)?;
            if args.task == EvalTask::Classify {
                let r = label_transfer_eval(&wm, &train, &test, max_len)?;
                json!({
                    "task": "classify",
                    "max_len": max_len,
                    "train_fraction": args.train_fraction,
                    "accuracy": r.accuracy,
                    "micro_f1": r.micro_f1,
                    "macro_f1": r.macro_f1,
                    "labeled": r.labeled,
                    "targets": r.targets,
                    "unlabeled": r.unlabeled,
                })
            } else {
                let targets: Vec<_> = test.nodes().collect();
                let pred = similarity_label_transfer(&wm, &train, &targets, max_len)?;
                let truth: Vec<Option<String>> = targets.iter().map(|&u| test.label(u).map(str::to_owned)).collect();
                let r = clustering_metrics(&pred, &truth)?;
                json!({
                    "task": "cluster",
                    "max_len": max_len,
                    "train_fraction": args.train_fraction,
                    "nmi": r.nmi,
                    "ari": r.ari,
                    "labeled": train.len(),
                    "targets": targets.len(),
                })
            }
        }
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    )?;
    Ok(())
}

pub fn contribution(cfg: &ProjectConfig, overrides: &[String], out: &mut dyn Write) -> CliResult {
    let dataset = load_snapshot(cfg)?;
    let mut cg = read_weights(&cfg.store, &dataset.hin)?.contribution;
    for o in overrides {
        let (name, value) = o
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects R=VALUE, got `{o}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad weight `{value}` in `{o}`")))?;
        cg = cg.override_contribution(name.trim(), value)?;
    }
    out.write_all(cg.to_dot().as_bytes())?;
    Ok(())
}

fn parse_pair(text: &str, what: &str) -> CliResult<(i64, i64)> {
    let bad = || CliError::Usage(format!("{what} must be START:END, got `{text}`"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

fn custom_spec(args: &SynthArgs) -> CliResult<SynthSpec> {
    let types_arg = args
        .types
        .as_deref()
        .ok_or_else(|| CliError::Usage("custom preset needs --types".into()))?;
    let mut types = Vec::new();
    for item in types_arg.split(',') {
        let (name, count) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--types entry `{item}` is not NAME=COUNT")))?;
        let count = count
            .parse()
            .map_err(|_| CliError::Usage(format!("bad node count in `{item}`")))?;
        types.push((name.trim().to_owned(), count));
    }
    let mut relations = Vec::new();
    for item in &args.relations {
        let parts: Vec<&str> = item.split(':').collect();
        let (name, src, dst, edges, undirected) = match parts.as_slice() {
            [n, s, d, e] => (n, s, d, e, false),
            [n, s, d, e, "undirected"] => (n, s, d, e, true),
            _ => {
                return Err(CliError::Usage(format!(
                    "--relation `{item}` is not NAME:SRC:DST:EDGES[:undirected]"
                )))
            }
        };
        let edges = edges
            .parse()
            .map_err(|_| CliError::Usage(format!("bad edge count in `{item}`")))?;
        let rel = SynthRelation::new(name, src, dst, edges);
        relations.push(if undirected { rel.undirected() } else { rel });
    }
    Ok(SynthSpec {
        types,
        relations,
        skew: args.skew,
        text: None,
        years: None,
        seed: args.seed,
    })
}

fn synth_text(text: &str) -> CliResult<SynthText> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Usage(format!("--text must be TYPE:FIELD:VOCAB:WORDS, got `{text}`"));
    match parts.as_slice() {
        [t, f, v, w] => Ok(SynthText {
            node_type: t.to_string(),
            field: f.to_string(),
            vocabulary: v.parse().map_err(|_| bad())?,
            words: w.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

pub fn synth(args: &SynthArgs, out: &mut dyn Write) -> CliResult {
    let bundle = match args.preset {
        Preset::Planted => {
            if args.years.is_some() || args.text.is_some() {
                return Err(CliError::Usage(
                    "--years and --text do not apply to the planted preset".into(),
                ));
            }
            planted_preset(args.seed)
        }
        Preset::Dblp | Preset::Custom => {
            let mut spec = if args.preset == Preset::Dblp {
                if !(args.scale > 0.0) {
                    return Err(CliError::Usage("--scale must be positive".into()));
                }
                SynthSpec::bibliographic(args.scale, args.seed)
            } else {
                custom_spec(args)?
            };
            if let Some(y) = &args.years {
                spec.years = Some(parse_pair(y, "--years")?);
            }
            if let Some(t) = &args.text {
                spec.text = Some(synth_text(t)?);
            }
            generate_synthetic_hin(&spec)?
        }
    };
    bundle.write(&args.out)?;
    let dataset = bundle.to_dataset()?;
    writeln!(out, "{}", summary_line(&dataset.hin))?;
    if !bundle.labels.is_empty() {
        writeln!(out, "labels: {}", bundle.labels.len())?;
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}
