//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit
//! if any fails. Tolerances are pinned as constants below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hetfs_core::baselines::{pathsim, simrank_power, SimRankConfig};
use hetfs_core::content::{ContentScoreTable, Tokenizer};
use hetfs_core::eval::{auc, classification_metrics, clustering_metrics, label_transfer_eval, LabeledNodes};
use hetfs_core::fixtures::{movie_graph, movie_titles, random_corpus, random_hin, regular_graph, RandomHinShape};
use hetfs_core::ingest::{generate_synthetic_hin, planted_preset, Dataset, SynthSpec};
use hetfs_core::pipeline::Precomputed;
use hetfs_core::weights::{compute_edge_contribution, CentralityConfig, CentralityTable};
use hetfs_core::{
    enumerate_symmetric_metapaths, hetfs_bruteforce, hetfs_montecarlo, hetfs_single_source, topk, Ablation, Hin,
    MetaPath, MetaPathSet, NodeId, QueryOptions, WeightModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ENGINE_TOL: f64 = 1e-9;
const ENGINE_GRAPHS: u64 = 50;
const ENGINE_BUDGET: Duration = Duration::from_secs(60);
const MC_WALKS: u64 = 200_000;
const MC_TRIALS: u64 = 40;
const MC_ABS: f64 = 0.01;
const MC_REL: f64 = 0.05;
const MC_PASS_RATE: f64 = 0.95;
const MC_BUDGET: Duration = Duration::from_secs(120);
const SIMRANK_TOL: f64 = 1e-9;
const MU_TOL: f64 = 1e-5;
const HETFS_TOL: f64 = 1e-9;
const LATENCY_MS: f64 = 50.0;
const SCALING_RATIO: f64 = 2.5;
const LATENCY_QUERIES: usize = 41;
const LATENCY_ROUNDS: usize = 3;
const PLANTED_MIN: f64 = 0.95;

type Outcome = Result<String, String>;

fn dense(scores: &[(NodeId, f64)], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &(v, s) in scores {
        out[v.index()] = s;
    }
    out
}

fn random_case(seed: u64) -> (Hin, Precomputed) {
    let g = random_hin(seed, RandomHinShape::default());
    let corpus = random_corpus(&g, seed ^ 0x5eed, "text", 0.5);
    let pre = Precomputed::build(&g, &[corpus], &Tokenizer::default(), &CentralityConfig::default()).unwrap();
    (g, pre)
}

fn all_paths(g: &Hin, max_len: usize) -> Vec<MetaPath> {
    g.schema()
        .types()
        .flat_map(|t| {
            enumerate_symmetric_metapaths(g.schema(), t, max_len)
                .unwrap()
                .paths()
                .to_vec()
        })
        .collect()
}

fn engine_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    let mut paths = 0usize;
    for seed in 0..ENGINE_GRAPHS {
        let (g, pre) = random_case(seed);
        let wm = pre.model(&g).unwrap();
        for p in all_paths(&g, 4) {
            paths += 1;
            let mps = MetaPathSet::single(g.schema(), p.clone()).unwrap();
            for &u in g.members(p.start()) {
                let row = dense(&hetfs_single_source(&wm, u, &mps).unwrap(), g.node_count());
                for &v in g.members(p.start()) {
                    let brute = hetfs_bruteforce(&wm, u, v, &mps).unwrap();
                    worst = worst.max((brute - row[v.index()]).abs());
                    pairs += 1;
                }
            }
        }
    }
    let took = start.elapsed();
    let detail = format!(
        "{ENGINE_GRAPHS} graphs, {paths} meta-paths, {pairs} pairs, max |brute - factorized| = {worst:.2e} (tol {ENGINE_TOL:e}), {:.1}s (budget {}s)",
        took.as_secs_f64(),
        ENGINE_BUDGET.as_secs()
    );
    if worst <= ENGINE_TOL && took <= ENGINE_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let movie = movie_graph();
    let movie_pre = Precomputed::build(
        &movie,
        &[movie_titles(&movie)],
        &Tokenizer::default(),
        &CentralityConfig::default(),
    )
    .unwrap();
    let randoms: Vec<(Hin, Precomputed)> = (100..110).map(random_case).collect();
    let mut cases: Vec<(&Hin, &Precomputed)> = vec![(&movie, &movie_pre)];
    cases.extend(randoms.iter().map(|(g, p)| (g, p)));

    let mut passed = 0;
    let mut worst = String::new();
    let mut worst_excess = f64::NEG_INFINITY;
    for trial in 0..MC_TRIALS {
        let (g, pre) = cases[(trial % cases.len() as u64) as usize];
        let wm = pre.model(g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        // a query node with at least one positive partner, paired with its
        // most similar partner under all symmetric paths up to length 4
        let candidates: Vec<(NodeId, MetaPathSet, NodeId, f64)> = g
            .schema()
            .types()
            .filter_map(|t| {
                let set = enumerate_symmetric_metapaths(g.schema(), t, 4).unwrap();
                (!set.is_empty()).then_some(set)
            })
            .flat_map(|set| {
                let wm = &wm;
                g.members(set.endpoint()).to_vec().into_iter().filter_map(move |u| {
                    let best = hetfs_single_source(wm, u, &set)
                        .unwrap()
                        .into_iter()
                        .filter(|&(v, s)| v != u && s > 0.0)
                        .max_by(|a, b| a.1.total_cmp(&b.1))?;
                    Some((u, set.clone(), best.0, best.1))
                })
            })
            .collect();
        let (u, set, v, exact) = &candidates[rng.random_range(0..candidates.len())];
        let est = hetfs_montecarlo(&wm, *u, *v, set, MC_WALKS, trial).unwrap();
        let tol = MC_ABS.max(MC_REL * exact);
        let err = (est - exact).abs();
        if err <= tol {
            passed += 1;
        }
        if err - tol > worst_excess {
            worst_excess = err - tol;
            worst = format!("trial {trial}: exact {exact:.5} est {est:.5}");
        }
    }
    let took = start.elapsed();
    let rate = passed as f64 / MC_TRIALS as f64;
    let detail = format!(
        "{passed}/{MC_TRIALS} trials within max({MC_ABS}, {}%) at {MC_WALKS} walks (need {:.0}%), closest call {worst}, {:.1}s (budget {}s)",
        MC_REL * 100.0,
        MC_PASS_RATE * 100.0,
        took.as_secs_f64(),
        MC_BUDGET.as_secs()
    );
    if rate >= MC_PASS_RATE && took <= MC_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn simrank_reduction() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for (n, d, seed) in [(20, 3, 1), (30, 3, 2), (40, 3, 3), (20, 4, 4), (30, 4, 5), (40, 4, 6)] {
        let g = regular_graph(n, d, seed);
        // χ ≡ α ≡ 1 and μ forced to 1
        let wm = WeightModel::unit(&g).with_ablation(Ablation::all());
        let nn = g.schema().resolve_step("NN").unwrap();
        let t = g.schema().type_id("N").unwrap();
        for depth in 1..=4 {
            let sr = simrank_power(
                &g,
                &SimRankConfig {
                    decay: 0.8,
                    iterations: depth,
                    tolerance: 0.0,
                },
            )
            .unwrap();
            let path = MetaPath::from_steps(g.schema(), t, vec![nn; 2 * depth]).unwrap();
            let mps = MetaPathSet::single(g.schema(), path).unwrap();
            for u in g.nodes() {
                let row = dense(&hetfs_single_source(&wm, u, &mps).unwrap(), n);
                for v in g.nodes() {
                    worst = worst.max((row[v.index()] - sr.score(u, v)).abs());
                    checked += 1;
                }
            }
        }
    }
    let detail = format!("3- and 4-regular graphs of 20-40 nodes, depth 1-4, {checked} pairs, max diff {worst:.2e} (tol {SIMRANK_TOL:e})");
    if worst <= SIMRANK_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spot_values() -> Outcome {
    let g = movie_graph();
    let cg = compute_edge_contribution(&g).unwrap();
    let mu_ma = cg.mu_by_name("MA").unwrap();
    let mu_md = cg.mu_by_name("MD").unwrap();
    let ma_closed = (4.0 / 6.0) * (6.0f64 / 5.0).ln();
    let md_closed = (2.0 / 6.0) * 2.0f64.ln();
    let (m1, m2) = (g.node("m1").unwrap(), g.node("m2").unwrap());
    let mam = MetaPath::parse("MAM", g.schema()).unwrap();
    let ps = pathsim(&g, m1, m2, &mam).unwrap();
    let n = g.node_count();
    let wm = WeightModel::new(
        &g,
        ContentScoreTable::uniform(n),
        CentralityTable::uniform(n),
        cg.clone(),
    )
    .unwrap();
    let mps = MetaPathSet::single(g.schema(), mam).unwrap();
    let s = hetfs_bruteforce(&wm, m1, m2, &mps).unwrap();
    let s_fact = dense(&hetfs_single_source(&wm, m1, &mps).unwrap(), n)[m2.index()];
    let expected = 0.8 * mu_ma / 4.0;

    let checks = [
        (
            (mu_ma - ma_closed).abs() <= MU_TOL,
            format!("mu_MA={mu_ma:.7} vs (4/6)ln(6/5)={ma_closed:.7}"),
        ),
        (
            (mu_md - md_closed).abs() <= MU_TOL,
            format!("mu_MD={mu_md:.7} vs (2/6)ln2={md_closed:.7}"),
        ),
        (ps == 2.0 / 3.0, format!("PathSim(m1,m2;MAM)={ps}")),
        (
            (s - expected).abs() <= HETFS_TOL && (s_fact - expected).abs() <= HETFS_TOL,
            format!("HetFS(m1,m2;MAM)={s:.9} vs 0.8*mu_MA/4={expected:.9}"),
        ),
    ];
    let mut detail: Vec<String> = checks.iter().map(|(_, d)| d.clone()).collect();
    // the five-digit target 0.12164 does not match the closed form; the
    // check uses the closed form and reports the gap
    detail.push(format!(
        "target 0.12164 differs from the closed form by {:.1e}",
        (0.12164 - ma_closed).abs()
    ));
    let detail = detail.join("; ");
    if checks.iter().all(|(ok, _)| *ok) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Median exact top-k latency in ms over random authors for each path, and
/// the edge count.
struct LatencyCase {
    dataset: Dataset,
    pre: Precomputed,
    queries: Vec<NodeId>,
}

fn latency_case(scale: f64) -> LatencyCase {
    let bundle = generate_synthetic_hin(&SynthSpec::bibliographic(scale, 11)).unwrap();
    let dataset = bundle.to_dataset().unwrap();
    let g = &dataset.hin;
    let pre = Precomputed::build(g, &[], &Tokenizer::default(), &CentralityConfig::default()).unwrap();
    let authors: Vec<NodeId> = g
        .members(g.schema().type_id("A").unwrap())
        .iter()
        .copied()
        .filter(|&a| g.total_degree(a) > 0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let queries = (0..LATENCY_QUERIES)
        .map(|_| authors[rng.random_range(0..authors.len())])
        .collect();
    LatencyCase { dataset, pre, queries }
}

fn latency() -> Outcome {
    let cases = [latency_case(1.0), latency_case(2.0)];
    let models: Vec<_> = cases.iter().map(|c| c.pre.model(&c.dataset.hin).unwrap()).collect();
    let opts = QueryOptions::default();
    let specs = ["APA", "APVPA", "APTPA"];
    // samples[scale][spec]
    let mut samples = vec![vec![Vec::new(); specs.len()]; cases.len()];
    for (j, spec) in specs.iter().enumerate() {
        let sets: Vec<MetaPathSet> = cases
            .iter()
            .map(|c| MetaPathSet::parse(spec, c.dataset.hin.schema()).unwrap())
            .collect();
        for (i, c) in cases.iter().enumerate() {
            // first query fills the per-path caches, as precompute would
            topk(&models[i], c.queries[0], &sets[i], &opts).unwrap();
        }
        // the two scales alternate query by query so machine noise hits both
        for _ in 0..LATENCY_ROUNDS {
            for q in 0..LATENCY_QUERIES {
                for (i, c) in cases.iter().enumerate() {
                    let t = Instant::now();
                    let r = topk(&models[i], c.queries[q], &sets[i], &opts).unwrap();
                    std::hint::black_box(r);
                    samples[i][j].push(t.elapsed().as_secs_f64() * 1e3);
                }
            }
        }
    }
    let medians: Vec<Vec<f64>> = samples
        .into_iter()
        .map(|per| per.into_iter().map(median).collect())
        .collect();
    let worst = medians[0].iter().copied().fold(0.0, f64::max);
    let total = |m: &[f64]| m.iter().sum::<f64>();
    let ratio = total(&medians[1]) / total(&medians[0]);
    let show = |c: &LatencyCase, m: &[f64]| {
        let parts: Vec<String> = specs.iter().zip(m).map(|(p, t)| format!("{p} {t:.2}ms")).collect();
        format!("m={}: {}", c.dataset.hin.edge_count(), parts.join(", "))
    };
    let detail = format!(
        "median {} (limit {LATENCY_MS}ms); {}; summed-median ratio {ratio:.2} (limit {SCALING_RATIO})",
        show(&cases[0], &medians[0]),
        show(&cases[1], &medians[1])
    );
    if worst <= LATENCY_MS && ratio <= SCALING_RATIO {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn metric_sanity() -> Outcome {
    let separable = auc(&[0.9, 0.8, 0.7], &[0.3, 0.2, 0.1]).unwrap();
    let constant = auc(&[0.5; 4], &[0.5; 6]).unwrap();
    let labels = ["x", "x", "y", "z", "z", "y"];
    let same = clustering_metrics(&labels, &labels).unwrap();
    let pred = vec![Some("pos"); 4];
    let truth = vec![Some("pos"), Some("pos"), None, None];
    let micro = classification_metrics(&pred, &truth).unwrap().micro_f1;
    let detail = format!(
        "AUC separable={separable} constant={constant}; NMI={} ARI={} on identical labels; micro-F1={micro}",
        same.nmi, same.ari
    );
    if separable == 1.0 && constant == 0.5 && same.nmi == 1.0 && same.ari == 1.0 && micro == 2.0 / 3.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn planted_recovery() -> Outcome {
    let mut results = Vec::new();
    for seed in [21, 22, 23] {
        let bundle = planted_preset(seed);
        let d = bundle.to_dataset().unwrap();
        let pre = Precomputed::build(&d.hin, &[], &Tokenizer::default(), &CentralityConfig::default()).unwrap();
        let wm = pre.model(&d.hin).unwrap();
        let labels = LabeledNodes::new(&d.hin, &bundle.labels).unwrap();
        let (train, test) = labels.split(0.1, seed).unwrap();
        let r = label_transfer_eval(&wm, &train, &test, 4).unwrap();
        results.push((seed, r.accuracy, r.labeled, r.targets));
    }
    let detail = results
        .iter()
        .map(|(s, a, l, t)| format!("seed {s}: {a:.3} ({l} seeds, {t} targets)"))
        .collect::<Vec<_>>()
        .join("; ");
    let detail = format!("2-block planted network of 200 authors, 10% labelled: {detail} (need {PLANTED_MIN})");
    if results.iter().all(|r| r.1 >= PLANTED_MIN) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Drop lines that carry wall-clock timings.
fn untimed(text: &[u8]) -> String {
    String::from_utf8_lossy(text)
        .lines()
        .filter(|l| !l.contains("_ms"))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn run_cli(args: &[String], stdin: Option<&str>) -> Result<String, String> {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_hetfs"))
        .env_clear()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(format!("{}--stderr--\n{}", untimed(&out.stdout), untimed(&out.stderr)))
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| dir.path().join(s).display().to_string();
    let (bib, bib_store, planted, planted_store, custom) =
        (p("bib"), p("bib-store"), p("planted"), p("planted-store"), p("custom"));
    let on = |data: &str, store: &str, rest: &[&str]| -> Vec<String> {
        ["--data", data, "--store", store]
            .iter()
            .chain(rest)
            .map(|s| s.to_string())
            .collect()
    };
    let strs = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let script = "a0 APA,APVPA\n\\k 3\na1 --free 4\n\\mode off\nnobody APA\na0 APTPA\n\\quit\n";
    let steps: Vec<(Vec<String>, Option<&str>)> = vec![
        (
            strs(&[
                "synth",
                "--preset",
                "dblp",
                "--scale",
                "0.02",
                "--seed",
                "3",
                "--years",
                "2000:2015",
                "--text",
                "P:title:400:8",
                "--out",
                &bib,
            ]),
            None,
        ),
        (on(&bib, &bib_store, &["ingest"]), None),
        (on(&bib, &bib_store, &["precompute"]), None),
        (on(&bib, &bib_store, &["query", "a0", "--mp", "APA,APVPA"]), None),
        (
            on(&bib, &bib_store, &["query", "a0", "--free", "4", "--json", "-k", "20"]),
            None,
        ),
        (
            on(
                &bib,
                &bib_store,
                &[
                    "query",
                    "a0",
                    "--mp",
                    "APA",
                    "--engine",
                    "mc",
                    "--walks",
                    "20000",
                    "--seed",
                    "9",
                    "--content-mode",
                    "pair",
                ],
            ),
            None,
        ),
        (on(&bib, &bib_store, &["repl"]), Some(script)),
        (on(&bib, &bib_store, &["contribution", "--set", "PT=0.05"]), None),
        (
            on(
                &bib,
                &bib_store,
                &["eval", "linkpred", "--relation", "AP", "--split", "time:2012"],
            ),
            None,
        ),
        (
            on(
                &bib,
                &bib_store,
                &[
                    "eval",
                    "linkpred",
                    "--relation",
                    "AP",
                    "--split",
                    "random:0.8",
                    "--scorer",
                    "random",
                ],
            ),
            None,
        ),
        (
            strs(&["synth", "--preset", "planted", "--seed", "2", "--out", &planted]),
            None,
        ),
        (on(&planted, &planted_store, &["ingest"]), None),
        (on(&planted, &planted_store, &["precompute"]), None),
        (on(&planted, &planted_store, &["eval", "classify"]), None),
        (on(&planted, &planted_store, &["eval", "cluster"]), None),
        (
            strs(&[
                "synth",
                "--preset",
                "custom",
                "--types",
                "X=40,Y=30",
                "--relation",
                "XY:X:Y:120",
                "--relation",
                "XX:X:X:50:undirected",
                "--skew",
                "0.7",
                "--seed",
                "8",
                "--out",
                &custom,
            ]),
            None,
        ),
    ];
    let run_all = || -> Result<Vec<String>, String> { steps.iter().map(|(a, s)| run_cli(a, *s)).collect() };
    let first = run_all()?;
    let second = run_all()?;
    let differing: Vec<String> = steps
        .iter()
        .zip(first.iter().zip(&second))
        .filter(|(_, (a, b))| a != b)
        .map(|((args, _), _)| {
            args.iter()
                .find(|a| !a.starts_with('-') && !a.contains('/'))
                .cloned()
                .unwrap_or_default()
        })
        .collect();
    let tables = ["alpha.tsv", "mu.tsv", "chi.tsv", "tfidf.tsv", "graph.snap"];
    for t in tables {
        if !Path::new(&bib_store).join(t).exists() {
            return Err(format!("missing {t} in the store"));
        }
    }
    let detail = format!(
        "{} commands (synth, ingest, precompute, query exact/json/mc, repl, contribution, eval linkpred/classify/cluster) run twice, timing lines excluded",
        steps.len()
    );
    if differing.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; differing: {}", differing.join(", ")))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("engine agreement", engine_agreement),
        ("Monte-Carlo correctness", monte_carlo),
        ("SimRank reduction", simrank_reduction),
        ("formula spot-values", spot_values),
        ("query latency", latency),
        ("metric sanity", metric_sanity),
        ("planted-partition recovery", planted_recovery),
        ("reproducibility", reproducibility),
    ];
    // `cargo test --test acceptance -- 2 5` runs only the listed criteria
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {}: {name}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} of {ran} criteria failed");
        std::process::exit(1);
    }
    println!("all {ran} criteria passed");
}
