use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn movies() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/movies")
}

fn hetfs(args: &[&str], env: &[(&str, &str)], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hetfs"));
    cmd.env_clear().args(args).envs(env.iter().copied());
    cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("binary runs");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = hetfs(args, &[], None);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

/// Ingest and precompute the movie graph into a fresh store.
fn prepared() -> (tempfile::TempDir, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let data = movies().display().to_string();
    let store = dir.path().join("store").display().to_string();
    ok(&["--data", &data, "--store", &store, "ingest"]);
    ok(&["--data", &data, "--store", &store, "precompute"]);
    (dir, data, store)
}

#[test]
fn ingest_prints_counts_and_stable_digest() {
    let dir = tempfile::tempdir().unwrap();
    let data = movies().display().to_string();
    let store = dir.path().display().to_string();
    let first = ok(&["--data", &data, "--store", &store, "ingest"]);
    assert!(first.starts_with("nodes: M=3 A=2 D=1; edges: MA=4 MD=2\n"), "{first}");
    let digest = |s: &str| s.lines().last().unwrap().split("sha256=").nth(1).unwrap().to_owned();
    let second = ok(&["--data", &data, "--store", &store, "ingest"]);
    assert_eq!(digest(&first).len(), 64);
    assert_eq!(digest(&first), digest(&second));
}

#[test]
fn centrality_rerun_leaves_other_tables_untouched() {
    let (_dir, data, store) = prepared();
    let read = |f: &str| std::fs::read(Path::new(&store).join(f)).unwrap();
    let (alpha, mu, chi, tfidf) = (read("alpha.tsv"), read("mu.tsv"), read("chi.tsv"), read("tfidf.tsv"));
    ok(&["--data", &data, "--store", &store, "precompute", "--node-decay", "0.5"]);
    assert_ne!(alpha, read("alpha.tsv"));
    assert_eq!(mu, read("mu.tsv"));
    assert_eq!(chi, read("chi.tsv"));
    assert_eq!(tfidf, read("tfidf.tsv"));
}

#[test]
fn relation_touching_every_node_warns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("schema.json"),
        r#"{"node_types":["X","Y"],"relations":[{"name":"XY","src":"X","dst":"Y"}]}"#,
    )
    .unwrap();
    std::fs::write(d.join("nodes.tsv"), "id\ttype\nx1\tX\nx2\tX\ny1\tY\n").unwrap();
    std::fs::write(d.join("edges.tsv"), "src\tdst\trelation\nx1\ty1\tXY\nx2\ty1\tXY\n").unwrap();
    let store = d.join("store").display().to_string();
    let data = d.display().to_string();
    ok(&["--data", &data, "--store", &store, "ingest"]);
    let o = hetfs(&["--data", &data, "--store", &store, "precompute"], &[], None);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("μ=0 for XY"));
}

#[test]
fn query_tsv_and_json() {
    let (_dir, data, store) = prepared();
    let tsv = ok(&["--data", &data, "--store", &store, "query", "m1", "--mp", "MAM,MDM"]);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines[0], "# query=m1 metapaths=MAM,MDM engine=exact k=10");
    assert_eq!(lines[1], "rank\tnode_id\tscore");
    assert!(lines[2].starts_with("1\tm2\t"));
    assert!(lines.last().unwrap().starts_with("# elapsed_ms="));

    let json = ok(&[
        "--data", &data, "--store", &store, "query", "m1", "--free", "4", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["metapaths"].as_array().unwrap().len(), 4);
    assert_eq!(v["results"][0]["node"], "m2");
    assert!(v["elapsed_ms"].is_number());
}

#[test]
fn pairwise_content_needs_monte_carlo() {
    let (_dir, data, store) = prepared();
    let args = [
        "--data",
        &data,
        "--store",
        &store,
        "query",
        "m1",
        "--mp",
        "MAM",
        "--content-mode",
        "pair",
    ];
    let o = hetfs(&args, &[], None);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--engine mc"));
    let mut mc = args.to_vec();
    mc.extend(["--engine", "mc", "--walks", "20000", "--seed", "1"]);
    let out = ok(&mc);
    assert!(out.contains("engine=mc"));
}

#[test]
fn flags_override_environment_override_file() {
    let (dir, data, store) = prepared();
    let conf = dir.path().join("hetfs.conf");
    std::fs::write(&conf, format!("data = {data}\nstore = {store}\nk = 1\nepsilon = 0\n")).unwrap();
    let conf = conf.display().to_string();
    let rows = |o: Output| {
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .count()
            - 1
    };
    let q = ["--config", &conf, "query", "m1", "--free", "4"];
    assert_eq!(rows(hetfs(&q, &[], None)), 1);
    assert_eq!(rows(hetfs(&q, &[("HETFS_K", "2")], None)), 2);
    let mut flagged = q.to_vec();
    flagged.extend(["-k", "1"]);
    assert_eq!(rows(hetfs(&flagged, &[("HETFS_K", "2")], None)), 1);
    // the config file can also come from the environment
    assert_eq!(rows(hetfs(&q[2..], &[("HETFS_CONFIG", &conf)], None)), 1);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "k = 3\nwalkz = 10\n").unwrap();
    let o = hetfs(&["--config", &conf.display().to_string(), "ingest"], &[], None);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.conf:2: unknown config key `walkz`"), "{err}");
    let o = hetfs(&["ingest"], &[("HETFS_WALKZ", "1")], None);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown config key `walkz`"));
}

#[test]
fn repl_survives_errors_and_reuses_the_graph() {
    let (_dir, data, store) = prepared();
    let script = "m1 MAM\nnobody MAM\nm1 MXM\n\\bogus\n\\k 1\n\\mode off\nm2 --free 2\n\\quit\nm3 MAM\n";
    let o = hetfs(&["--data", &data, "--store", &store, "repl"], &[], Some(script));
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 3, "{err}");
    assert!(err.contains("unknown node `nobody`"));
    let loads: Vec<&str> = out.lines().filter(|l| l.starts_with("# load_ms=")).collect();
    assert_eq!(loads.len(), 2);
    assert_eq!(loads[1], "# load_ms=0.000");
    assert!(out.contains("# query=m2 metapaths=MAM,MDM engine=exact k=1"));
    // nothing after \quit runs
    assert!(!out.contains("query=m3"));
}

#[test]
fn contribution_dot_with_override() {
    let (_dir, data, store) = prepared();
    let dot = ok(&["--data", &data, "--store", &store, "contribution"]);
    assert!(dot.contains("M -> A [label=\"0.12\"];"));
    assert!(dot.contains("M -> D [label=\"0.23\"];"));
    let dot = ok(&["--data", &data, "--store", &store, "contribution", "--set", "MD=0.5"]);
    assert!(dot.contains("M -> D [label=\"0.50\"];"));
    let o = hetfs(
        &["--data", &data, "--store", &store, "contribution", "--set", "MD=-1"],
        &[],
        None,
    );
    assert!(!o.status.success());
}

#[test]
fn synthetic_link_prediction_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data").display().to_string();
    let store = dir.path().join("store").display().to_string();
    let synth = ok(&[
        "synth",
        "--preset",
        "custom",
        "--out",
        &data,
        "--seed",
        "5",
        "--types",
        "A=60,P=80,V=4",
        "--relation",
        "AP:A:P:240",
        "--relation",
        "PV:P:V:80",
        "--skew",
        "0.5",
        "--years",
        "2000:2010",
    ]);
    assert!(
        synth.starts_with("nodes: A=60 P=80 V=4; edges: AP=240 PV=80"),
        "{synth}"
    );
    ok(&["--data", &data, "--store", &store, "ingest"]);
    for scorer in ["hetfs", "random"] {
        let out = ok(&[
            "--data",
            &data,
            "--store",
            &store,
            "eval",
            "linkpred",
            "--relation",
            "AP",
            "--split",
            "time:2007",
            "--scorer",
            scorer,
            "--max-len",
            "4",
        ]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let auc = v["auc"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&auc), "{out}");
        assert!(v["positives"].as_u64().unwrap() > 0);
    }
}

#[test]
fn planted_labels_classify_and_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data").display().to_string();
    let store = dir.path().join("store").display().to_string();
    let synth = ok(&["synth", "--preset", "planted", "--out", &data, "--seed", "2"]);
    assert!(synth.contains("labels: 200"), "{synth}");
    ok(&["--data", &data, "--store", &store, "ingest"]);
    ok(&["--data", &data, "--store", &store, "precompute"]);
    let out = ok(&["--data", &data, "--store", &store, "eval", "classify"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["accuracy"].as_f64().unwrap() >= 0.9, "{out}");
    let out = ok(&["--data", &data, "--store", &store, "eval", "cluster"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["nmi"].as_f64().unwrap() > 0.5, "{out}");
}
