use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_triplescore"));
    c.env_remove("TRIPLESCORE_CONFIG").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small_world(dir: &Path) -> String {
    let w = dir.join("world");
    ok(&["generate-world", "--out", w.to_str().unwrap(), "--persons", "120", "--seed", "4"]);
    let cfg = w.join("config.toml");
    // Keep the forest small so the tests stay quick.
    let text = std::fs::read_to_string(&cfg).unwrap().replace("n_trees = 300", "n_trees = 20");
    std::fs::write(&cfg, text).unwrap();
    cfg.to_str().unwrap().to_string()
}

#[test]
fn evaluate_identical_files_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.tsv");
    std::fs::write(&p, "Ann\tActor\t7\nAnn\tSinger\t2\nBob\tActor\t0\n").unwrap();
    let p = p.to_str().unwrap();
    let out = ok(&["evaluate", "--pred", p, "--gold", p, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["acc"], 1.0);
    assert_eq!(v["asd"], 0.0);
}

#[test]
fn score_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_world(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&["score", "wordmle", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap()]);
    }
    for rel in ["profession", "nationality"] {
        let fa = std::fs::read(a.join(rel).join("wordmle.scores.tsv")).unwrap();
        let fb = std::fs::read(b.join(rel).join("wordmle.scores.tsv")).unwrap();
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{rel}");
    }
}

#[test]
fn saved_pathrank_model_scores_like_the_fresh_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_world(dir.path());
    let trained = dir.path().join("trained");
    let fresh = dir.path().join("fresh");
    let t = trained.to_str().unwrap();
    let common = ["--config", &cfg, "--relation", "nationality"];
    ok(&[&["train", "pathrank", "--out", t][..], &common].concat());
    let model = trained.join("nationality").join("pathrank.model.json");
    let first = std::fs::read(&model).unwrap();
    ok(&[&["score", "pathrank", "--out", t][..], &common].concat());
    // no saved model here, so this one trains in memory
    ok(&[&["score", "pathrank", "--out", fresh.to_str().unwrap()][..], &common].concat());
    assert_eq!(std::fs::read(&model).unwrap(), first);
    let a = std::fs::read(trained.join("nationality").join("pathrank.scores.tsv")).unwrap();
    let b = std::fs::read(fresh.join("nationality").join("pathrank.scores.tsv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stages_compose_into_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_world(dir.path());
    let staged = dir.path().join("staged");
    let whole = dir.path().join("whole");
    let s = staged.to_str().unwrap();
    ok(&["ingest", "--config", &cfg, "--out", s]);
    assert!(staged.join("ingest.json").exists());
    for scorer in ["wordclass", "wordcount", "wordmle", "pathrank"] {
        ok(&["train", scorer, "--config", &cfg, "--out", s]);
        ok(&["score", scorer, "--config", &cfg, "--out", s]);
    }
    ok(&["ensemble", "--config", &cfg, "--out", s]);
    ok(&["refine", "--config", &cfg, "--out", s]);
    ok(&["pipeline", "--config", &cfg, "--out", whole.to_str().unwrap(), "--jobs", "2"]);
    for rel in ["profession", "nationality"] {
        for f in [
            "predictions.tsv",
            "ensemble_unrefined.tsv",
            "twd_alone.tsv",
            "wordmle.scores.tsv",
            "pathrank.model.json",
        ] {
            let a = std::fs::read(staged.join(rel).join(f)).unwrap();
            let b = std::fs::read(whole.join(rel).join(f)).unwrap();
            assert_eq!(a, b, "{rel}/{f}");
        }
    }
    let gold = dir.path().join("world").join("profession.test");
    let pred = whole.join("profession").join("predictions.tsv");
    let out = ok(&["evaluate", "--pred", pred.to_str().unwrap(), "--gold", gold.to_str().unwrap()]);
    assert!(out.contains("ACC"));
}

#[test]
fn abstentions_are_written_as_a_token() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_world(dir.path());
    let out = dir.path().join("o");
    ok(&[
        "score",
        "pathrank",
        "--config",
        &cfg,
        "--relation",
        "profession",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out.join("profession").join("pathrank.scores.tsv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split('\t').count() == 5));
    // persons with fewer than 4 KB professions are abstained on
    assert!(text.contains("\tABSTAIN\tABSTAIN"));
}

#[test]
fn errors_exit_nonzero() {
    let unknown_flag = run(&["pipeline", "--no-such-flag"]);
    assert!(!unknown_flag.status.success());
    assert!(String::from_utf8_lossy(&unknown_flag.stderr).contains("Usage"));

    assert!(!run(&["frobnicate"]).status.success());

    let missing = run(&["evaluate", "--pred", "/nonexistent/p.tsv", "--gold", "/nonexistent/g.tsv"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/p.tsv"));

    let no_config = run(&["pipeline"]);
    assert!(!no_config.status.success());
    assert!(String::from_utf8_lossy(&no_config.stderr).contains("TRIPLESCORE_CONFIG"));
}

#[test]
fn missing_input_fails_without_leaving_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_world(dir.path());
    std::fs::remove_file(dir.path().join("world").join("kg.tsv")).unwrap();
    let out = dir.path().join("o");
    let r = run(&["pipeline", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!r.status.success());
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("kg.tsv") && err.contains("ingest"), "{err}");
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_world(dir.path());
    let out = dir.path().join("o");
    let r = bin()
        .args(["ingest", "--out", out.to_str().unwrap()])
        .env("TRIPLESCORE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
}
