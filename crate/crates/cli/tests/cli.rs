use std::collections::BTreeSet;
use std::path::Path;

use fixline_cli::config::KEYS;
use fixline_cli::{load_config, run, ConfigError, Settings, SplitName};
use fixline_mining::fixture::{bool_flip, java_class, FixtureRepo, BOOL_BUGGY, BOOL_CLEAN};
use tempfile::TempDir;

fn fixline(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("fixline").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TINY: &[&str] = &[
    "--set", "d_model=16", "--set", "heads=2", "--set", "d_ff=32", "--set", "encoder_layers=1", "--set", "decoder_layers=1",
    "--set", "ntn_slices=2", "--set", "fused_dim=16", "--set", "max_epochs=2", "--set", "batch_size=8",
];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn call(args: &[String]) -> (i32, String, String) {
    fixline(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn empty_config_gives_defaults() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.toml");
    std::fs::write(&path, "").unwrap();
    assert_eq!(load_config(Some(&path), &[]).unwrap(), Settings::default());
    let d = Settings::default();
    assert_eq!((d.batch_size, d.max_epochs, d.beam_width, d.d_model), (32, 50, 10, 64));
    assert_eq!(d.ratios(), [0.8, 0.1, 0.1]);
}

#[test]
fn overrides_take_precedence_over_the_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "batch_size = 4\nlearning_rate = 0.01\neval_split = \"train\"\n").unwrap();
    let s = load_config(Some(&path), &["batch_size=8".into(), "stop_exact_match=0.9".into()]).unwrap();
    assert_eq!(s.batch_size, 8);
    assert_eq!(s.learning_rate, 0.01);
    assert_eq!(s.eval_split, SplitName::Train);
    assert_eq!(s.stop_exact_match, Some(0.9));
    assert_eq!(load_config(None, &["learning_rate=1".into()]).unwrap().learning_rate, 1.0);
    assert_eq!(load_config(None, &["checkpoint_dtype=f32".into()]).unwrap().checkpoint_dtype, fixline_tensor::Dtype::F32);
}

#[test]
fn unknown_keys_name_the_nearest_key() {
    match load_config(None, &["batchsize=8".into()]) {
        Err(ConfigError::UnknownKey { key, nearest }) => assert_eq!((key.as_str(), nearest.as_str()), ("batchsize", "batch_size")),
        other => panic!("{other:?}"),
    }
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "dmodel = 3\n").unwrap();
    let err = load_config(Some(&path), &[]).unwrap_err().to_string();
    assert!(err.contains("dmodel") && err.contains("d_model"), "{err}");
    assert!(matches!(load_config(None, &["seed".into()]), Err(ConfigError::BadOverride(_))));
    assert!(matches!(load_config(None, &["batch_size=lots".into()]), Err(ConfigError::Invalid(_))));
    assert!(matches!(load_config(None, &["split_test=0.5".into()]), Err(ConfigError::Invalid(_))));
    assert!(matches!(load_config(None, &["heads=3".into()]), Err(ConfigError::Invalid(_))));
}

#[test]
fn key_list_matches_the_settings() {
    let s = Settings { stop_label_accuracy: Some(0.5), stop_exact_match: Some(0.5), ..Settings::default() };
    let table: toml::Table = toml::from_str(&s.to_toml()).unwrap();
    let fields: BTreeSet<&str> = table.keys().map(String::as_str).collect();
    assert_eq!(fields, KEYS.iter().copied().collect());
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, s.to_toml()).unwrap();
    assert_eq!(load_config(Some(&path), &[]).unwrap(), s);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(fixline(&[]).0, 1);
    assert_eq!(fixline(&["frobnicate"]).0, 1);
    let (code, out, _) = fixline(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("predict"));
    assert_eq!(fixline(&["eval", "--data", "x.jsonl"]).0, 1);
    assert_eq!(fixline(&["train", "--data", "x.jsonl"]).0, 1);
    assert_eq!(fixline(&["synth", "--set", "batchsize=3"]).0, 1);
    assert_eq!(fixline(&["predict", "--repo", "."]).0, 1);
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let (code, _, err) = fixline(&["train", "--data", p(&missing), "--out", p(&dir.path().join("m.ckpt"))]);
    assert_eq!(code, 2, "{err}");
    assert_eq!(fixline(&["predict", "--repo", p(dir.path()), "--ckpt", p(&missing)]).0, 2);
}

#[test]
fn malformed_triples_are_validation_errors() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("bad.jsonl");
    std::fs::write(&data, "{\"id\": 1}\n").unwrap();
    let (code, _, err) = fixline(&["train", "--data", p(&data), "--out", p(&dir.path().join("m.ckpt"))]);
    assert_eq!(code, 1);
    assert!(err.contains("bad.jsonl:1"), "{err}");
}

#[test]
fn synth_is_seeded_and_reproducible() {
    let (a, b, c) = (fixline(&["synth"]), fixline(&["synth"]), fixline(&["synth", "--seed", "3"]));
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    assert_ne!(a.1, c.1);
    assert_eq!(a.1.lines().count(), 32);
    let (_, more, _) = fixline(&["synth", "--set", "synth_count_per_label=2"]);
    assert_eq!(more.lines().count(), 64);
}

#[test]
fn repair_eval_of_the_references_is_perfect() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("c.jsonl");
    assert_eq!(fixline(&["synth", "--out", p(&data)]).0, 0);
    let triples: Vec<fixline_lang::FunctionTriple> =
        std::fs::read_to_string(&data).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let cands: String =
        triples.iter().filter(|t| !t.label.is_clean()).map(|t| serde_json::to_string(&t.fixed_src).unwrap() + "\n").collect();
    let cpath = dir.path().join("cands.jsonl");
    std::fs::write(&cpath, cands).unwrap();
    let (code, out, err) =
        fixline(&["eval", "--task", "repair", "--data", p(&data), "--candidates", p(&cpath), "--set", "eval_split=all"]);
    assert_eq!(code, 0, "{err}");
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!((r["bleu"].as_f64(), r["accuracy"].as_f64(), r["examples"].as_u64()), (Some(1.0), Some(1.0), Some(16)));
    assert!(err.contains("BLEU") && err.contains("Accuracy"));

    std::fs::write(&cpath, "\"int f() { return 1; }\"\n").unwrap();
    assert_eq!(fixline(&["eval", "--task", "repair", "--data", p(&data), "--candidates", p(&cpath), "--set", "eval_split=all"]).0, 1);
}

#[test]
fn train_eval_and_predict() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("c.jsonl");
    let ckpt = dir.path().join("m.ckpt");
    assert_eq!(fixline(&["synth", "--out", p(&data)]).0, 0);
    let (code, out, err) = call(&with(&["train", "--data", p(&data), "--out", p(&ckpt)], TINY));
    assert_eq!(code, 0, "{err}");
    let summary: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(summary["epochs"], 2);
    let log = std::fs::read_to_string(dir.path().join("m.ckpt.log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    let saved = dir.path().join("m.ckpt.config.toml");
    assert_eq!(load_config(Some(&saved), &[]).unwrap().d_model, 16);

    let eval = |task: &str| fixline(&["eval", "--task", task, "--data", p(&data), "--ckpt", p(&ckpt), "--set", "eval_split=all", "--beam-width", "2"]);
    for task in ["identify", "classify", "repair"] {
        let (code, first, err) = eval(task);
        assert_eq!(code, 0, "{task}: {err}");
        assert_eq!(first, eval(task).1, "{task} is not reproducible");
        let r: serde_json::Value = serde_json::from_str(&first).unwrap();
        assert_eq!(r["task"], task);
    }
    let (_, classify, _) = eval("classify");
    let r: serde_json::Value = serde_json::from_str(&classify).unwrap();
    assert!(r["f1"].is_number() && r["auc_ovr"].is_number() && r["auc_ovo"].is_number());

    // A commit that only reformats is clean.
    let repo = dir.path().join("ws");
    let mut fx = FixtureRepo::init(&repo).unwrap();
    let class = java_class("Ready", &[BOOL_CLEAN]);
    fx.commit("Add readiness", &[("Ready.java", Some(&class))]).unwrap();
    fx.commit("Reformat", &[("Ready.java", Some(&class.replace("done = true;", "done  =  true;")))]).unwrap();
    let (code, out, err) = fixline(&["predict", "--repo", p(&repo), "--ckpt", p(&ckpt)]);
    assert_eq!(code, 0, "{err}");
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["verdict"], "clean");
    assert_eq!(r["functions"].as_array().unwrap().len(), 0);

    let flip = dir.path().join("flip");
    let f = bool_flip(&flip, BOOL_CLEAN, BOOL_BUGGY, BOOL_CLEAN).unwrap();
    let rev = f.commits[1].to_string();
    let run = || fixline(&["predict", "--repo", p(&flip), "--ckpt", p(&ckpt), "--commit", &rev, "--beam-width", "2"]);
    let (code, first, err) = run();
    assert_eq!(code, 0, "{err}");
    assert_eq!(first, run().1);
    let r: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(r["functions"][0]["name"], "isReady");
    assert_eq!(r["verdict"] == "buggy", r["functions"][0]["label"] != "CLEAN");
    assert_eq!(fixline(&["predict", "--repo", p(&flip), "--ckpt", p(&ckpt), "--commit", "nope"]).0, 1);
}

#[test]
fn mine_writes_triples_and_a_histogram() {
    let root = TempDir::new().unwrap();
    bool_flip(&root.path().join("ready"), BOOL_CLEAN, BOOL_BUGGY, BOOL_CLEAN).unwrap();
    let manifest = root.path().join("repos.txt");
    std::fs::write(&manifest, "ready\n").unwrap();
    let (code, out, err) = fixline(&["mine", "--data", p(&manifest)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("CHANGE_BOOLEAN_LITERAL"));
    assert!(err.contains("NewFunction") && err.contains("ready"), "{err}");
    assert_eq!(fixline(&["mine", "--data", p(&manifest)]).1, out);

    std::fs::write(&manifest, "ready\nmissing\n").unwrap();
    let target = root.path().join("t.jsonl");
    let (code, _, err) = fixline(&["mine", "--data", p(&manifest), "--out", p(&target)]);
    assert_eq!(code, 2);
    assert!(err.contains("missing"), "{err}");
    assert_eq!(std::fs::read_to_string(&target).unwrap(), out);
    std::fs::write(&manifest, "https://example.com/r.git\n").unwrap();
    assert_eq!(fixline(&["mine", "--data", p(&manifest)]).0, 1);
}

#[test]
fn gradcheck_passes() {
    let (code, out, _) = fixline(&["gradcheck"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS"), "{out}");
}
