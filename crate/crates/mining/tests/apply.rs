use fixline_lang::{generate_corpus, SynthSpec};
use fixline_mining::fixture::{bool_flip, java_class, FixtureRepo, BOOL_BUGGY, BOOL_CLEAN};
use fixline_mining::{apply_to_commit, Repo, Verdict};
use fixline_model::train::build_vocab;
use fixline_model::{Model, ModelConfig};
use tempfile::TempDir;

fn model() -> Model {
    let config = ModelConfig {
        d_model: 8,
        encoder_layers: 1,
        decoder_layers: 1,
        heads: 2,
        d_ff: 12,
        max_len: 128,
        max_decode_len: 16,
        ntn_slices: 2,
        fused_dim: 8,
        dropout: 0.0,
        init_range: 0.3,
    };
    let corpus = generate_corpus(&SynthSpec::default()).unwrap();
    Model::new(config, build_vocab(&corpus, 1).unwrap(), 3).unwrap()
}

#[test]
fn whitespace_only_commit_is_clean() {
    let dir = TempDir::new().unwrap();
    let mut r = FixtureRepo::init(dir.path()).unwrap();
    let class = java_class("Ready", &[BOOL_CLEAN]);
    r.commit("Add readiness", &[("Ready.java", Some(&class))]).unwrap();
    let c = r.commit("Reformat", &[("Ready.java", Some(&class.replace("done = true;", "done  =  true; // set")))]).unwrap();
    let repo = Repo::open(dir.path(), "ws").unwrap();
    let report = apply_to_commit(&repo, c, &model(), 2).unwrap();
    assert!(report.functions.is_empty());
    assert_eq!(report.verdict, Verdict::Clean);
    assert_eq!(report.rejected.len(), 1);
    assert_eq!(report.rejected[0].reason, "Unchanged");
}

#[test]
fn unparseable_and_foreign_files_are_rejected() {
    let dir = TempDir::new().unwrap();
    let mut r = FixtureRepo::init(dir.path()).unwrap();
    r.commit("Start", &[("Bad.java", Some("class Bad {\n  int f() { return 1; }\n}\n")), ("README", Some("hello\n"))]).unwrap();
    let c = r
        .commit("Break things", &[("Bad.java", Some("class Bad {\n  int f() { return \"1; }\n}\n")), ("README", Some("bye\n"))])
        .unwrap();
    let repo = Repo::open(dir.path(), "bad").unwrap();
    let report = apply_to_commit(&repo, c, &model(), 2).unwrap();
    assert!(report.functions.is_empty());
    assert_eq!(report.verdict, Verdict::Clean);
    let reasons: Vec<&str> = report.rejected.iter().map(|r| r.reason.as_str()).collect();
    assert_eq!(reasons.len(), 2);
    assert!(reasons[0].starts_with("Other("), "{reasons:?}");
    assert_eq!(reasons[1], "NotSource");
}

#[test]
fn changed_function_is_classified() {
    let dir = TempDir::new().unwrap();
    let fx = bool_flip(dir.path(), BOOL_CLEAN, BOOL_BUGGY, BOOL_CLEAN).unwrap();
    let repo = Repo::open(dir.path(), "ready").unwrap();
    let m = model();
    let report = apply_to_commit(&repo, fx.commits[1], &m, 2).unwrap();
    assert_eq!(report.commit, fx.commits[1].to_string());
    assert_eq!(report.functions.len(), 1);
    let f = &report.functions[0];
    assert_eq!((f.file.as_str(), f.name.as_str()), ("src/Ready.java", "isReady"));
    assert!((f.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(f.top3.len(), 3);
    assert_eq!(f.patch.is_some(), !f.label.is_clean());
    assert_eq!(f.patch_logprob.is_some(), f.patch.is_some());
    assert_eq!(report.verdict == Verdict::Buggy, !f.label.is_clean());
    let again = apply_to_commit(&repo, fx.commits[1], &m, 2).unwrap();
    assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
    // The root commit has nothing to compare against.
    let root = apply_to_commit(&repo, fx.commits[0], &m, 2).unwrap();
    assert!(root.functions.is_empty());
}
