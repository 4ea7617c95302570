use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use fixline_lang::{generate_corpus, DefectLabel, FunctionTriple};
use fixline_mining::{apply_to_commit, mine_all, parse_manifest, write_jsonl, Repo, Verdict};
use fixline_model::train::{build_vocab, joint_grad_check, make_example};
use fixline_model::{stratified_split, train_model, DatasetSplit, Model, ModelConfig};
use fixline_tensor::{Checkpoint, GradCheckOptions};

use crate::config::{Settings, SplitName};
use crate::{invalid, Cli};

pub(crate) fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a Path> {
    value.as_deref().ok_or_else(|| invalid(format!("--{flag} is required for this command")))
}

/// Writes through `f` to `path`, or to `out` when no path is given.
fn emit(path: Option<&Path>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => f(out)?,
    }
    Ok(())
}

pub(crate) fn read_triples(path: &Path) -> anyhow::Result<Vec<FunctionTriple>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut triples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: FunctionTriple =
            serde_json::from_str(line).map_err(|e| invalid(format!("{}:{}: not a triple: {e}", path.display(), i + 1)))?;
        t.validate().map_err(|e| invalid(format!("{}:{}: triple {}: {e}", path.display(), i + 1, t.id)))?;
        triples.push(t);
    }
    Ok(triples)
}

pub(crate) fn load_model(path: &Path) -> anyhow::Result<Model> {
    let ck = Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
    Ok(Model::from_checkpoint(ck)?)
}

pub(crate) fn split(triples: &[FunctionTriple], settings: &Settings) -> anyhow::Result<DatasetSplit> {
    Ok(stratified_split(triples, settings.ratios(), settings.seed)?)
}

pub(crate) fn pick(split: DatasetSplit, which: SplitName) -> Vec<FunctionTriple> {
    match which {
        SplitName::Train => split.train,
        SplitName::Validation => split.validation,
        SplitName::Test => split.test,
        SplitName::All => [split.train, split.validation, split.test].concat(),
    }
}

pub fn mine(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let manifest = required(&cli.data, "data")?;
    let text = std::fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text, base)?;
    let reports = mine_all(&entries);
    let triples: Vec<FunctionTriple> = reports.iter().flat_map(|r| r.triples.iter().cloned()).collect();
    emit(cli.out.as_deref(), out, |w| Ok(write_jsonl(&triples, w)?))?;

    writeln!(err, "{:<24} {:>8} {:>8} {:>8} {:>8}", "repository", "commits", "fixing", "hunks", "triples")?;
    for r in &reports {
        writeln!(err, "{:<24} {:>8} {:>8} {:>8} {:>8}", r.name, r.commits, r.bug_fixing_commits, r.hunks, r.triples.len())?;
        for (reason, n) in &r.rejected {
            writeln!(err, "    {reason:<20} {n:>8}")?;
        }
    }
    let failed: Vec<String> = reports.iter().filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.name))).collect();
    if !failed.is_empty() {
        anyhow::bail!("{} of {} repositories failed:\n  {}", failed.len(), reports.len(), failed.join("\n  "));
    }
    Ok(0)
}

pub fn synth(cli: &Cli, settings: &Settings, out: &mut dyn Write) -> anyhow::Result<i32> {
    let corpus = generate_corpus(&settings.synth_spec())?;
    emit(cli.out.as_deref(), out, |w| Ok(write_jsonl(&corpus, w)?))?;
    Ok(0)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn train(cli: &Cli, settings: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let data = required(&cli.data, "data")?;
    let ckpt = required(&cli.out, "out")?;
    let triples = read_triples(data)?;
    let split = split(&triples, settings)?;
    let cfg = settings.train_config();
    let mut log_lines = String::new();
    let outcome = train_model(&cfg, &split, |r| {
        let line = serde_json::to_string(r).expect("epoch records serialize");
        log::info!("{line}");
        log_lines.push_str(&line);
        log_lines.push('\n');
    })?;
    outcome.model.to_checkpoint().save(ckpt, settings.checkpoint_dtype).with_context(|| format!("writing {}", ckpt.display()))?;
    std::fs::write(sibling(ckpt, ".log.jsonl"), log_lines)?;
    std::fs::write(sibling(ckpt, ".config.toml"), settings.to_toml())?;
    let summary = serde_json::json!({
        "checkpoint": ckpt.display().to_string(),
        "epochs": outcome.log.len(),
        "best_epoch": outcome.best_epoch,
        "best_score": outcome.best_score,
        "train": split.train.len(),
        "validation": split.validation.len(),
        "test": split.test.len(),
    });
    writeln!(out, "{summary}")?;
    if let Some(best) = outcome.log.iter().find(|r| r.epoch == outcome.best_epoch) {
        writeln!(
            err,
            "best epoch {} of {}: label accuracy {:.3}, exact match {:.3}, macro F1 {:.3}",
            best.epoch,
            outcome.log.len(),
            best.val_label_accuracy.unwrap_or(f64::NAN),
            best.val_exact_match.unwrap_or(f64::NAN),
            best.val_macro_f1.unwrap_or(f64::NAN),
        )?;
    }
    Ok(0)
}

pub fn predict(cli: &Cli, settings: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let repo_path = required(&cli.repo, "repo")?;
    let model = load_model(required(&cli.ckpt, "ckpt")?)?;
    let name = repo_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "repo".into());
    let repo = Repo::open(repo_path, &name)?;
    let rev = cli.commit.as_deref().unwrap_or("HEAD");
    let commit = repo.resolve(rev).map_err(|e| invalid(format!("cannot resolve {rev}: {e}")))?;
    let report = apply_to_commit(&repo, commit, &model, settings.beam_width)?;
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;

    let verdict = match report.verdict {
        Verdict::Buggy => "buggy",
        Verdict::Clean => "clean",
    };
    writeln!(err, "commit {}: {verdict}", report.commit)?;
    for f in &report.functions {
        let top: Vec<String> = f.top3.iter().map(|(l, p)| format!("{l} {p:.3}")).collect();
        writeln!(err, "  {}:{} {} [{}]", f.file, f.name, f.label, top.join(", "))?;
    }
    for r in &report.rejected {
        writeln!(err, "  skipped {} {:?}: {}", r.file, r.new_range, r.reason)?;
    }
    Ok(0)
}

fn gradcheck_triples() -> Vec<FunctionTriple> {
    let triple = |id: &str, label: DefectLabel, clean: &str, buggy: &str| FunctionTriple {
        id: id.into(),
        repo: "gradcheck".into(),
        fix_commit: "0".repeat(40),
        inducing_commit: None,
        label,
        clean_src: clean.into(),
        buggy_src: buggy.into(),
        fixed_src: clean.into(),
        buggy_line: 1,
        fixed_line: 1,
        file_path: "G.java".into(),
    };
    vec![
        triple("a", DefectLabel::ChangeIdentifierUsed, "int f(int a) { return a + 1; }", "int f(int a) { return a - 1; }"),
        triple("b", DefectLabel::Clean, "int g(int b) { int c = b; return c; }", "int g(int b) { int c = b; return c; }"),
    ]
}

/// A model small enough to check every coordinate in seconds.
pub fn gradcheck_config() -> ModelConfig {
    ModelConfig {
        d_model: 8,
        encoder_layers: 2,
        decoder_layers: 2,
        heads: 2,
        d_ff: 12,
        max_len: 128,
        max_decode_len: 128,
        ntn_slices: 3,
        fused_dim: 6,
        dropout: 0.0,
        init_range: 0.5,
    }
}

pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

pub fn gradcheck(settings: &Settings, out: &mut dyn Write) -> anyhow::Result<i32> {
    let triples = gradcheck_triples();
    let mut model = Model::new(gradcheck_config(), build_vocab(&triples, 1)?, settings.seed)?;
    let examples = triples.iter().map(|t| make_example(&model, t)).collect::<Result<Vec<_>, _>>()?;
    let report = joint_grad_check(&mut model, &examples, settings.w_cls, settings.w_gen, &GradCheckOptions::default())?;
    let pass = report.max_rel_error < GRADCHECK_TOLERANCE;
    writeln!(
        out,
        "{} max relative error {:.3e} at {} over {} coordinates (tolerance {:.0e})",
        if pass { "PASS" } else { "FAIL" },
        report.max_rel_error,
        report.worst_parameter,
        report.coordinates,
        GRADCHECK_TOLERANCE
    )?;
    Ok(if pass { 0 } else { 1 })
}
