use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use fixline_lang::FunctionTriple;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::MiningError;
use crate::extract::{extract_clean_triple, extract_triple, Rejected};
use crate::message::{classify_commit_message, CommitKind};
use crate::repo::Repo;

/// A repository named by a manifest line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// The line as written; used as the triples' `repo` field.
    pub name: String,
    pub path: PathBuf,
}

/// Parses a manifest: one local repository path or `file://` URL per line,
/// relative paths resolved against `base`. Blank lines and `#` comments are
/// ignored.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>, MiningError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let path = if let Some(p) = line.strip_prefix("file://") {
            PathBuf::from(p)
        } else if line.contains("://") || line.starts_with("git@") {
            return Err(MiningError::Manifest(format!("line {}: remote repository {line:?} must be cloned locally first", i + 1)));
        } else {
            base.join(line)
        };
        out.push(ManifestEntry { name: line.to_string(), path });
    }
    Ok(out)
}

/// Triples and rejection counts for one repository.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RepoReport {
    pub name: String,
    pub commits: usize,
    pub bug_fixing_commits: usize,
    pub hunks: usize,
    pub rejected: BTreeMap<String, usize>,
    /// Set when the repository could not be read at all.
    pub error: Option<String>,
    #[serde(skip)]
    pub triples: Vec<FunctionTriple>,
}

/// Walks the default branch oldest first. Hunks of defect-fixing commits
/// yield defective triples, hunks of other commits yield clean ones.
pub fn mine_repository(entry: &ManifestEntry) -> RepoReport {
    let mut report = RepoReport { name: entry.name.clone(), ..Default::default() };
    let repo = match Repo::open(&entry.path, &entry.name) {
        Ok(r) => r,
        Err(e) => {
            log::error!("{}: {e}", entry.name);
            report.error = Some(e.to_string());
            return report;
        }
    };
    let mut seen = BTreeSet::new();
    for &commit in repo.history() {
        report.commits += 1;
        let outcome = repo.message(commit).and_then(|m| Ok((classify_commit_message(&m), repo.hunks(commit)?)));
        let (kind, hunks) = match outcome {
            Ok(o) => o,
            Err(e) => {
                log::warn!("{}: commit {commit}: {e}", entry.name);
                *report.rejected.entry(Rejected::Other(String::new()).kind().to_string()).or_default() += 1;
                continue;
            }
        };
        if kind == CommitKind::BugFixing {
            report.bug_fixing_commits += 1;
        }
        for hunk in &hunks {
            report.hunks += 1;
            let result = match kind {
                CommitKind::BugFixing => extract_triple(&repo, commit, hunk),
                CommitKind::NonBugFixing => extract_clean_triple(&repo, commit, hunk),
            };
            match result {
                Ok(t) => {
                    if seen.insert(t.id.clone()) {
                        report.triples.push(t);
                    }
                }
                Err(r) => {
                    log::debug!("{}: {commit} {}: {r}", entry.name, hunk.file_path);
                    *report.rejected.entry(r.kind().to_string()).or_default() += 1;
                }
            }
        }
    }
    log::info!(
        "{}: {} commits, {} hunks, {} triples, rejected {:?}",
        entry.name,
        report.commits,
        report.hunks,
        report.triples.len(),
        report.rejected
    );
    report
}

/// Mines every repository, one worker per repository. Reports come back in
/// manifest order.
pub fn mine_all(entries: &[ManifestEntry]) -> Vec<RepoReport> {
    entries.par_iter().map(mine_repository).collect()
}

/// Writes one JSON object per line, re-validating every triple.
pub fn write_jsonl<W: Write>(triples: &[FunctionTriple], mut out: W) -> Result<(), MiningError> {
    for t in triples {
        t.validate().map_err(|e| MiningError::InvalidTriple(format!("{}: {e}", t.id)))?;
        writeln!(out, "{}", t.to_json_line())?;
    }
    Ok(())
}
