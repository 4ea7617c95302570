use std::collections::BTreeSet;

use fixline_lang::DefectLabel;
use fixline_model::{analyze, Model};
use git2::Oid;
use serde::Serialize;

use crate::error::MiningError;
use crate::extract::function_change;
use crate::repo::Repo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Buggy,
    Clean,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionReport {
    pub function_id: String,
    pub file: String,
    pub name: String,
    pub label: DefectLabel,
    pub probabilities: Vec<f64>,
    pub top3: Vec<(DefectLabel, f64)>,
    pub patch: Option<String>,
    pub patch_logprob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedHunk {
    pub file: String,
    pub old_range: (usize, usize),
    pub new_range: (usize, usize),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommitReport {
    pub commit: String,
    pub verdict: Verdict,
    pub functions: Vec<FunctionReport>,
    pub rejected: Vec<RejectedHunk>,
}

/// Classifies every function a commit modifies against its version in the
/// first parent and generates a repair for those that look defective. Hunks
/// outside functions, in new functions or touching more than one statement
/// are skipped. The commit is buggy iff some function is.
pub fn apply_to_commit(repo: &Repo, commit: Oid, model: &Model, beam_width: usize) -> Result<CommitReport, MiningError> {
    let mut functions = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = BTreeSet::new();
    for hunk in repo.hunks(commit)? {
        let reject = |reason: String| RejectedHunk {
            file: hunk.file_path.clone(),
            old_range: hunk.old_range,
            new_range: hunk.new_range,
            reason,
        };
        let change = match function_change(repo, commit, &hunk) {
            Ok(c) => c,
            Err(r) => {
                log::warn!("{commit} {}: skipped hunk: {r}", hunk.file_path);
                rejected.push(reject(r.to_string()));
                continue;
            }
        };
        let id = change.id(repo.name(), commit);
        if !seen.insert(id.clone()) {
            continue;
        }
        let analysis = match analyze(model, &change.before_src, &change.after_src, beam_width) {
            Ok(a) => a,
            Err(e) => {
                log::warn!("{commit} {}: {}: {e}", hunk.file_path, change.name());
                rejected.push(reject(format!("Other({e})")));
                continue;
            }
        };
        functions.push(FunctionReport {
            function_id: id,
            file: change.file_path.clone(),
            name: change.name().to_string(),
            label: analysis.label,
            probabilities: analysis.probabilities,
            top3: analysis.top3,
            patch_logprob: analysis.patch.as_ref().map(|p| p.logprob),
            patch: analysis.patch.map(|p| p.text),
        });
    }
    let verdict = if functions.iter().any(|f| !f.label.is_clean()) { Verdict::Buggy } else { Verdict::Clean };
    Ok(CommitReport { commit: commit.to_string(), verdict, functions, rejected })
}
