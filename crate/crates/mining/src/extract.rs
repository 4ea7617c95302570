use std::fmt;

use fixline_lang::triple::{changed_lines, content_hash};
use fixline_lang::{match_pattern, DefectLabel, FileFunction, FunctionDecl, FunctionTriple, PatternError};
use git2::Oid;
use serde::Serialize;

use crate::diff::Hunk;
use crate::error::MiningError;
use crate::locate::{enclosing, function_source, functions_in, same_function};
use crate::repo::{Annotation, Repo};

/// File extensions the front end understands.
pub const SOURCE_EXTENSIONS: &[&str] = &["java"];

/// Why a hunk produced no triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Rejected {
    /// The file is not source code in the supported language.
    NotSource,
    OutsideFunction,
    /// No earlier version of the function exists.
    NewFunction,
    FunctionNameUnknown,
    NotSingleStatement,
    /// Only whitespace or comments changed.
    Unchanged,
    /// A defect-fixing change that fits no pattern.
    NoPattern,
    /// A change offered as non-defective that fits a pattern.
    MatchesPattern(DefectLabel),
    Other(String),
}

impl Rejected {
    pub fn kind(&self) -> &'static str {
        match self {
            Rejected::NotSource => "NotSource",
            Rejected::OutsideFunction => "OutsideFunction",
            Rejected::NewFunction => "NewFunction",
            Rejected::FunctionNameUnknown => "FunctionNameUnknown",
            Rejected::NotSingleStatement => "NotSingleStatement",
            Rejected::Unchanged => "Unchanged",
            Rejected::NoPattern => "NoPattern",
            Rejected::MatchesPattern(_) => "MatchesPattern",
            Rejected::Other(_) => "Other",
        }
    }
}

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejected::MatchesPattern(l) => write!(f, "MatchesPattern({l})"),
            Rejected::Other(why) => write!(f, "Other({why})"),
            r => f.write_str(r.kind()),
        }
    }
}

impl From<MiningError> for Rejected {
    fn from(e: MiningError) -> Self {
        Rejected::Other(e.to_string())
    }
}

/// The two versions of the single function a hunk modifies.
#[derive(Debug, Clone)]
pub struct FunctionChange {
    pub file_path: String,
    pub old_path: String,
    pub before: FunctionDecl,
    pub after: FunctionDecl,
    pub before_src: String,
    pub after_src: String,
    /// Pattern of the change, when it fits one.
    pub label: Option<DefectLabel>,
}

impl FunctionChange {
    pub fn name(&self) -> &str {
        &self.after.name
    }

    /// Stable identifier of the function within a commit.
    pub fn id(&self, repo: &str, commit: Oid) -> String {
        content_hash(&[repo, &commit.to_string(), &self.file_path, &signature(&self.after)])
    }
}

fn signature(decl: &FunctionDecl) -> String {
    let params: Vec<&str> = decl.params.iter().map(|p| p.type_name.as_str()).collect();
    format!("{}({})", decl.name, params.join(","))
}

pub fn is_source(path: &str) -> bool {
    std::path::Path::new(path).extension().and_then(|e| e.to_str()).is_some_and(|e| SOURCE_EXTENSIONS.contains(&e))
}

/// The one function covering every line, or why there is none.
fn covering<'a>(functions: &'a [FileFunction], lines: &[usize]) -> Result<&'a FileFunction, Rejected> {
    let mut found: Option<&FileFunction> = None;
    for &l in lines {
        let f = enclosing(functions, l).ok_or(Rejected::OutsideFunction)?;
        match found {
            Some(g) if g.token_range != f.token_range => return Err(Rejected::NotSingleStatement),
            _ => found = Some(f),
        }
    }
    found.ok_or(Rejected::OutsideFunction)
}

/// Locates the function `hunk` of `commit` modifies and its version in the
/// first parent, applying the outside-function, new-function, name and
/// single-statement filters.
pub fn function_change(repo: &Repo, commit: Oid, hunk: &Hunk) -> Result<FunctionChange, Rejected> {
    if !is_source(&hunk.file_path) {
        return Err(Rejected::NotSource);
    }
    let parent = repo.first_parent(commit)?.ok_or(Rejected::NewFunction)?;
    let old_path = hunk.old_path.clone().ok_or(Rejected::NewFunction)?;
    let after_text = repo
        .file_at(commit, &hunk.file_path)?
        .ok_or_else(|| Rejected::Other(format!("{} is deleted", hunk.file_path)))?;
    let after_fns = functions_in(&after_text).map_err(|e| Rejected::Other(format!("{}: {e}", hunk.file_path)))?;
    let new_lines = if hunk.added_at.is_empty() { vec![hunk.new_range.0] } else { hunk.added_at.clone() };
    let after = covering(&after_fns, &new_lines)?
        .parsed
        .clone()
        .map_err(|e| Rejected::Other(format!("{}: {e}", hunk.file_path)))?;
    if after.name.is_empty() {
        return Err(Rejected::FunctionNameUnknown);
    }
    let before_text = repo.file_at(parent, &old_path)?.ok_or(Rejected::NewFunction)?;
    let before_fns = functions_in(&before_text).map_err(|e| Rejected::Other(format!("{old_path}: {e}")))?;
    let before = match same_function(&before_fns, &after) {
        Some(b) => b.clone(),
        None if hunk.removed_at.iter().any(|&l| enclosing(&before_fns, l).is_some()) => return Err(Rejected::FunctionNameUnknown),
        None => return Err(Rejected::NewFunction),
    };
    for &l in &hunk.removed_at {
        if l < before.first_line() || l > before.last_line() {
            return Err(match enclosing(&before_fns, l) {
                None => Rejected::OutsideFunction,
                Some(_) => Rejected::NotSingleStatement,
            });
        }
    }
    if before.normalized() == after.normalized() {
        return Err(Rejected::Unchanged);
    }
    let label = pattern(&before, &after)?;
    Ok(FunctionChange {
        file_path: hunk.file_path.clone(),
        old_path,
        before_src: function_source(&before_text, &before),
        after_src: function_source(&after_text, &after),
        before,
        after,
        label,
    })
}

fn pattern(before: &FunctionDecl, after: &FunctionDecl) -> Result<Option<DefectLabel>, Rejected> {
    match match_pattern(before, after) {
        Ok(m) => Ok(m.map(|m| m.label)),
        Err(PatternError::NotSingleStatement { .. }) => Err(Rejected::NotSingleStatement),
        Err(e) => Err(Rejected::Other(e.to_string())),
    }
}

fn inducing_annotation(repo: &Repo, fix_commit: Oid, hunk: &Hunk) -> Result<Option<Annotation>, MiningError> {
    let (Some(parent), Some(path)) = (repo.first_parent(fix_commit)?, hunk.old_path.as_deref()) else {
        return Ok(None);
    };
    let lines: Vec<usize> = if hunk.removed_at.is_empty() {
        // Lines around the insertion point.
        let at = hunk.old_range.0;
        [at, at + 1].into_iter().filter(|&l| l >= 1).collect()
    } else {
        hunk.removed_at.clone()
    };
    let annotations = repo.annotate(parent, path, &lines)?;
    Ok(repo.newest(&annotations)?.cloned())
}

/// Blames the fix's parent at the hunk's removed lines, or at the lines
/// around a pure insertion, and returns the most recent commit among them.
pub fn find_inducing_commit(repo: &Repo, fix_commit: Oid, hunk: &Hunk) -> Result<Option<Oid>, MiningError> {
    Ok(inducing_annotation(repo, fix_commit, hunk)?.map(|a| a.commit))
}

/// Builds the defective triple for a hunk of a defect-fixing commit: the
/// fixed function, its version in the inducing commit and its version just
/// before the inducing commit.
pub fn extract_triple(repo: &Repo, fix_commit: Oid, hunk: &Hunk) -> Result<FunctionTriple, Rejected> {
    let change = function_change(repo, fix_commit, hunk)?;
    let inducing = inducing_annotation(repo, fix_commit, hunk)?
        .ok_or_else(|| Rejected::Other("no inducing commit found".into()))?;
    let buggy_text = repo
        .file_at(inducing.commit, &inducing.path)?
        .ok_or_else(|| Rejected::Other(format!("{} missing in {}", inducing.path, inducing.commit)))?;
    let buggy_fns = functions_in(&buggy_text).map_err(|e| Rejected::Other(format!("{}: {e}", inducing.path)))?;
    let buggy = same_function(&buggy_fns, &change.before).ok_or(Rejected::FunctionNameUnknown)?;
    let clean_commit = repo.first_parent(inducing.commit)?.ok_or(Rejected::NewFunction)?;
    let clean_text = repo.file_at(clean_commit, &inducing.path)?.ok_or(Rejected::NewFunction)?;
    let clean_fns = functions_in(&clean_text).map_err(|e| Rejected::Other(format!("{}: {e}", inducing.path)))?;
    let clean = same_function(&clean_fns, buggy).ok_or(Rejected::NewFunction)?;
    if clean.normalized() == buggy.normalized() {
        return Err(Rejected::Other("inducing commit leaves the function unchanged".into()));
    }
    if buggy.normalized() == change.after.normalized() {
        return Err(Rejected::Other("fixed version equals the inducing version".into()));
    }
    let label = pattern(buggy, &change.after)?.ok_or(Rejected::NoPattern)?;
    let buggy_src = function_source(&buggy_text, buggy);
    let (buggy_line, fixed_line) = changed_lines(&buggy_src, &change.after_src).unwrap_or((1, 1));
    let triple = FunctionTriple {
        id: change.id(repo.name(), fix_commit),
        repo: repo.name().to_string(),
        fix_commit: fix_commit.to_string(),
        inducing_commit: Some(inducing.commit.to_string()),
        label,
        clean_src: function_source(&clean_text, clean),
        buggy_src,
        fixed_src: change.after_src,
        buggy_line,
        fixed_line,
        file_path: change.file_path,
    };
    triple.validate().map_err(|e| Rejected::Other(e.to_string()))?;
    Ok(triple)
}

/// Builds a non-defective triple for a hunk of a commit that does not fix a
/// defect: the function before the commit is the clean version and the
/// function after it is both the current and the fixed version.
pub fn extract_clean_triple(repo: &Repo, commit: Oid, hunk: &Hunk) -> Result<FunctionTriple, Rejected> {
    let change = function_change(repo, commit, hunk)?;
    if let Some(label) = change.label {
        return Err(Rejected::MatchesPattern(label));
    }
    let (_, line) = changed_lines(&change.before_src, &change.after_src).unwrap_or((1, 1));
    let triple = FunctionTriple {
        id: change.id(repo.name(), commit),
        repo: repo.name().to_string(),
        fix_commit: commit.to_string(),
        inducing_commit: None,
        label: DefectLabel::Clean,
        clean_src: change.before_src,
        buggy_src: change.after_src.clone(),
        fixed_src: change.after_src,
        buggy_line: line,
        fixed_line: line,
        file_path: change.file_path,
    };
    triple.validate().map_err(|e| Rejected::Other(e.to_string()))?;
    Ok(triple)
}
