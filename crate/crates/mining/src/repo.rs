use std::collections::HashMap;
use std::path::Path;

use git2::{BlameOptions, DiffFormat, DiffOptions, Oid, Repository};

use crate::diff::{split_hunks, Hunk};
use crate::error::MiningError;

/// Read-only view of a repository's default branch.
pub struct Repo {
    git: Repository,
    name: String,
    /// First-parent history of HEAD, oldest first.
    history: Vec<Oid>,
    position: HashMap<Oid, usize>,
}

/// A line annotation: the commit that last touched a line and the file's
/// path in that commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub commit: Oid,
    pub path: String,
}

fn first_parent_chain(git: &Repository) -> Result<Vec<Oid>, MiningError> {
    let mut history = Vec::new();
    let mut cur = Some(git.head()?.peel_to_commit()?);
    while let Some(c) = cur {
        history.push(c.id());
        cur = c.parents().next();
    }
    history.reverse();
    Ok(history)
}

impl Repo {
    pub fn open(path: &Path, name: &str) -> Result<Self, MiningError> {
        let git = Repository::open(path)?;
        let history = first_parent_chain(&git)?;
        let position = history.iter().enumerate().map(|(i, o)| (*o, i)).collect();
        Ok(Self { git, name: name.to_string(), history, position })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn git(&self) -> &Repository {
        &self.git
    }

    /// First-parent history of the default branch, oldest first.
    pub fn history(&self) -> &[Oid] {
        &self.history
    }

    /// Resolves a revision expression such as a hash or `HEAD~1`.
    pub fn resolve(&self, rev: &str) -> Result<Oid, MiningError> {
        Ok(self.git.revparse_single(rev)?.peel_to_commit()?.id())
    }

    pub fn message(&self, commit: Oid) -> Result<String, MiningError> {
        Ok(self.git.find_commit(commit)?.message().unwrap_or_default().to_string())
    }

    pub fn first_parent(&self, commit: Oid) -> Result<Option<Oid>, MiningError> {
        Ok(self.git.find_commit(commit)?.parent_ids().next())
    }

    /// Text of `path` at `commit`; `None` when absent or not UTF-8.
    pub fn file_at(&self, commit: Oid, path: &str) -> Result<Option<String>, MiningError> {
        let tree = self.git.find_commit(commit)?.tree()?;
        let entry = match tree.get_path(Path::new(path)) {
            Ok(e) => e,
            Err(e) if e.code() == git2::ErrorCode::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let blob = match entry.to_object(&self.git)?.into_blob() {
            Ok(b) => b,
            Err(_) => return Ok(None),
        };
        Ok(std::str::from_utf8(blob.content()).ok().map(str::to_string))
    }

    /// Zero-context unified diff of `commit` against its first parent.
    pub fn diff_text(&self, commit: Oid) -> Result<String, MiningError> {
        let c = self.git.find_commit(commit)?;
        let tree = c.tree()?;
        let parent_tree = match c.parents().next() {
            Some(p) => Some(p.tree()?),
            None => None,
        };
        let mut opts = DiffOptions::new();
        opts.context_lines(0);
        let diff = self.git.diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))?;
        let mut out = String::new();
        diff.print(DiffFormat::Patch, |_, _, line| {
            if matches!(line.origin(), '+' | '-' | ' ') {
                out.push(line.origin());
            }
            out.push_str(&String::from_utf8_lossy(line.content()));
            true
        })?;
        Ok(out)
    }

    pub fn hunks(&self, commit: Oid) -> Result<Vec<Hunk>, MiningError> {
        split_hunks(&self.diff_text(commit)?)
    }

    /// Blames `lines` of `path` as of `commit`, following first parents and
    /// ignoring whitespace-only changes. Lines past the end are skipped.
    pub fn annotate(&self, commit: Oid, path: &str, lines: &[usize]) -> Result<Vec<Annotation>, MiningError> {
        let mut opts = BlameOptions::new();
        opts.newest_commit(commit).first_parent(true).ignore_whitespace(true);
        let blame = self.git.blame_file(Path::new(path), Some(&mut opts))?;
        let mut out = Vec::new();
        for &l in lines {
            if let Some(h) = blame.get_line(l) {
                let path = h.path().map(|p| p.to_string_lossy().into_owned()).unwrap_or_else(|| path.to_string());
                out.push(Annotation { commit: h.final_commit_id(), path });
            }
        }
        Ok(out)
    }

    /// The most recent annotation: latest in first-parent order, then by
    /// commit time, then by id.
    pub fn newest<'a>(&self, candidates: &'a [Annotation]) -> Result<Option<&'a Annotation>, MiningError> {
        let mut best: Option<(&Annotation, (usize, i64, Oid))> = None;
        for a in candidates {
            let key = (self.position.get(&a.commit).copied().unwrap_or(0), self.git.find_commit(a.commit)?.time().seconds(), a.commit);
            if best.as_ref().is_none_or(|(_, k)| key > *k) {
                best = Some((a, key));
            }
        }
        Ok(best.map(|(a, _)| a))
    }
}
