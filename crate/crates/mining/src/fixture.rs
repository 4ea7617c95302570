//! Small deterministic repositories for tests and demonstrations.

use std::path::{Path, PathBuf};

use git2::{Oid, Repository, Signature, Time};

use crate::error::MiningError;

/// Commit timestamps start here and advance one minute per commit.
const EPOCH: i64 = 1_600_000_000;

pub struct FixtureRepo {
    repo: Repository,
    dir: PathBuf,
    commits: usize,
}

impl FixtureRepo {
    pub fn init(dir: &Path) -> Result<Self, MiningError> {
        let repo = Repository::init(dir)?;
        Ok(Self { repo, dir: dir.to_path_buf(), commits: 0 })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Writes (`Some`) or deletes (`None`) files and commits the result on
    /// HEAD with a fixed author and clock.
    pub fn commit(&mut self, message: &str, files: &[(&str, Option<&str>)]) -> Result<Oid, MiningError> {
        let mut index = self.repo.index()?;
        for (path, content) in files {
            let full = self.dir.join(path);
            match content {
                Some(text) => {
                    if let Some(parent) = full.parent() {
                        std::fs::create_dir_all(parent)?;
                    }
                    std::fs::write(&full, text)?;
                    index.add_path(Path::new(path))?;
                }
                None => {
                    std::fs::remove_file(&full)?;
                    index.remove_path(Path::new(path))?;
                }
            }
        }
        index.write()?;
        let tree = self.repo.find_tree(index.write_tree()?)?;
        let sig = Signature::new("Fixture", "fixture@example.com", &Time::new(EPOCH + 60 * self.commits as i64, 0))?;
        let parent = match self.repo.head() {
            Ok(h) => Some(h.peel_to_commit()?),
            Err(_) => None,
        };
        let parents: Vec<&git2::Commit<'_>> = parent.iter().collect();
        let oid = self.repo.commit(Some("HEAD"), &sig, &sig, message, &tree, &parents)?;
        self.commits += 1;
        Ok(oid)
    }
}

/// A class holding one field and the given methods, indented by four
/// spaces.
pub fn java_class(name: &str, methods: &[&str]) -> String {
    let mut out = format!("public class {name} {{\n    private int limit = 3;\n");
    for m in methods {
        out.push('\n');
        for line in m.trim_end().lines() {
            if line.is_empty() {
                out.push('\n');
            } else {
                out.push_str("    ");
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Commits of a fixture repository, oldest first, and the file they edit.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub commits: Vec<Oid>,
    pub file: String,
}

const HELPER: &str = "int twice(int x) {\n    return x * 2;\n}\n";

pub const BOOL_CLEAN: &str =
    "boolean isReady(int count) {\n    boolean done = false;\n    if (count > limit) {\n        done = true;\n    }\n    return done;\n}\n";
pub const BOOL_BUGGY: &str =
    "boolean isReady(int count) {\n    boolean done = false;\n    if (count > limit) {\n        done = false;\n    }\n    return done;\n}\n";

/// Three commits: add `clean`, replace it by `buggy` in a commit whose
/// message does not mention a fix, then replace it by `fixed` in a fixing
/// commit.
pub fn bool_flip(dir: &Path, clean: &str, buggy: &str, fixed: &str) -> Result<Fixture, MiningError> {
    let file = "src/Ready.java";
    let mut r = FixtureRepo::init(dir)?;
    let a = r.commit("Add readiness check", &[(file, Some(&java_class("Ready", &[HELPER, clean])))])?;
    let b = r.commit("Tune readiness threshold", &[(file, Some(&java_class("Ready", &[HELPER, buggy])))])?;
    let c = r.commit("Fix readiness flag", &[(file, Some(&java_class("Ready", &[HELPER, fixed])))])?;
    Ok(Fixture { commits: vec![a, b, c], file: file.into() })
}

const RESET_BUGGY: &str = "void reset() {\n    limit = 0;\n    enabled = true;\n}\n";
const RESET_FIXED: &str = "void reset() {\n    limit = 0;\n    enabled = false;\n}\n";

/// The defective function is created by the commit the fix blames, so no
/// earlier version of it exists.
pub fn new_function(dir: &Path) -> Result<Fixture, MiningError> {
    let file = "src/Counter.java";
    let mut r = FixtureRepo::init(dir)?;
    let a = r.commit("Create counter", &[(file, Some(&java_class("Counter", &[HELPER])))])?;
    let b = r.commit("Add reset", &[(file, Some(&java_class("Counter", &[HELPER, RESET_BUGGY])))])?;
    let c = r.commit("Fix reset flag", &[(file, Some(&java_class("Counter", &[HELPER, RESET_FIXED])))])?;
    Ok(Fixture { commits: vec![a, b, c], file: file.into() })
}

const SCALE_CLEAN: &str = "int scale(int v) {\n    int low = v - 1;\n    int high = v + 1;\n    return low * high;\n}\n";
const SCALE_BUGGY: &str = "int scale(int v) {\n    int low = v - 2;\n    int high = v + 1;\n    return low * high;\n}\n";
const SCALE_FIXED: &str = "int scale(int v) {\n    int low = v - 1;\n    int high = v + 1;\n    return low + high;\n}\n";

/// The fixing commit edits two statements of one function and the class
/// field, so every hunk is rejected.
pub fn multi_statement(dir: &Path) -> Result<Fixture, MiningError> {
    let file = "src/Scale.java";
    let mut r = FixtureRepo::init(dir)?;
    let a = r.commit("Add scaling", &[(file, Some(&java_class("Scale", &[SCALE_CLEAN])))])?;
    let b = r.commit("Widen scaling window", &[(file, Some(&java_class("Scale", &[SCALE_BUGGY])))])?;
    let fixed = java_class("Scale", &[SCALE_FIXED]).replace("limit = 3", "limit = 4");
    let c = r.commit("Fix scaling error", &[(file, Some(&fixed))])?;
    Ok(Fixture { commits: vec![a, b, c], file: file.into() })
}
