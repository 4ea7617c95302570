//! Mining clean, buggy and fixed function versions from version-control
//! history, and applying a trained model to individual commits.

pub mod apply;
pub mod diff;
mod error;
pub mod extract;
pub mod fixture;
pub mod locate;
pub mod message;
pub mod pipeline;
pub mod repo;

pub use apply::{apply_to_commit, CommitReport, FunctionReport, Verdict};
pub use diff::{split_hunks, Hunk};
pub use error::MiningError;
pub use extract::{extract_clean_triple, extract_triple, find_inducing_commit, function_change, FunctionChange, Rejected};
pub use locate::locate_enclosing_function;
pub use message::{classify_commit_message, CommitKind};
pub use pipeline::{mine_all, mine_repository, parse_manifest, write_jsonl, ManifestEntry, RepoReport};
pub use repo::Repo;
