//! Single-statement bug patterns: matching, injection and corpus synthesis.

mod inject;
mod matcher;
mod synth;
mod templates;

pub use inject::{apply_edit, candidate_edits, inject_defect, Edit};
pub use matcher::{match_pattern, PatternMatch};
pub use synth::{benign_rename, clean_count, generate_corpus, SynthSpec};
pub use templates::DEFAULT_TEMPLATES;
