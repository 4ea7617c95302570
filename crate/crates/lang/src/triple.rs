use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::ParseError;
use crate::label::DefectLabel;
use crate::lexer::tokenize;
use crate::parser::parse_function;
use crate::patterns::match_pattern;

/// Clean, buggy and fixed versions of one function. Field order is the
/// JSONL column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionTriple {
    pub id: String,
    pub repo: String,
    pub fix_commit: String,
    pub inducing_commit: Option<String>,
    pub label: DefectLabel,
    pub clean_src: String,
    pub buggy_src: String,
    pub fixed_src: String,
    pub buggy_line: usize,
    pub fixed_line: usize,
    pub file_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TripleError {
    #[error("{version} version does not parse: {source}")]
    Parse { version: &'static str, source: ParseError },
    #[error("versions name different functions: {0:?}")]
    NameMismatch(Vec<String>),
    #[error("clean triple has fixed != buggy")]
    CleanFixedDiffers,
    #[error("clean triple's change matches {0}")]
    CleanMatchesPattern(DefectLabel),
    #[error("line {line} is outside the {version} source")]
    LineOutOfRange { version: &'static str, line: usize },
}

impl FunctionTriple {
    /// Checks the structural invariants every emitted triple must hold.
    pub fn validate(&self) -> Result<(), TripleError> {
        let parse = |version: &'static str, src: &str| parse_function(src).map_err(|source| TripleError::Parse { version, source });
        let clean = parse("clean", &self.clean_src)?;
        let buggy = parse("buggy", &self.buggy_src)?;
        let fixed = parse("fixed", &self.fixed_src)?;
        if clean.name != buggy.name || buggy.name != fixed.name {
            return Err(TripleError::NameMismatch(vec![clean.name, buggy.name, fixed.name]));
        }
        for (version, src, line) in [("buggy", &self.buggy_src, self.buggy_line), ("fixed", &self.fixed_src, self.fixed_line)] {
            if line == 0 || line > src.lines().count().max(1) {
                return Err(TripleError::LineOutOfRange { version, line });
            }
        }
        if self.label.is_clean() {
            if buggy.normalized() != fixed.normalized() {
                return Err(TripleError::CleanFixedDiffers);
            }
            if let Ok(Some(m)) = match_pattern(&clean, &buggy) {
                return Err(TripleError::CleanMatchesPattern(m.label));
            }
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("triple serializes")
    }
}

/// Hex SHA-256 of the given parts, separated by NUL bytes.
pub fn content_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// 1-based lines of the first token where `before` and `after` differ.
pub fn changed_lines(before: &str, after: &str) -> Option<(usize, usize)> {
    let b = tokenize(before).ok()?;
    let a = tokenize(after).ok()?;
    let i = b.iter().zip(&a).position(|(x, y)| x.text != y.text).unwrap_or(b.len().min(a.len()));
    let line = |toks: &[crate::lexer::Token]| toks.get(i).or(toks.last()).map(|t| t.line).unwrap_or(1);
    Some((line(&b), line(&a)))
}
