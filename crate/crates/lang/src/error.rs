use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal starting at {line}:{column}")]
    UnterminatedString { line: usize, column: usize },
    #[error("unterminated block comment starting at {line}:{column}")]
    UnterminatedComment { line: usize, column: usize },
    #[error("illegal character {ch:?} at {line}:{column}")]
    IllegalCharacter { ch: char, line: usize, column: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("syntax error at {line}:{column} near {found:?}: expected one of {expected:?}")]
    Syntax { line: usize, column: usize, found: String, expected: Vec<String> },
    #[error("unsupported construct `{construct}` at {line}:{column}")]
    UnsupportedConstruct { construct: String, line: usize, column: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("change is not a single-statement modification (changed {changed}, inserted {inserted}, deleted {deleted}, signature changed: {signature})")]
    NotSingleStatement { changed: usize, inserted: usize, deleted: usize, signature: bool },
    #[error("pattern {label} cannot be injected into this template")]
    Inapplicable { label: String },
    #[error("no template accepts pattern {label}")]
    NoApplicableTemplate { label: String },
    #[error("template does not parse: {0}")]
    Template(#[from] ParseError),
    #[error("invalid synthesis settings: {0}")]
    InvalidSpec(String),
}
