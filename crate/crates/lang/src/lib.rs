//! Java-subset front end: lexing, parsing, statement diffs, data-flow
//! graphs, single-statement bug patterns and function triples.

pub mod ast;
pub mod delta;
pub mod dfg;
pub mod error;
pub mod label;
pub mod lexer;
pub mod parser;
pub mod patterns;
pub mod triple;

pub use ast::{AstNode, FunctionDecl, NodeKind, Param};
pub use delta::{statement_count_delta, StatementDelta};
pub use dfg::{build_dfg, extract_variables, Access, DataFlowGraph, VariableOccurrence};
pub use error::{LexError, ParseError, PatternError};
pub use label::{DefectLabel, NUM_LABELS};
pub use lexer::{detokenize, normalize, tokenize, Token, TokenKind};
pub use parser::{parse_file, parse_function, FileFunction};
pub use patterns::{generate_corpus, inject_defect, match_pattern, PatternMatch, SynthSpec};
pub use triple::FunctionTriple;
