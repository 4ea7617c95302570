//! Defect injection: the inverse of the matcher. A template is treated as
//! the fixed version and a single edit produces the buggy one.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ast::{AstNode, FunctionDecl, NodeKind};
use crate::dfg::extract_variables;
use crate::error::PatternError;
use crate::label::DefectLabel;
use crate::lexer::Token;
use crate::parser::parse_function;
use crate::patterns::match_pattern;
use crate::triple::{content_hash, FunctionTriple};

/// Replace tokens `span` of the template with `text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub span: (usize, usize),
    pub text: String,
}

/// Splices `edit` into `src`, preserving the surrounding layout.
pub fn apply_edit(src: &str, tokens: &[Token], edit: &Edit) -> String {
    let (s, e) = edit.span;
    let start = tokens.get(s).map(|t| t.offset).unwrap_or(src.len());
    let end = if e > s { tokens[e - 1].end() } else { start };
    let mut out = String::with_capacity(src.len() + edit.text.len());
    out.push_str(&src[..start]);
    out.push_str(&edit.text);
    out.push_str(&src[end..]);
    out
}

const ARITHMETIC: &[&str] = &["+", "-", "*", "/", "%"];
const RELATIONAL: &[&str] = &["<", "<=", ">", ">="];
const EQUALITY: &[&str] = &["==", "!="];
const LOGICAL: &[&str] = &["&&", "||"];
const ACCESS: &[&str] = &["public", "protected", "private"];

/// Calls that are commonly confused with each other.
const CONFUSABLE_CALLS: &[(&str, &str)] = &[
    ("max", "min"),
    ("add", "remove"),
    ("get", "put"),
    ("contains", "equals"),
    ("info", "debug"),
    ("trim", "toLowerCase"),
    ("size", "length"),
    ("floor", "ceil"),
    ("startsWith", "endsWith"),
    ("append", "insert"),
];

fn operator_class(op: &str) -> Option<&'static [&'static str]> {
    [ARITHMETIC, RELATIONAL, EQUALITY, LOGICAL].into_iter().find(|c| c.contains(&op))
}

fn src_of<'a>(src: &'a str, tokens: &[Token], node: &AstNode) -> &'a str {
    let (s, e) = node.token_span;
    &src[tokens[s].offset..tokens[e - 1].end()]
}

fn body_nodes(decl: &FunctionDecl) -> Vec<&AstNode> {
    let mut out = Vec::new();
    decl.body.walk(&mut |n| out.push(n));
    out
}

fn variable_names(decl: &FunctionDecl) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for v in extract_variables(decl) {
        if !names.contains(&v.name) {
            names.push(v.name);
        }
    }
    names
}

fn alternative_number(text: &str) -> Vec<String> {
    if let Ok(n) = text.parse::<i64>() {
        let mut out = vec![(n + 1).to_string()];
        if n > 0 {
            out.push((n - 1).to_string());
        }
        return out;
    }
    if let Ok(x) = text.parse::<f64>() {
        return vec![format!("{:?}", x + 1.0), format!("{:?}", x * 2.0)];
    }
    Vec::new()
}

/// Candidate edits that turn the template into a buggy version for `label`.
pub fn candidate_edits(src: &str, decl: &FunctionDecl, label: DefectLabel) -> Vec<Edit> {
    use DefectLabel::*;
    let toks = &decl.tokens;
    let nodes = body_nodes(decl);
    let vars = variable_names(decl);
    let calls: Vec<&AstNode> = nodes.iter().copied().filter(|n| n.kind == NodeKind::Call).collect();
    let receivers: Vec<(usize, usize)> = calls.iter().filter_map(|c| c.call_receiver()).map(|r| r.token_span).collect();
    let mut edits = Vec::new();
    let mut push = |span: (usize, usize), text: String| edits.push(Edit { span, text });
    match label {
        Clean => {}
        ChangeIdentifierUsed => {
            for n in nodes.iter().filter(|n| n.kind == NodeKind::Identifier && !receivers.contains(&n.token_span)) {
                for v in vars.iter().filter(|v| **v != n.text) {
                    push(n.token_span, v.clone());
                }
            }
        }
        ChangeNumericLiteral => {
            for n in nodes.iter().filter(|n| n.is_numeric_literal()) {
                for alt in alternative_number(&n.text) {
                    push(n.token_span, alt);
                }
            }
        }
        ChangeBooleanLiteral => {
            for n in nodes.iter().filter(|n| n.is_boolean_literal()) {
                push(n.token_span, if n.text == "true" { "false" } else { "true" }.into());
            }
        }
        ChangeModifier => {
            for m in decl.header.children.iter().filter(|c| c.kind == NodeKind::Modifier) {
                if ACCESS.contains(&m.text.as_str()) {
                    for alt in ACCESS.iter().filter(|a| **a != m.text) {
                        push(m.token_span, alt.to_string());
                    }
                }
            }
            for n in nodes.iter().filter(|n| n.kind == NodeKind::VarDecl) {
                match n.children.first() {
                    Some(m) if m.kind == NodeKind::Modifier && m.text == "final" => push(m.token_span, String::new()),
                    Some(first) => push((first.token_span.0, first.token_span.0), "final ".into()),
                    None => {}
                }
            }
        }
        WrongFunctionName => {
            let names: Vec<&str> = calls.iter().map(|c| c.text.as_str()).collect();
            for c in &calls {
                let name_tok = name_token(c);
                let mut alts: Vec<String> = CONFUSABLE_CALLS
                    .iter()
                    .filter_map(|&(x, y)| if x == c.text { Some(y) } else if y == c.text { Some(x) } else { None })
                    .map(String::from)
                    .collect();
                alts.extend(names.iter().filter(|n| **n != c.text).map(|n| n.to_string()));
                for alt in alts {
                    push((name_tok, name_tok + 1), alt);
                }
            }
        }
        SameFunctionMoreArgs => {
            for c in &calls {
                let args = c.call_args();
                if let Some((_, keep)) = args.split_last() {
                    let text = keep.iter().map(|a| src_of(src, toks, a)).collect::<Vec<_>>().join(", ");
                    push(args_inner_span(c), text);
                }
            }
        }
        SameFunctionLessArgs => {
            for c in &calls {
                let args = c.call_args();
                let mut extras: Vec<String> = vars.clone();
                extras.push("0".into());
                for extra in extras {
                    let mut parts: Vec<&str> = args.iter().map(|a| src_of(src, toks, a)).collect();
                    parts.push(&extra);
                    push(args_inner_span(c), parts.join(", "));
                }
            }
        }
        SameFunctionChangeCaller => {
            for c in &calls {
                if let Some(r) = c.call_receiver().filter(|r| r.kind == NodeKind::Identifier && vars.contains(&r.text)) {
                    for v in vars.iter().filter(|v| **v != r.text) {
                        push(r.token_span, v.clone());
                    }
                }
            }
        }
        SameFunctionSwapArgs => {
            for c in &calls {
                let args = c.call_args();
                for i in 0..args.len() {
                    for j in i + 1..args.len() {
                        if args[i].same_shape(&args[j]) {
                            continue;
                        }
                        let mut parts: Vec<&str> = args.iter().map(|a| src_of(src, toks, a)).collect();
                        parts.swap(i, j);
                        push(args_inner_span(c), parts.join(", "));
                    }
                }
            }
        }
        ChangeBinaryOperator => {
            for n in nodes.iter().filter(|n| n.kind == NodeKind::BinaryOp) {
                let op_tok = n.children[0].token_span.1;
                if let Some(class) = operator_class(&n.text) {
                    for alt in class.iter().filter(|o| **o != n.text) {
                        push((op_tok, op_tok + 1), alt.to_string());
                    }
                }
            }
        }
        ChangeUnaryOperator => {
            for n in nodes.iter().filter(|n| n.kind == NodeKind::UnaryOp) {
                let op_tok = if n.text.starts_with("post") { n.token_span.1 - 1 } else { n.token_span.0 };
                match n.text.as_str() {
                    "!" | "-" | "~" => push((op_tok, op_tok + 1), String::new()),
                    "++" | "post++" => push((op_tok, op_tok + 1), "--".into()),
                    "--" | "post--" => push((op_tok, op_tok + 1), "++".into()),
                    _ => {}
                }
            }
            for n in nodes.iter().filter(|n| n.kind == NodeKind::If) {
                let cond = &n.children[0];
                let text = src_of(src, toks, cond);
                let wrapped = match cond.kind {
                    NodeKind::Identifier | NodeKind::Call | NodeKind::Paren | NodeKind::FieldAccess => format!("!{text}"),
                    NodeKind::UnaryOp if cond.text == "!" => continue,
                    _ => format!("!({text})"),
                };
                push(cond.token_span, wrapped);
            }
        }
        ChangeOperand => {
            let pool: Vec<&AstNode> = nodes
                .iter()
                .copied()
                .filter(|n| matches!(n.kind, NodeKind::Call | NodeKind::FieldAccess | NodeKind::ArrayAccess | NodeKind::Identifier))
                .collect();
            for n in nodes.iter().filter(|n| n.kind == NodeKind::BinaryOp && !LOGICAL.contains(&n.text.as_str())) {
                for operand in &n.children {
                    for other in pool.iter().filter(|p| p.kind != operand.kind && !p.same_shape(operand)) {
                        push(operand.token_span, src_of(src, toks, other).to_string());
                    }
                    let text = src_of(src, toks, operand);
                    push(operand.token_span, format!("({text} + 1)"));
                }
            }
        }
        MoreSpecificIf | LessSpecificIf => {
            let op = if label == MoreSpecificIf { "&&" } else { "||" };
            for n in nodes.iter().filter(|n| n.kind == NodeKind::If) {
                let cond = n.children[0].unparen();
                if cond.kind == NodeKind::BinaryOp && cond.text == op {
                    for side in &cond.children {
                        push(n.children[0].token_span, src_of(src, toks, side).to_string());
                    }
                }
            }
        }
        MissingThrowsException => {
            if let Some(t) = decl.header.children.iter().find(|c| c.kind == NodeKind::Throws) {
                push(t.token_span, String::new());
            }
        }
        DeleteThrowsException => {
            if decl.throws_list.is_empty() {
                let at = decl.body.token_span.0;
                push((at, at), "throws Exception ".into());
            } else if let Some(t) = decl.header.children.iter().find(|c| c.kind == NodeKind::Throws) {
                push((t.token_span.1, t.token_span.1), ", Exception".into());
            }
        }
    }
    edits
}

/// Token index of a call's method name.
fn name_token(call: &AstNode) -> usize {
    match call.call_receiver() {
        Some(r) => r.token_span.1 + 1,
        None => call.token_span.0,
    }
}

/// Tokens strictly between a call's parentheses.
fn args_inner_span(call: &AstNode) -> (usize, usize) {
    let args = call.children.last().expect("call has args");
    (args.token_span.0 + 1, args.token_span.1 - 1)
}

/// Injects one defect of kind `label` into `template`. Candidate edits are
/// tried in random order; the first whose result the matcher classifies as
/// `label` is kept.
pub fn inject_defect<R: Rng>(template: &str, label: DefectLabel, rng: &mut R) -> Result<FunctionTriple, PatternError> {
    if label.is_clean() {
        return Err(PatternError::Inapplicable { label: label.to_string() });
    }
    let fixed = parse_function(template)?;
    let mut edits = candidate_edits(template, &fixed, label);
    edits.shuffle(rng);
    for edit in edits {
        let buggy_src = apply_edit(template, &fixed.tokens, &edit);
        let Ok(buggy) = parse_function(&buggy_src) else { continue };
        if let Ok(Some(m)) = match_pattern(&buggy, &fixed) {
            if m.label == label {
                let at = edit.span.0.min(fixed.tokens.len() - 1);
                let fixed_line = fixed.tokens[at].line;
                let buggy_line = buggy.tokens.get(m.site.0).map(|t| t.line).unwrap_or(fixed_line);
                return Ok(FunctionTriple {
                    id: content_hash(&[template, &buggy_src])[..16].to_string(),
                    repo: "synthetic".into(),
                    fix_commit: content_hash(&[template])[..40].to_string(),
                    inducing_commit: None,
                    label,
                    clean_src: template.to_string(),
                    buggy_src,
                    fixed_src: template.to_string(),
                    buggy_line,
                    fixed_line,
                    file_path: format!("synthetic/{}.java", fixed.name),
                });
            }
        }
    }
    Err(PatternError::Inapplicable { label: label.to_string() })
}
