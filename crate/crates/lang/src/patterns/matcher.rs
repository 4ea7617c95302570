use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, FunctionDecl, NodeKind};
use crate::delta::{changed_statement, signature_diff, statement_count_delta, StatementUnit};
use crate::error::PatternError;
use crate::label::DefectLabel;

/// A recognised defect-fix change. Statements and `site` refer to the
/// buggy version; `site` indexes its token list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternMatch {
    pub label: DefectLabel,
    pub before_stmt: AstNode,
    pub after_stmt: AstNode,
    pub site: (usize, usize),
}

/// Deepest pair of corresponding subtrees that contains every difference,
/// together with the pair of parents it hangs from.
struct Root<'a> {
    a: &'a AstNode,
    b: &'a AstNode,
    parent: Option<(&'a AstNode, &'a AstNode, usize)>,
}

fn diff_root<'a>(a: &'a AstNode, b: &'a AstNode, parent: Option<(&'a AstNode, &'a AstNode, usize)>) -> Root<'a> {
    if a.kind == b.kind && a.text == b.text && a.children.len() == b.children.len() {
        let mut diffs = (0..a.children.len()).filter(|&i| !a.children[i].same_shape(&b.children[i]));
        if let (Some(i), None) = (diffs.next(), diffs.next()) {
            return diff_root(&a.children[i], &b.children[i], Some((a, b, i)));
        }
    }
    Root { a, b, parent }
}

/// Classifies the change `buggy -> fixed`. Returns `Ok(None)` when the
/// change is a single-statement (or signature-decoration) change that fits
/// no pattern.
pub fn match_pattern(buggy: &FunctionDecl, fixed: &FunctionDecl) -> Result<Option<PatternMatch>, PatternError> {
    let sig = signature_diff(buggy, fixed);
    let delta = statement_count_delta(buggy, fixed);
    if sig.any() {
        if !sig.is_decoration_only() || !delta.is_empty() {
            return Err(PatternError::NotSingleStatement {
                changed: delta.changed,
                inserted: delta.inserted,
                deleted: delta.deleted,
                signature: true,
            });
        }
        return Ok(match_signature(buggy, fixed));
    }
    if !delta.is_single_statement() {
        return Err(PatternError::NotSingleStatement {
            changed: delta.changed,
            inserted: delta.inserted,
            deleted: delta.deleted,
            signature: false,
        });
    }
    let (ua, ub) = changed_statement(buggy, fixed).expect("single changed statement");
    Ok(match_statement(&ua, &ub).map(|(label, site)| PatternMatch {
        label,
        before_stmt: ua.node.clone(),
        after_stmt: ub.node.clone(),
        site,
    }))
}

fn match_signature(buggy: &FunctionDecl, fixed: &FunctionDecl) -> Option<PatternMatch> {
    let mods_changed = buggy.modifiers != fixed.modifiers;
    let throws_changed = buggy.throws_list != fixed.throws_list;
    let label = if mods_changed && !throws_changed {
        DefectLabel::ChangeModifier
    } else if throws_changed && !mods_changed {
        let has_all = |outer: &[String], inner: &[String]| inner.iter().all(|t| outer.contains(t));
        if fixed.throws_list.len() > buggy.throws_list.len() && has_all(&fixed.throws_list, &buggy.throws_list) {
            DefectLabel::MissingThrowsException
        } else if fixed.throws_list.len() < buggy.throws_list.len() && has_all(&buggy.throws_list, &fixed.throws_list) {
            DefectLabel::DeleteThrowsException
        } else {
            return None;
        }
    } else {
        return None;
    };
    Some(PatternMatch {
        label,
        before_stmt: buggy.header.clone(),
        after_stmt: fixed.header.clone(),
        site: buggy.header.token_span,
    })
}

/// The expression pair compared for a changed unit. Loop and `if` headers
/// compare their controlling expressions; other headers carry no
/// expression of their own.
fn comparable<'a>(u: &StatementUnit<'a>) -> Option<&'a AstNode> {
    if !u.header_only {
        return Some(u.node);
    }
    match u.node.kind {
        NodeKind::If | NodeKind::While => Some(&u.node.children[0]),
        NodeKind::DoWhile => Some(&u.node.children[1]),
        NodeKind::For | NodeKind::ForEach | NodeKind::Catch => Some(u.node),
        _ => None,
    }
}

fn match_statement(ua: &StatementUnit<'_>, ub: &StatementUnit<'_>) -> Option<(DefectLabel, (usize, usize))> {
    if ua.node.kind != ub.node.kind || ua.header_only != ub.header_only {
        return None;
    }
    // Headers of `for`/`catch` must not look into the body.
    let (a, b) = match (comparable(ua), comparable(ub)) {
        (Some(a), Some(b)) => (a, b),
        _ => return None,
    };
    let (a, b) = if ua.header_only && matches!(a.kind, NodeKind::For | NodeKind::ForEach | NodeKind::Catch) {
        let n = a.children.len() - 1;
        let ra = diff_root_prefix(a, b, n)?;
        (ra.0, ra.1)
    } else {
        (a, b)
    };
    let root = diff_root(a, b, None);
    let site = root.a.token_span;
    let if_cond = (ua.header_only && ua.node.kind == NodeKind::If).then_some((a, b));
    rules(&root, if_cond).map(|l| (l, site))
}

/// For headers, the single differing non-body child.
fn diff_root_prefix<'a>(a: &'a AstNode, b: &'a AstNode, n: usize) -> Option<(&'a AstNode, &'a AstNode)> {
    if b.children.len() != a.children.len() {
        return None;
    }
    let mut diffs = (0..n).filter(|&i| !a.children[i].same_shape(&b.children[i]));
    match (diffs.next(), diffs.next()) {
        (Some(i), None) => Some((&a.children[i], &b.children[i])),
        _ => None,
    }
}

fn rules(r: &Root<'_>, if_cond: Option<(&AstNode, &AstNode)>) -> Option<DefectLabel> {
    use DefectLabel::*;
    let (a, b) = (r.a, r.b);
    let parent_kind = r.parent.map(|(p, _, _)| p.kind);
    let is_receiver = matches!(r.parent, Some((p, _, 0)) if p.kind == NodeKind::Call && p.children.len() == 2);

    let same_kind_text_changed = a.kind == b.kind && a.text != b.text && a.children.len() == b.children.len()
        && a.children.iter().zip(&b.children).all(|(x, y)| x.same_shape(y));

    if !is_receiver
        && ((a.kind == NodeKind::Identifier && b.kind == NodeKind::Identifier)
            || (a.kind == NodeKind::FieldAccess && same_kind_text_changed))
    {
        return Some(ChangeIdentifierUsed);
    }
    if a.is_numeric_literal() && b.is_numeric_literal() {
        return Some(ChangeNumericLiteral);
    }
    if a.is_boolean_literal() && b.is_boolean_literal() {
        return Some(ChangeBooleanLiteral);
    }
    if is_modifier_change(r) {
        return Some(ChangeModifier);
    }
    if a.kind == NodeKind::Call && same_kind_text_changed {
        return Some(WrongFunctionName);
    }
    let call_args = a.kind == NodeKind::Args && parent_kind == Some(NodeKind::Call);
    if call_args && b.children.len() > a.children.len() {
        return Some(SameFunctionMoreArgs);
    }
    if call_args && b.children.len() < a.children.len() {
        return Some(SameFunctionLessArgs);
    }
    if is_receiver || receiver_added_or_removed(a, b) {
        return Some(SameFunctionChangeCaller);
    }
    if call_args && is_swap(&a.children, &b.children) {
        return Some(SameFunctionSwapArgs);
    }
    if a.kind == NodeKind::BinaryOp && same_kind_text_changed {
        return Some(ChangeBinaryOperator);
    }
    if is_unary_change(a, b, same_kind_text_changed) {
        return Some(ChangeUnaryOperator);
    }
    if parent_kind == Some(NodeKind::BinaryOp) {
        return Some(ChangeOperand);
    }
    if let Some((ca, cb)) = if_cond {
        if extends_condition(ca, cb, "&&") {
            return Some(MoreSpecificIf);
        }
        if extends_condition(ca, cb, "||") {
            return Some(LessSpecificIf);
        }
    }
    None
}

fn is_modifier_change(r: &Root<'_>) -> bool {
    let (a, b) = (r.a, r.b);
    if a.kind == NodeKind::Modifier && b.kind == NodeKind::Modifier {
        return true;
    }
    if a.kind != b.kind || !matches!(a.kind, NodeKind::VarDecl | NodeKind::Param) {
        return false;
    }
    let rest = |n: &AstNode| n.children.iter().filter(|c| c.kind != NodeKind::Modifier).cloned().collect::<Vec<_>>();
    let mods = |n: &AstNode| n.children.iter().filter(|c| c.kind == NodeKind::Modifier).map(|c| c.text.clone()).collect::<Vec<_>>();
    let (ra, rb) = (rest(a), rest(b));
    ra.len() == rb.len() && ra.iter().zip(&rb).all(|(x, y)| x.same_shape(y)) && mods(a) != mods(b)
}

fn receiver_added_or_removed(a: &AstNode, b: &AstNode) -> bool {
    a.kind == NodeKind::Call
        && b.kind == NodeKind::Call
        && a.text == b.text
        && a.children.len() != b.children.len()
        && a.children.last().unwrap().same_shape(b.children.last().unwrap())
}

fn is_swap(a: &[AstNode], b: &[AstNode]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let diffs: Vec<usize> = (0..a.len()).filter(|&i| !a[i].same_shape(&b[i])).collect();
    matches!(diffs.as_slice(), [i, j] if a[*i].same_shape(&b[*j]) && a[*j].same_shape(&b[*i]))
}

fn is_unary_change(a: &AstNode, b: &AstNode, same_kind_text_changed: bool) -> bool {
    if a.kind == NodeKind::UnaryOp && same_kind_text_changed {
        return true;
    }
    let wraps = |u: &AstNode, x: &AstNode| {
        u.kind == NodeKind::UnaryOp && !u.text.contains("++") && !u.text.contains("--") && u.children[0].unparen().same_shape(x.unparen())
    };
    wraps(a, b) || wraps(b, a)
}

/// `fixed` is `buggy op X` or `X op buggy`.
fn extends_condition(buggy: &AstNode, fixed: &AstNode, op: &str) -> bool {
    let (c, f) = (buggy.unparen(), fixed.unparen());
    f.kind == NodeKind::BinaryOp
        && f.text == op
        && f.children.iter().any(|side| side.unparen().same_shape(c))
}
