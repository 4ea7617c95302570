//! Statement-level alignment of two versions of a function.

use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, FunctionDecl, NodeKind};

/// One comparable statement unit. Compound statements contribute their
/// header (`if (cond)`, `while (cond)`, `else`, `try`, ...) as a unit of
/// its own; nested statements become separate units.
#[derive(Debug, Clone)]
pub struct StatementUnit<'a> {
    pub node: &'a AstNode,
    /// True when the unit is only the header of `node`.
    pub header_only: bool,
    pub token_span: (usize, usize),
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementDelta {
    pub changed: usize,
    pub inserted: usize,
    pub deleted: usize,
}

impl StatementDelta {
    pub fn is_single_statement(&self) -> bool {
        self.changed == 1 && self.inserted == 0 && self.deleted == 0
    }

    pub fn is_empty(&self) -> bool {
        self.changed == 0 && self.inserted == 0 && self.deleted == 0
    }
}

/// Flattens a function body into statement units in source order.
pub fn statement_units(decl: &FunctionDecl) -> Vec<StatementUnit<'_>> {
    let mut out = Vec::new();
    for stmt in &decl.body.children {
        collect_units(decl, stmt, &mut out);
    }
    out
}

fn unit<'a>(decl: &FunctionDecl, node: &'a AstNode, header_only: bool, span: (usize, usize)) -> StatementUnit<'a> {
    let text = decl.tokens[span.0..span.1].iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
    StatementUnit { node, header_only, token_span: span, text }
}

fn collect_units<'a>(decl: &FunctionDecl, node: &'a AstNode, out: &mut Vec<StatementUnit<'a>>) {
    let (start, end) = node.token_span;
    match node.kind {
        NodeKind::Block => {
            for c in &node.children {
                collect_units(decl, c, out);
            }
        }
        NodeKind::If => {
            // `if ( cond )`
            out.push(unit(decl, node, true, (start, node.children[0].token_span.1 + 1)));
            collect_units(decl, &node.children[1], out);
            if let Some(else_branch) = node.children.get(2) {
                let else_tok = else_branch.token_span.0 - 1;
                out.push(unit(decl, node, true, (else_tok, else_tok + 1)));
                collect_units(decl, else_branch, out);
            }
        }
        NodeKind::While | NodeKind::For | NodeKind::ForEach => {
            let body = node.children.last().expect("loop body");
            out.push(unit(decl, node, true, (start, body.token_span.0)));
            collect_units(decl, body, out);
        }
        NodeKind::DoWhile => {
            let body = &node.children[0];
            out.push(unit(decl, node, true, (start, start + 1)));
            collect_units(decl, body, out);
            out.push(unit(decl, node, true, (body.token_span.1, end)));
        }
        NodeKind::Try => {
            out.push(unit(decl, node, true, (start, start + 1)));
            collect_units(decl, &node.children[0], out);
            for c in &node.children[1..] {
                let body = c.children.last().expect("clause body");
                out.push(unit(decl, c, true, (c.token_span.0, body.token_span.0)));
                collect_units(decl, body, out);
            }
        }
        _ => out.push(unit(decl, node, false, (start, end))),
    }
}

/// Matched index pairs of the longest common subsequence of `a` and `b`.
/// Among equally long alignments the one matching the earliest positions
/// of `a` wins.
pub fn lcs_pairs<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let mut table = vec![0usize; (n + 1) * (m + 1)];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[idx(i, j)] = if a[i] == b[j] {
                table[idx(i + 1, j + 1)] + 1
            } else {
                table[idx(i + 1, j)].max(table[idx(i, j + 1)])
            };
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] && table[idx(i, j)] == table[idx(i + 1, j + 1)] + 1 {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[idx(i + 1, j)] > table[idx(i, j + 1)] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Unaligned stretches between consecutive LCS anchors, as half-open index
/// ranges into `before` and `after`.
fn gaps(n: usize, m: usize, pairs: &[(usize, usize)]) -> Vec<((usize, usize), (usize, usize))> {
    let mut out = Vec::new();
    let (mut pi, mut pj) = (0, 0);
    for &(i, j) in pairs.iter().chain(std::iter::once(&(n, m))) {
        if i > pi || j > pj {
            out.push(((pi, i), (pj, j)));
        }
        pi = i + 1;
        pj = j + 1;
    }
    out
}

/// Counts changed, inserted and deleted statements between two versions.
pub fn statement_count_delta(before: &FunctionDecl, after: &FunctionDecl) -> StatementDelta {
    let a = statement_units(before);
    let b = statement_units(after);
    let at: Vec<&str> = a.iter().map(|u| u.text.as_str()).collect();
    let bt: Vec<&str> = b.iter().map(|u| u.text.as_str()).collect();
    let pairs = lcs_pairs(&at, &bt);
    let mut delta = StatementDelta { changed: 0, inserted: 0, deleted: 0 };
    for ((a0, a1), (b0, b1)) in gaps(a.len(), b.len(), &pairs) {
        let (d, i) = (a1 - a0, b1 - b0);
        let c = d.min(i);
        delta.changed += c;
        delta.deleted += d - c;
        delta.inserted += i - c;
    }
    delta
}

/// The single changed statement pair, when the bodies differ in exactly
/// one statement.
pub fn changed_statement<'a, 'b>(
    before: &'a FunctionDecl,
    after: &'b FunctionDecl,
) -> Option<(StatementUnit<'a>, StatementUnit<'b>)> {
    let a = statement_units(before);
    let b = statement_units(after);
    let at: Vec<&str> = a.iter().map(|u| u.text.as_str()).collect();
    let bt: Vec<&str> = b.iter().map(|u| u.text.as_str()).collect();
    let pairs = lcs_pairs(&at, &bt);
    let g = gaps(a.len(), b.len(), &pairs);
    match g.as_slice() {
        [((a0, a1), (b0, b1))] if a1 - a0 == 1 && b1 - b0 == 1 => {
            Some((a[*a0].clone(), b[*b0].clone()))
        }
        _ => None,
    }
}

/// Which parts of the function signature differ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureDiff {
    pub name: bool,
    pub return_type: bool,
    pub params: bool,
    pub modifiers: bool,
    pub throws: bool,
}

impl SignatureDiff {
    pub fn any(&self) -> bool {
        self.name || self.return_type || self.params || self.modifiers || self.throws
    }

    /// Only modifiers and/or the throws clause changed.
    pub fn is_decoration_only(&self) -> bool {
        self.any() && !self.name && !self.return_type && !self.params
    }
}

pub fn signature_diff(before: &FunctionDecl, after: &FunctionDecl) -> SignatureDiff {
    let params = |f: &FunctionDecl| f.params.iter().map(|p| (p.type_name.clone(), p.name.clone())).collect::<Vec<_>>();
    SignatureDiff {
        name: before.name != after.name,
        return_type: before.return_type != after.return_type,
        params: params(before) != params(after),
        modifiers: before.modifiers != after.modifiers,
        throws: before.throws_list != after.throws_list,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_function;

    fn delta(a: &str, b: &str) -> (usize, usize, usize) {
        let d = statement_count_delta(&parse_function(a).unwrap(), &parse_function(b).unwrap());
        (d.changed, d.inserted, d.deleted)
    }

    const BASE: &str = "int f(int x) { int y = x * 2; if (y > 3) { y = 3; } return y + 1; }";

    #[test]
    fn identical() {
        assert_eq!(delta(BASE, BASE), (0, 0, 0));
    }

    #[test]
    fn whitespace_is_invisible() {
        let spaced = "int f(int x) {\n  int y = x*2;\n  if (y>3) {\n    y = 3;\n  }\n  return y+1;\n}";
        assert_eq!(delta(BASE, spaced), (0, 0, 0));
    }

    #[test]
    fn edited_return() {
        let b = "int f(int x) { int y = x * 2; if (y > 3) { y = 3; } return y + 2; }";
        assert_eq!(delta(BASE, b), (1, 0, 0));
    }

    #[test]
    fn added_statement() {
        let b = "int f(int x) { int y = x * 2; log(y); if (y > 3) { y = 3; } return y + 1; }";
        assert_eq!(delta(BASE, b), (0, 1, 0));
        assert_eq!(delta(b, BASE), (0, 0, 1));
    }

    #[test]
    fn if_header_is_its_own_unit() {
        let b = "int f(int x) { int y = x * 2; if (y > 3 && x > 0) { y = 3; } return y + 1; }";
        assert_eq!(delta(BASE, b), (1, 0, 0));
        let (fa, fb) = (parse_function(BASE).unwrap(), parse_function(b).unwrap());
        let (ua, ub) = changed_statement(&fa, &fb).unwrap();
        assert!(ua.header_only && ub.header_only);
        assert_eq!(ua.text, "if ( y > 3 )");
    }

    #[test]
    fn two_edits() {
        let b = "int f(int x) { int y = x * 3; if (y > 3) { y = 3; } return y + 2; }";
        assert_eq!(delta(BASE, b), (2, 0, 0));
    }

    #[test]
    fn earliest_tie_break() {
        assert_eq!(lcs_pairs(&["a", "b"], &["b", "a"]), vec![(0, 1)]);
        assert_eq!(lcs_pairs(&["a", "a"], &["a"]), vec![(0, 0)]);
    }

    #[test]
    fn signature_changes() {
        let a = parse_function("public void f() throws IOException { }").unwrap();
        let b = parse_function("private void f() { }").unwrap();
        let d = signature_diff(&a, &b);
        assert!(d.modifiers && d.throws && !d.params && d.is_decoration_only());
    }
}
