use fixline_lang::{build_dfg, parse_function, DataFlowGraph, ParseError};

use crate::vocab::{Vocabulary, CLS, SEP};

/// Position index shared by every data-flow node.
pub const NODE_POSITION: usize = 1;
/// Position index of [CLS]; code tokens and [SEP] follow consecutively.
pub const FIRST_POSITION: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Special,
    CodeToken,
    DfgNode,
}

/// `[CLS] code [SEP] nodes` with its attention mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderInput {
    pub ids: Vec<usize>,
    pub positions: Vec<usize>,
    pub segments: Vec<Segment>,
    /// Row-major `len x len`; `allowed[i * len + j]` lets `i` attend `j`.
    pub allowed: Vec<bool>,
    pub n_code: usize,
    pub n_vars: usize,
}

impl EncoderInput {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.len() + j]
    }

    pub fn sep_index(&self) -> usize {
        self.n_code + 1
    }
}

/// Tokens and data-flow graph of one parsed function.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedFunction {
    pub tokens: Vec<String>,
    pub dfg: DataFlowGraph,
}

pub fn prepare(source: &str) -> Result<PreparedFunction, ParseError> {
    let decl = parse_function(source)?;
    let dfg = build_dfg(&decl);
    Ok(PreparedFunction { tokens: decl.token_texts(), dfg })
}

/// Lays out one function for the encoder. Over-long inputs lose code from
/// the tail first, together with the nodes aligned to dropped tokens.
pub fn build_input<S: AsRef<str>>(code: &[S], dfg: &DataFlowGraph, vocab: &Vocabulary, max_len: usize) -> EncoderInput {
    assert!(max_len >= 3, "max_len must leave room for [CLS] and [SEP]");
    let budget = max_len - 2;
    let nodes_within = |c: usize| dfg.vars.iter().filter(|v| v.token_index < c).count();
    let mut n_code = code.len();
    while n_code > 0 && n_code + nodes_within(n_code) > budget {
        n_code -= 1;
    }
    let kept: Vec<usize> = (0..dfg.vars.len()).filter(|&i| dfg.vars[i].token_index < n_code).collect();
    let mut new_of_old = vec![usize::MAX; dfg.vars.len()];
    for (new, &old) in kept.iter().enumerate() {
        new_of_old[old] = new;
    }
    let n_vars = kept.len();
    let len = n_code + 2 + n_vars;
    let first_node = n_code + 2;

    let mut ids = Vec::with_capacity(len);
    let mut positions = Vec::with_capacity(len);
    let mut segments = Vec::with_capacity(len);
    ids.push(CLS);
    positions.push(FIRST_POSITION);
    segments.push(Segment::Special);
    for (i, t) in code[..n_code].iter().enumerate() {
        ids.push(vocab.id(t.as_ref()));
        positions.push(FIRST_POSITION + 1 + i);
        segments.push(Segment::CodeToken);
    }
    ids.push(SEP);
    positions.push(FIRST_POSITION + 1 + n_code);
    segments.push(Segment::Special);
    for &old in &kept {
        ids.push(vocab.id(&dfg.vars[old].name));
        positions.push(NODE_POSITION);
        segments.push(Segment::DfgNode);
    }

    let mut allowed = vec![false; len * len];
    let mut allow = |i: usize, j: usize| allowed[i * len + j] = true;
    for i in 0..first_node {
        for j in 0..first_node {
            allow(i, j);
        }
    }
    for (new, &old) in kept.iter().enumerate() {
        let node = first_node + new;
        let tok = 1 + dfg.vars[old].token_index;
        allow(node, node);
        allow(node, tok);
        allow(tok, node);
    }
    for &(a, b) in &dfg.edges {
        let (na, nb) = (new_of_old[a], new_of_old[b]);
        if na != usize::MAX && nb != usize::MAX {
            allow(first_node + na, first_node + nb);
            allow(first_node + nb, first_node + na);
        }
    }
    EncoderInput { ids, positions, segments, allowed, n_code, n_vars }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use fixline_lang::{Access, VariableOccurrence};

    use super::*;

    fn var(name: &str, index: usize, token_index: usize) -> VariableOccurrence {
        VariableOccurrence { name: name.into(), index, token_index, access: Access::Read }
    }

    fn code(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    fn allowed_set(inp: &EncoderInput, i: usize) -> BTreeSet<usize> {
        (0..inp.len()).filter(|&j| inp.allows(i, j)).collect()
    }

    #[test]
    fn empty_graph_is_fully_connected() {
        let v = Vocabulary::from_tokens(code(4));
        let inp = build_input(&code(4), &DataFlowGraph::default(), &v, 64);
        assert_eq!(inp.len(), 6);
        assert!(inp.allowed.iter().all(|&a| a));
        assert_eq!(inp.positions, vec![2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn single_node_alignment() {
        let v = Vocabulary::from_tokens(code(4));
        let dfg = DataFlowGraph { vars: vec![var("x", 0, 2)], edges: BTreeSet::new() };
        let inp = build_input(&code(4), &dfg, &v, 64);
        let node = 6;
        assert_eq!(allowed_set(&inp, node), BTreeSet::from([3, node]));
        assert!(inp.allows(3, node));
        assert!(!inp.allows(2, node));
        assert_eq!(inp.positions[node], NODE_POSITION);
        assert_eq!(inp.segments[node], Segment::DfgNode);
    }

    #[test]
    fn edges_are_symmetric_in_the_mask() {
        let v = Vocabulary::from_tokens(code(4));
        let dfg = DataFlowGraph { vars: vec![var("x", 0, 0), var("x", 1, 3)], edges: BTreeSet::from([(0, 1)]) };
        let inp = build_input(&code(4), &dfg, &v, 64);
        assert_eq!(allowed_set(&inp, 7), BTreeSet::from([4, 6, 7]));
        assert_eq!(allowed_set(&inp, 6), BTreeSet::from([1, 6, 7]));
    }

    #[test]
    fn truncation_drops_code_tail_and_orphaned_nodes() {
        let v = Vocabulary::from_tokens(code(6));
        let dfg = DataFlowGraph { vars: vec![var("a", 0, 0), var("b", 1, 5)], edges: BTreeSet::from([(0, 1)]) };
        let inp = build_input(&code(6), &dfg, &v, 8);
        assert_eq!(inp.n_code, 5);
        assert_eq!(inp.n_vars, 1);
        assert_eq!(inp.len(), 8);
        for i in 0..inp.len() {
            assert!(inp.allows(i, i));
        }
    }
}
