//! Variable sequence and "comes-from" data-flow graph of a function.
//!
//! Occurrences are identifier leaves in left-to-right order. Method names,
//! type names and field names are not variables; `o.f` contributes an
//! occurrence for `o` only.
//!
//! An edge `(i, j)` means the value of occurrence `j` comes from `i`:
//! - every read on the right-hand side of a declaration or assignment flows
//!   into the written variable;
//! - every read is reached by the in-scope definitions of the same name.
//!   Branches are joined at the end of an `if`; loop bodies are analysed
//!   twice so that definitions in the body reach the loop head.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, FunctionDecl, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Access {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableOccurrence {
    pub name: String,
    pub index: usize,
    pub token_index: usize,
    pub access: Access,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFlowGraph {
    pub vars: Vec<VariableOccurrence>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl DataFlowGraph {
    /// Returns the graph with occurrences reordered by `order`, where
    /// `order[new] = old`, and edges remapped accordingly.
    pub fn permuted(&self, order: &[usize]) -> DataFlowGraph {
        let mut new_of_old = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_of_old[old] = new;
        }
        let vars = order
            .iter()
            .enumerate()
            .map(|(new, &old)| VariableOccurrence { index: new, ..self.vars[old].clone() })
            .collect();
        let edges = self.edges.iter().map(|&(a, b)| (new_of_old[a], new_of_old[b])).collect();
        DataFlowGraph { vars, edges }
    }
}

/// Lists variable occurrences in leaf order, parameters first.
pub fn extract_variables(decl: &FunctionDecl) -> Vec<VariableOccurrence> {
    let mut out = Vec::new();
    for p in &decl.params {
        collect(&p.node, Access::Write, &mut out);
    }
    collect(&decl.body, Access::Read, &mut out);
    for (i, v) in out.iter_mut().enumerate() {
        v.index = i;
    }
    out
}

fn push(out: &mut Vec<VariableOccurrence>, node: &AstNode, access: Access) {
    out.push(VariableOccurrence { name: node.text.clone(), index: 0, token_index: node.token_span.0, access });
}

/// `ctx` is the access of a bare identifier at this position.
fn collect(node: &AstNode, ctx: Access, out: &mut Vec<VariableOccurrence>) {
    match node.kind {
        NodeKind::Identifier => push(out, node, ctx),
        NodeKind::Type | NodeKind::Literal | NodeKind::This | NodeKind::Modifier => {}
        NodeKind::Param => {
            for c in &node.children {
                collect(c, Access::Write, out);
            }
        }
        NodeKind::Declarator => {
            push(out, &node.children[0], Access::Write);
            for c in &node.children[1..] {
                collect(c, Access::Read, out);
            }
        }
        NodeKind::Assign => {
            let target = &node.children[0];
            if target.kind == NodeKind::Identifier {
                push(out, target, Access::Write);
            } else {
                collect(target, Access::Read, out);
            }
            collect(&node.children[1], Access::Read, out);
        }
        NodeKind::UnaryOp if is_increment(&node.text) => {
            let target = &node.children[0];
            if target.kind == NodeKind::Identifier {
                push(out, target, Access::Write);
            } else {
                collect(target, Access::Read, out);
            }
        }
        _ => {
            for c in &node.children {
                collect(c, Access::Read, out);
            }
        }
    }
}

fn is_increment(op: &str) -> bool {
    matches!(op, "++" | "--" | "post++" | "post--")
}

/// Reaching definitions: name -> occurrence indices of writes.
type Defs = BTreeMap<String, BTreeSet<usize>>;

struct Analysis<'a> {
    by_token: HashMap<usize, usize>,
    vars: &'a [VariableOccurrence],
    edges: BTreeSet<(usize, usize)>,
    /// Names declared in each open lexical scope.
    scopes: Vec<Vec<String>>,
}

impl Analysis<'_> {
    fn occ(&self, node: &AstNode) -> Option<usize> {
        self.by_token.get(&node.token_span.0).copied()
    }

    fn edge(&mut self, from: usize, to: usize) {
        if from != to {
            self.edges.insert((from, to));
        }
    }

    fn read(&mut self, idx: usize, defs: &Defs) {
        if let Some(ds) = defs.get(&self.vars[idx].name) {
            let ds: Vec<usize> = ds.iter().copied().collect();
            for d in ds {
                self.edge(d, idx);
            }
        }
    }

    fn declare(&mut self, idx: usize, defs: &mut Defs) {
        let name = self.vars[idx].name.clone();
        if let Some(scope) = self.scopes.last_mut() {
            scope.push(name.clone());
        }
        defs.insert(name, BTreeSet::from([idx]));
    }

    fn write(&mut self, idx: usize, defs: &mut Defs) {
        defs.insert(self.vars[idx].name.clone(), BTreeSet::from([idx]));
    }

    fn push_scope(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn pop_scope(&mut self, defs: &mut Defs) {
        for name in self.scopes.pop().unwrap_or_default() {
            defs.remove(&name);
        }
    }

    /// Evaluates an expression and returns the occurrences whose values
    /// flow into its result.
    fn expr(&mut self, node: &AstNode, defs: &mut Defs) -> Vec<usize> {
        match node.kind {
            NodeKind::Identifier => match self.occ(node) {
                Some(i) => {
                    self.read(i, defs);
                    vec![i]
                }
                None => Vec::new(),
            },
            NodeKind::Literal | NodeKind::This | NodeKind::Type => Vec::new(),
            NodeKind::Assign => {
                let target = &node.children[0];
                let mut sources = self.expr(&node.children[1], defs);
                if target.kind == NodeKind::Identifier {
                    let Some(w) = self.occ(target) else { return sources };
                    if node.text != "=" {
                        // Compound assignment also reads the old value.
                        self.read(w, defs);
                    }
                    for s in &sources {
                        self.edge(*s, w);
                    }
                    self.write(w, defs);
                    vec![w]
                } else {
                    let t = self.expr(target, defs);
                    sources.extend(t);
                    sources
                }
            }
            NodeKind::UnaryOp if is_increment(&node.text) => {
                let target = &node.children[0];
                if target.kind == NodeKind::Identifier {
                    let Some(w) = self.occ(target) else { return Vec::new() };
                    self.read(w, defs);
                    self.write(w, defs);
                    vec![w]
                } else {
                    self.expr(target, defs)
                }
            }
            NodeKind::Conditional => {
                let mut out = self.expr(&node.children[0], defs);
                let mut then_defs = defs.clone();
                out.extend(self.expr(&node.children[1], &mut then_defs));
                out.extend(self.expr(&node.children[2], defs));
                join_into(defs, &then_defs);
                out
            }
            _ => {
                let mut out = Vec::new();
                for c in &node.children {
                    out.extend(self.expr(c, defs));
                }
                out
            }
        }
    }

    fn stmt(&mut self, node: &AstNode, defs: &mut Defs) {
        match node.kind {
            NodeKind::Block => {
                self.push_scope();
                for c in &node.children {
                    self.stmt(c, defs);
                }
                self.pop_scope(defs);
            }
            NodeKind::VarDecl => {
                for d in node.children.iter().filter(|c| c.kind == NodeKind::Declarator) {
                    let sources = match d.children.get(1) {
                        Some(init) => self.expr(init, defs),
                        None => Vec::new(),
                    };
                    if let Some(w) = self.occ(&d.children[0]) {
                        for s in sources {
                            self.edge(s, w);
                        }
                        self.declare(w, defs);
                    }
                }
            }
            NodeKind::If => {
                self.expr(&node.children[0], defs);
                let mut then_defs = defs.clone();
                self.branch(&node.children[1], &mut then_defs);
                if let Some(e) = node.children.get(2) {
                    self.branch(e, defs);
                }
                join_into(defs, &then_defs);
            }
            NodeKind::While => {
                let (cond, body) = (&node.children[0], &node.children[1]);
                self.looped(defs, |a, d| {
                    a.expr(cond, d);
                    a.branch(body, d);
                });
            }
            NodeKind::DoWhile => {
                let (body, cond) = (&node.children[0], &node.children[1]);
                self.looped(defs, |a, d| {
                    a.branch(body, d);
                    a.expr(cond, d);
                });
            }
            NodeKind::For => {
                self.push_scope();
                let (init, cond, update, body) = (&node.children[0], &node.children[1], &node.children[2], &node.children[3]);
                for c in &init.children {
                    if c.kind == NodeKind::VarDecl {
                        self.stmt(c, defs);
                    } else {
                        self.expr(c, defs);
                    }
                }
                self.looped(defs, |a, d| {
                    for c in &cond.children {
                        a.expr(c, d);
                    }
                    a.branch(body, d);
                    for c in &update.children {
                        a.expr(c, d);
                    }
                });
                self.pop_scope(defs);
            }
            NodeKind::ForEach => {
                self.push_scope();
                let (param, iterable, body) = (&node.children[0], &node.children[1], &node.children[2]);
                let sources = self.expr(iterable, defs);
                let var = param.children.last().and_then(|n| self.occ(n));
                self.looped(defs, |a, d| {
                    if let Some(w) = var {
                        for s in &sources {
                            a.edge(*s, w);
                        }
                        a.declare(w, d);
                    }
                    a.branch(body, d);
                });
                self.pop_scope(defs);
            }
            NodeKind::Try => {
                let before = defs.clone();
                self.stmt(&node.children[0], defs);
                let after_try = defs.clone();
                for clause in &node.children[1..] {
                    match clause.kind {
                        NodeKind::Catch => {
                            let mut d = before.clone();
                            join_into(&mut d, &after_try);
                            self.push_scope();
                            if let Some(w) = clause.children[0].children.last().and_then(|n| self.occ(n)) {
                                self.declare(w, &mut d);
                            }
                            self.stmt(&clause.children[1], &mut d);
                            self.pop_scope(&mut d);
                            join_into(defs, &d);
                        }
                        _ => self.stmt(&clause.children[0], defs),
                    }
                }
            }
            NodeKind::ExpressionStmt | NodeKind::Return | NodeKind::Throw => {
                for c in &node.children {
                    self.expr(c, defs);
                }
            }
            _ => {
                for c in &node.children {
                    self.expr(c, defs);
                }
            }
        }
    }

    /// A statement in its own scope (loop or branch body).
    fn branch(&mut self, node: &AstNode, defs: &mut Defs) {
        self.push_scope();
        self.stmt(node, defs);
        self.pop_scope(defs);
    }

    /// Forward pass, then one back-edge pass seeded with the join of the
    /// entry state and the first pass's exit state.
    fn looped(&mut self, defs: &mut Defs, mut body: impl FnMut(&mut Self, &mut Defs)) {
        let entry = defs.clone();
        let mut first = entry.clone();
        body(self, &mut first);
        let mut second = entry.clone();
        join_into(&mut second, &first);
        body(self, &mut second);
        join_into(defs, &first);
        join_into(defs, &second);
    }
}

fn join_into(defs: &mut Defs, other: &Defs) {
    for (name, ds) in other {
        // Names missing from `defs` went out of scope there or were never
        // defined on that path; keep them only if they were visible before.
        if let Some(mine) = defs.get_mut(name) {
            mine.extend(ds.iter().copied());
        }
    }
}

/// Builds the data-flow graph for `decl`.
pub fn build_dfg(decl: &FunctionDecl) -> DataFlowGraph {
    let vars = extract_variables(decl);
    let by_token = vars.iter().map(|v| (v.token_index, v.index)).collect();
    let mut a = Analysis { by_token, vars: &vars, edges: BTreeSet::new(), scopes: vec![Vec::new()] };
    let mut defs = Defs::new();
    for p in &decl.params {
        if let Some(w) = p.node.children.last().and_then(|n| a.occ(n)) {
            a.declare(w, &mut defs);
        }
    }
    a.stmt(&decl.body, &mut defs);
    let edges = a.edges;
    DataFlowGraph { vars, edges }
}
