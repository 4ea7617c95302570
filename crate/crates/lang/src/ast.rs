use serde::{Deserialize, Serialize};

use crate::lexer::{detokenize, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Function,
    Block,
    If,
    Return,
    ExpressionStmt,
    VarDecl,
    Assign,
    Call,
    BinaryOp,
    UnaryOp,
    Identifier,
    Literal,
    Throws,
    Modifier,
    Param,
    /// `name [= init]` inside a `VarDecl`.
    Declarator,
    Type,
    /// Argument list of a `Call` or `New`.
    Args,
    FieldAccess,
    ArrayAccess,
    New,
    ArrayInit,
    Cast,
    Conditional,
    Paren,
    /// `this` or `super`.
    This,
    While,
    DoWhile,
    For,
    ForInit,
    ForCond,
    ForUpdate,
    ForEach,
    Try,
    Catch,
    Finally,
    Throw,
    Break,
    Continue,
    Empty,
}

/// A syntax tree node. `token_span` is a half-open range into the token
/// list of the enclosing [`FunctionDecl`].
///
/// `text` carries the payload for nodes that have one: the name of an
/// identifier, call, field or function, the literal text, the operator
/// symbol (postfix increments are spelled `post++` / `post--`), the
/// modifier keyword, or the normalized spelling of a type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: NodeKind,
    pub text: String,
    pub children: Vec<AstNode>,
    pub token_span: (usize, usize),
}

impl AstNode {
    pub fn new(kind: NodeKind, text: impl Into<String>, children: Vec<AstNode>, token_span: (usize, usize)) -> Self {
        Self { kind, text: text.into(), children, token_span }
    }

    pub fn leaf(kind: NodeKind, text: impl Into<String>, index: usize) -> Self {
        Self::new(kind, text, Vec::new(), (index, index + 1))
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Receiver of a call, if there is one.
    pub fn call_receiver(&self) -> Option<&AstNode> {
        debug_assert_eq!(self.kind, NodeKind::Call);
        (self.children.len() == 2).then(|| &self.children[0])
    }

    /// Argument expressions of a call or `new`.
    pub fn call_args(&self) -> &[AstNode] {
        self.children
            .iter()
            .find(|c| c.kind == NodeKind::Args)
            .map(|a| a.children.as_slice())
            .unwrap_or(&[])
    }

    /// Strips any number of enclosing parentheses.
    pub fn unparen(&self) -> &AstNode {
        let mut n = self;
        while n.kind == NodeKind::Paren {
            n = &n.children[0];
        }
        n
    }

    /// Structural equality that ignores token positions.
    pub fn same_shape(&self, other: &AstNode) -> bool {
        self.kind == other.kind
            && self.text == other.text
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_shape(b))
    }

    pub fn is_boolean_literal(&self) -> bool {
        self.kind == NodeKind::Literal && (self.text == "true" || self.text == "false")
    }

    pub fn is_numeric_literal(&self) -> bool {
        self.kind == NodeKind::Literal
            && self.text.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.')
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a AstNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    /// Normalized source text of this node.
    pub fn source(&self, tokens: &[Token]) -> String {
        let (s, e) = self.token_span;
        detokenize(&tokens[s..e].iter().map(|t| t.text.as_str()).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub type_name: String,
    pub name: String,
    pub node: AstNode,
}

/// One parsed function (method or constructor).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub name: String,
    /// `None` for constructors.
    pub return_type: Option<String>,
    pub params: Vec<Param>,
    pub modifiers: Vec<String>,
    pub throws_list: Vec<String>,
    /// Everything before the body: modifiers, return type, params, throws.
    pub header: AstNode,
    pub body: AstNode,
    /// Tokens of this function only; all token spans index into it.
    pub tokens: Vec<Token>,
    /// Byte range in the source the function was parsed from.
    pub source_span: (usize, usize),
}

impl FunctionDecl {
    pub fn first_line(&self) -> usize {
        self.tokens.first().map(|t| t.line).unwrap_or(1)
    }

    pub fn last_line(&self) -> usize {
        self.tokens.last().map(|t| t.line).unwrap_or(1)
    }

    pub fn normalized(&self) -> String {
        detokenize(&self.tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>())
    }

    pub fn token_texts(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.clone()).collect()
    }
}
