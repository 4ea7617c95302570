//! Recursive-descent parser for a statement-oriented Java subset.
//!
//! Supported: local declarations, assignments, `if`/`else`, loops,
//! `try`/`catch`/`finally`, `return`, `throw`, calls with receivers,
//! field and array access, `new`, casts, the ternary operator, unary and
//! binary expressions, literals, `throws` clauses and modifiers.
//! Generics, lambdas, method references, anonymous classes, `switch`,
//! `synchronized` blocks, labels and local classes are reported as
//! [`ParseError::UnsupportedConstruct`].

use crate::ast::{AstNode, FunctionDecl, NodeKind, Param};
use crate::error::ParseError;
use crate::lexer::{tokenize, Token, TokenKind};

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void", "var"];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" | "instanceof" => 7,
        "<<" | ">>" | ">>>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

/// Parses a source string holding exactly one function declaration.
pub fn parse_function(source: &str) -> Result<FunctionDecl, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(&tokens);
    let decl = p.function()?;
    if !p.at_end() {
        return Err(p.expected(&["end of input"]));
    }
    Ok(decl)
}

/// Parses a function from an already tokenized slice. Token spans in the
/// result index into `tokens`.
pub fn parse_function_tokens(tokens: &[Token]) -> Result<FunctionDecl, ParseError> {
    let mut p = Parser::new(tokens);
    let decl = p.function()?;
    if !p.at_end() {
        return Err(p.expected(&["end of input"]));
    }
    Ok(decl)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token]) -> Self {
        Self { tokens, pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + n)
    }

    fn peek_is(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.text == text && t.kind != TokenKind::StringLiteral)
    }

    fn peek_at_is(&self, n: usize, text: &str) -> bool {
        self.peek_at(n).is_some_and(|t| t.text == text && t.kind != TokenKind::StringLiteral)
    }

    fn peek_kind(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.peek_is(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn position(&self) -> (usize, usize, String) {
        match self.peek() {
            Some(t) => (t.line, t.column, t.text.clone()),
            None => {
                let last = self.tokens.last();
                (
                    last.map(|t| t.line).unwrap_or(1),
                    last.map(|t| t.column + t.text.chars().count()).unwrap_or(1),
                    "end of input".to_string(),
                )
            }
        }
    }

    fn expected(&self, expected: &[&str]) -> ParseError {
        let (line, column, found) = self.position();
        ParseError::Syntax { line, column, found, expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    fn unsupported(&self, construct: &str) -> ParseError {
        let (line, column, _) = self.position();
        ParseError::UnsupportedConstruct { construct: construct.to_string(), line, column }
    }

    fn expect(&mut self, text: &str) -> Result<usize, ParseError> {
        if self.eat(text) {
            Ok(self.pos - 1)
        } else {
            Err(self.expected(&[text]))
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok((t.text.clone(), self.pos - 1))
            }
            _ => Err(self.expected(&["identifier"])),
        }
    }

    fn check_generics(&self) -> Result<(), ParseError> {
        if self.peek_is("<") {
            return Err(self.unsupported("generics"));
        }
        Ok(())
    }

    // ---- declarations ----

    fn modifiers(&mut self) -> Vec<AstNode> {
        let mut out = Vec::new();
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.text.as_str()) {
                out.push(AstNode::leaf(NodeKind::Modifier, t.text.clone(), self.pos));
                self.pos += 1;
            } else {
                break;
            }
        }
        out
    }

    fn type_node(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let mut text = String::new();
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()) => {
                text.push_str(&t.text);
                self.pos += 1;
            }
            Some(t) if t.kind == TokenKind::Identifier => {
                text.push_str(&t.text);
                self.pos += 1;
                while self.peek_is(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
                    text.push('.');
                    text.push_str(&self.tokens[self.pos + 1].text);
                    self.pos += 2;
                }
            }
            _ => return Err(self.expected(&["type"])),
        }
        self.check_generics()?;
        while self.peek_is("[") && self.peek_at_is(1, "]") {
            text.push_str("[]");
            self.pos += 2;
        }
        if self.peek_is("...") {
            text.push_str("...");
            self.pos += 1;
        }
        Ok(AstNode::new(NodeKind::Type, text, Vec::new(), (start, self.pos)))
    }

    fn function(&mut self) -> Result<FunctionDecl, ParseError> {
        let start = self.pos;
        let modifier_nodes = self.modifiers();
        self.check_generics()?;
        let mut header_children = modifier_nodes.clone();
        let is_constructor =
            self.peek_kind(TokenKind::Identifier) && self.peek_at_is(1, "(");
        let return_type = if is_constructor {
            None
        } else {
            let ty = self.type_node()?;
            let text = ty.text.clone();
            header_children.push(ty);
            Some(text)
        };
        let (name, _) = self.ident()?;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.peek_is(")") {
            loop {
                let pstart = self.pos;
                let mut pchildren = self.modifiers();
                let ty = self.type_node()?;
                let (pname, pidx) = self.ident()?;
                let mut type_name = ty.text.clone();
                let mut ty = ty;
                while self.peek_is("[") && self.peek_at_is(1, "]") {
                    type_name.push_str("[]");
                    self.pos += 2;
                }
                ty.text = type_name.clone();
                pchildren.push(ty);
                pchildren.push(AstNode::leaf(NodeKind::Identifier, pname.clone(), pidx));
                let node = AstNode::new(NodeKind::Param, pname.clone(), pchildren, (pstart, self.pos));
                header_children.push(node.clone());
                params.push(Param { type_name, name: pname, node });
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        let mut throws_list = Vec::new();
        if self.peek_is("throws") {
            let tstart = self.pos;
            self.pos += 1;
            let mut tchildren = Vec::new();
            loop {
                let ty = self.type_node()?;
                throws_list.push(ty.text.clone());
                tchildren.push(ty);
                if !self.eat(",") {
                    break;
                }
            }
            header_children.push(AstNode::new(NodeKind::Throws, "throws", tchildren, (tstart, self.pos)));
        }
        let header = AstNode::new(NodeKind::Function, name.clone(), header_children, (start, self.pos));
        if !self.peek_is("{") {
            return Err(self.expected(&["{"]));
        }
        let body = self.block()?;
        let tokens = self.tokens[start..self.pos].to_vec();
        let source_span = (
            tokens.first().map(|t| t.offset).unwrap_or(0),
            tokens.last().map(|t| t.end()).unwrap_or(0),
        );
        let mut decl = FunctionDecl {
            name,
            return_type,
            params,
            modifiers: modifier_nodes.iter().map(|m| m.text.clone()).collect(),
            throws_list,
            header,
            body,
            tokens,
            source_span,
        };
        if start != 0 {
            rebase(&mut decl.header, start);
            rebase(&mut decl.body, start);
            for p in &mut decl.params {
                rebase(&mut p.node, start);
            }
        }
        Ok(decl)
    }

    // ---- statements ----

    fn block(&mut self) -> Result<AstNode, ParseError> {
        let start = self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.peek_is("}") {
            if self.at_end() {
                return Err(self.expected(&["}"]));
            }
            stmts.push(self.statement()?);
        }
        self.pos += 1;
        Ok(AstNode::new(NodeKind::Block, "", stmts, (start, self.pos)))
    }

    fn statement(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let Some(tok) = self.peek() else {
            return Err(self.expected(&["statement"]));
        };
        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "if" => return self.if_statement(),
                "while" => {
                    self.pos += 1;
                    let cond = self.paren_condition()?;
                    let body = self.statement()?;
                    return Ok(AstNode::new(NodeKind::While, "while", vec![cond, body], (start, self.pos)));
                }
                "do" => {
                    self.pos += 1;
                    let body = self.statement()?;
                    self.expect("while")?;
                    let cond = self.paren_condition()?;
                    self.expect(";")?;
                    return Ok(AstNode::new(NodeKind::DoWhile, "do", vec![body, cond], (start, self.pos)));
                }
                "for" => return self.for_statement(),
                "try" => return self.try_statement(),
                "return" => {
                    self.pos += 1;
                    let mut children = Vec::new();
                    if !self.peek_is(";") {
                        children.push(self.expression()?);
                    }
                    self.expect(";")?;
                    return Ok(AstNode::new(NodeKind::Return, "return", children, (start, self.pos)));
                }
                "throw" => {
                    self.pos += 1;
                    let e = self.expression()?;
                    self.expect(";")?;
                    return Ok(AstNode::new(NodeKind::Throw, "throw", vec![e], (start, self.pos)));
                }
                "break" | "continue" => {
                    let kind = if tok.text == "break" { NodeKind::Break } else { NodeKind::Continue };
                    self.pos += 1;
                    if self.peek_kind(TokenKind::Identifier) {
                        return Err(self.unsupported("labeled jump"));
                    }
                    self.expect(";")?;
                    return Ok(AstNode::new(kind, tok.text.clone(), Vec::new(), (start, self.pos)));
                }
                "switch" | "synchronized" | "class" | "interface" | "enum" | "assert" | "yield" => {
                    return Err(self.unsupported(&tok.text));
                }
                "final" => return self.local_declaration(),
                _ => {}
            }
        }
        if self.peek_is("{") {
            return self.block();
        }
        if self.eat(";") {
            return Ok(AstNode::new(NodeKind::Empty, ";", Vec::new(), (start, self.pos)));
        }
        if tok.kind == TokenKind::Identifier && self.peek_at_is(1, ":") {
            return Err(self.unsupported("labeled statement"));
        }
        if self.looks_like_declaration() {
            return self.local_declaration();
        }
        let e = self.expression()?;
        self.expect(";")?;
        Ok(AstNode::new(NodeKind::ExpressionStmt, "", vec![e], (start, self.pos)))
    }

    /// Decides between a local declaration and an expression statement by
    /// scanning a type-shaped prefix followed by an identifier.
    fn looks_like_declaration(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        if t.kind == TokenKind::Keyword {
            return PRIMITIVES.contains(&t.text.as_str());
        }
        if t.kind != TokenKind::Identifier {
            return false;
        }
        let mut i = self.pos + 1;
        while i + 1 < self.tokens.len() && self.tokens[i].text == "." && self.tokens[i + 1].kind == TokenKind::Identifier {
            i += 2;
        }
        if self.tokens.get(i).is_some_and(|t| t.text == "<") {
            // `Foo<Bar> x` - an expression statement cannot start with `a < b`.
            return true;
        }
        while i + 1 < self.tokens.len() && self.tokens[i].text == "[" && self.tokens[i + 1].text == "]" {
            i += 2;
        }
        self.tokens.get(i).is_some_and(|t| t.kind == TokenKind::Identifier)
    }

    fn local_declaration(&mut self) -> Result<AstNode, ParseError> {
        let mut decl = self.declaration_body()?;
        self.expect(";")?;
        decl.token_span.1 = self.pos;
        Ok(decl)
    }

    /// `[final] Type name [= init] (, name [= init])*` without the `;`.
    fn declaration_body(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let mut children = self.modifiers();
        let ty = self.type_node()?;
        children.push(ty);
        loop {
            let dstart = self.pos;
            let (name, idx) = self.ident()?;
            let mut dchildren = vec![AstNode::leaf(NodeKind::Identifier, name.clone(), idx)];
            while self.peek_is("[") && self.peek_at_is(1, "]") {
                self.pos += 2;
            }
            if self.eat("=") {
                let init = if self.peek_is("{") { self.array_init()? } else { self.expression()? };
                dchildren.push(init);
            }
            children.push(AstNode::new(NodeKind::Declarator, name, dchildren, (dstart, self.pos)));
            if !self.eat(",") {
                break;
            }
        }
        Ok(AstNode::new(NodeKind::VarDecl, "", children, (start, self.pos)))
    }

    fn array_init(&mut self) -> Result<AstNode, ParseError> {
        let start = self.expect("{")?;
        let mut items = Vec::new();
        while !self.peek_is("}") {
            items.push(if self.peek_is("{") { self.array_init()? } else { self.expression()? });
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(AstNode::new(NodeKind::ArrayInit, "", items, (start, self.pos)))
    }

    fn paren_condition(&mut self) -> Result<AstNode, ParseError> {
        self.expect("(")?;
        let e = self.expression()?;
        self.expect(")")?;
        Ok(e)
    }

    fn if_statement(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let cond = self.paren_condition()?;
        let then = self.statement()?;
        let mut children = vec![cond, then];
        if self.eat("else") {
            children.push(self.statement()?);
        }
        Ok(AstNode::new(NodeKind::If, "if", children, (start, self.pos)))
    }

    fn for_statement(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        self.pos += 1;
        self.expect("(")?;
        let init_start = self.pos;
        let is_decl = self.peek_is("final") || self.looks_like_declaration();
        if is_decl {
            // Enhanced for: `Type name : expr`.
            let save = self.pos;
            let pstart = self.pos;
            let mut pchildren = self.modifiers();
            if let Ok(ty) = self.type_node() {
                if let Ok((name, idx)) = self.ident() {
                    if self.eat(":") {
                        pchildren.push(ty);
                        pchildren.push(AstNode::leaf(NodeKind::Identifier, name.clone(), idx));
                        let param = AstNode::new(NodeKind::Param, name, pchildren, (pstart, idx + 1));
                        let iterable = self.expression()?;
                        self.expect(")")?;
                        let body = self.statement()?;
                        return Ok(AstNode::new(NodeKind::ForEach, "for", vec![param, iterable, body], (start, self.pos)));
                    }
                }
            }
            self.pos = save;
        }
        let mut init_children = Vec::new();
        if is_decl {
            init_children.push(self.declaration_body()?);
        } else {
            while !self.peek_is(";") {
                init_children.push(self.expression()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        let init = AstNode::new(NodeKind::ForInit, "", init_children, (init_start, self.pos));
        self.expect(";")?;
        let cond_start = self.pos;
        let mut cond_children = Vec::new();
        if !self.peek_is(";") {
            cond_children.push(self.expression()?);
        }
        let cond = AstNode::new(NodeKind::ForCond, "", cond_children, (cond_start, self.pos));
        self.expect(";")?;
        let update_start = self.pos;
        let mut update_children = Vec::new();
        while !self.peek_is(")") {
            update_children.push(self.expression()?);
            if !self.eat(",") {
                break;
            }
        }
        let update = AstNode::new(NodeKind::ForUpdate, "", update_children, (update_start, self.pos));
        self.expect(")")?;
        let body = self.statement()?;
        Ok(AstNode::new(NodeKind::For, "for", vec![init, cond, update, body], (start, self.pos)))
    }

    fn try_statement(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        self.pos += 1;
        if self.peek_is("(") {
            return Err(self.unsupported("try-with-resources"));
        }
        let mut children = vec![self.block()?];
        while self.peek_is("catch") {
            let cstart = self.pos;
            self.pos += 1;
            self.expect("(")?;
            let pstart = self.pos;
            let mut pchildren = self.modifiers();
            let ty = self.type_node()?;
            if self.peek_is("|") {
                return Err(self.unsupported("multi-catch"));
            }
            pchildren.push(ty);
            let (name, idx) = self.ident()?;
            pchildren.push(AstNode::leaf(NodeKind::Identifier, name.clone(), idx));
            let param = AstNode::new(NodeKind::Param, name, pchildren, (pstart, self.pos));
            self.expect(")")?;
            let body = self.block()?;
            children.push(AstNode::new(NodeKind::Catch, "catch", vec![param, body], (cstart, self.pos)));
        }
        if self.peek_is("finally") {
            let fstart = self.pos;
            self.pos += 1;
            let body = self.block()?;
            children.push(AstNode::new(NodeKind::Finally, "finally", vec![body], (fstart, self.pos)));
        }
        if children.len() == 1 {
            return Err(self.expected(&["catch", "finally"]));
        }
        Ok(AstNode::new(NodeKind::Try, "try", children, (start, self.pos)))
    }

    // ---- expressions ----

    fn expression(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let lhs = self.conditional()?;
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Operator && ASSIGN_OPS.contains(&t.text.as_str()) {
                self.pos += 1;
                let rhs = self.expression()?;
                return Ok(AstNode::new(NodeKind::Assign, t.text.clone(), vec![lhs, rhs], (start, self.pos)));
            }
            if t.text == "->" {
                return Err(self.unsupported("lambda"));
            }
        }
        Ok(lhs)
    }

    fn conditional(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let cond = self.binary(1)?;
        if self.eat("?") {
            let a = self.expression()?;
            self.expect(":")?;
            let b = self.conditional()?;
            return Ok(AstNode::new(NodeKind::Conditional, "?:", vec![cond, a, b], (start, self.pos)));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let mut lhs = self.unary()?;
        while let Some(t) = self.peek() {
            if !matches!(t.kind, TokenKind::Operator | TokenKind::Keyword) {
                break;
            }
            let Some(prec) = binary_precedence(&t.text) else { break };
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = if t.text == "instanceof" { self.type_node()? } else { self.binary(prec + 1)? };
            lhs = AstNode::new(NodeKind::BinaryOp, t.text.clone(), vec![lhs, rhs], (start, self.pos));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Operator && matches!(t.text.as_str(), "!" | "~" | "-" | "+" | "++" | "--") {
                self.pos += 1;
                let operand = self.unary()?;
                return Ok(AstNode::new(NodeKind::UnaryOp, t.text.clone(), vec![operand], (start, self.pos)));
            }
            if t.text == "(" {
                if let Some(cast_type_end) = self.cast_extent() {
                    self.pos += 1;
                    let ty = self.type_node()?;
                    debug_assert_eq!(self.pos, cast_type_end);
                    self.expect(")")?;
                    let operand = self.unary()?;
                    return Ok(AstNode::new(NodeKind::Cast, ty.text.clone(), vec![ty, operand], (start, self.pos)));
                }
            }
        }
        self.postfix()
    }

    /// If the `(` at the cursor opens a cast, returns the index of the
    /// closing `)`.
    fn cast_extent(&self) -> Option<usize> {
        let mut i = self.pos + 1;
        let first = self.tokens.get(i)?;
        let primitive = first.kind == TokenKind::Keyword && PRIMITIVES.contains(&first.text.as_str());
        if !primitive && first.kind != TokenKind::Identifier {
            return None;
        }
        i += 1;
        while i + 1 < self.tokens.len() && self.tokens[i].text == "." && self.tokens[i + 1].kind == TokenKind::Identifier {
            i += 2;
        }
        while i + 1 < self.tokens.len() && self.tokens[i].text == "[" && self.tokens[i + 1].text == "]" {
            i += 2;
        }
        if self.tokens.get(i)?.text != ")" {
            return None;
        }
        if primitive {
            return Some(i);
        }
        let next = self.tokens.get(i + 1)?;
        let starts_operand = match next.kind {
            TokenKind::Identifier
            | TokenKind::NumericLiteral
            | TokenKind::StringLiteral
            | TokenKind::BooleanLiteral => true,
            TokenKind::Keyword => matches!(next.text.as_str(), "this" | "super" | "new" | "null"),
            TokenKind::Operator => matches!(next.text.as_str(), "!" | "~"),
            TokenKind::Punctuation => next.text == "(",
        };
        starts_operand.then_some(i)
    }

    fn args(&mut self) -> Result<AstNode, ParseError> {
        let start = self.expect("(")?;
        let mut args = Vec::new();
        if !self.peek_is(")") {
            loop {
                args.push(self.expression()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(AstNode::new(NodeKind::Args, "", args, (start, self.pos)))
    }

    fn postfix(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let mut node = self.primary()?;
        loop {
            if self.peek_is(".") {
                self.pos += 1;
                self.check_generics()?;
                if self.peek_is("new") || self.peek_is("class") {
                    return Err(self.unsupported("qualified new or class literal"));
                }
                let name = match self.peek() {
                    Some(t) if t.kind == TokenKind::Identifier || t.text == "this" || t.text == "super" => {
                        self.pos += 1;
                        t.text.clone()
                    }
                    _ => return Err(self.expected(&["identifier"])),
                };
                if self.peek_is("(") {
                    let args = self.args()?;
                    node = AstNode::new(NodeKind::Call, name, vec![node, args], (start, self.pos));
                } else {
                    node = AstNode::new(NodeKind::FieldAccess, name, vec![node], (start, self.pos));
                }
            } else if self.peek_is("[") {
                self.pos += 1;
                let index = self.expression()?;
                self.expect("]")?;
                node = AstNode::new(NodeKind::ArrayAccess, "[]", vec![node, index], (start, self.pos));
            } else if self.peek_is("++") || self.peek_is("--") {
                let op = format!("post{}", self.tokens[self.pos].text);
                self.pos += 1;
                node = AstNode::new(NodeKind::UnaryOp, op, vec![node], (start, self.pos));
            } else if self.peek_is("::") {
                return Err(self.unsupported("method reference"));
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn primary(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        let Some(t) = self.peek() else {
            return Err(self.expected(&["expression"]));
        };
        match t.kind {
            TokenKind::NumericLiteral | TokenKind::StringLiteral | TokenKind::BooleanLiteral => {
                self.pos += 1;
                Ok(AstNode::leaf(NodeKind::Literal, t.text.clone(), start))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                if self.peek_is("->") {
                    return Err(self.unsupported("lambda"));
                }
                if self.peek_is("(") {
                    let args = self.args()?;
                    return Ok(AstNode::new(NodeKind::Call, t.text.clone(), vec![args], (start, self.pos)));
                }
                Ok(AstNode::leaf(NodeKind::Identifier, t.text.clone(), start))
            }
            TokenKind::Keyword => match t.text.as_str() {
                "null" => {
                    self.pos += 1;
                    Ok(AstNode::leaf(NodeKind::Literal, "null", start))
                }
                "this" | "super" => {
                    self.pos += 1;
                    if self.peek_is("(") {
                        let args = self.args()?;
                        return Ok(AstNode::new(NodeKind::Call, t.text.clone(), vec![args], (start, self.pos)));
                    }
                    Ok(AstNode::leaf(NodeKind::This, t.text.clone(), start))
                }
                "new" => self.new_expression(),
                "switch" => Err(self.unsupported("switch")),
                _ => Err(self.expected(&["expression"])),
            },
            TokenKind::Punctuation if t.text == "(" => {
                if self.is_lambda_params() {
                    return Err(self.unsupported("lambda"));
                }
                self.pos += 1;
                let inner = self.expression()?;
                self.expect(")")?;
                Ok(AstNode::new(NodeKind::Paren, "()", vec![inner], (start, self.pos)))
            }
            _ => Err(self.expected(&["expression"])),
        }
    }

    fn is_lambda_params(&self) -> bool {
        let mut depth = 0usize;
        for (i, t) in self.tokens.iter().enumerate().skip(self.pos) {
            match t.text.as_str() {
                "(" => depth += 1,
                ")" => {
                    depth -= 1;
                    if depth == 0 {
                        return self.tokens.get(i + 1).is_some_and(|n| n.text == "->");
                    }
                }
                _ => {}
            }
        }
        false
    }

    fn new_expression(&mut self) -> Result<AstNode, ParseError> {
        let start = self.pos;
        self.pos += 1;
        // Element type without the `[]` suffix, which belongs to the dims.
        let tstart = self.pos;
        let mut text = String::new();
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier || PRIMITIVES.contains(&t.text.as_str()) => {
                text.push_str(&t.text);
                self.pos += 1;
                while self.peek_is(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
                    text.push('.');
                    text.push_str(&self.tokens[self.pos + 1].text);
                    self.pos += 2;
                }
            }
            _ => return Err(self.expected(&["type"])),
        }
        self.check_generics()?;
        let ty = AstNode::new(NodeKind::Type, text.clone(), Vec::new(), (tstart, self.pos));
        if self.peek_is("(") {
            let args = self.args()?;
            if self.peek_is("{") {
                return Err(self.unsupported("anonymous class"));
            }
            return Ok(AstNode::new(NodeKind::New, text, vec![ty, args], (start, self.pos)));
        }
        let mut children = vec![ty];
        let mut dims = 0;
        while self.peek_is("[") {
            self.pos += 1;
            if self.eat("]") {
                dims += 1;
                continue;
            }
            children.push(self.expression()?);
            self.expect("]")?;
            dims += 1;
        }
        if dims == 0 {
            return Err(self.expected(&["(", "["]));
        }
        if self.peek_is("{") {
            children.push(self.array_init()?);
        }
        Ok(AstNode::new(NodeKind::New, format!("{text}{}", "[]".repeat(dims)), children, (start, self.pos)))
    }
}

fn rebase(node: &mut AstNode, by: usize) {
    node.token_span = (node.token_span.0 - by, node.token_span.1 - by);
    for c in &mut node.children {
        rebase(c, by);
    }
}

/// A function found while scanning a whole compilation unit.
#[derive(Debug, Clone)]
pub struct FileFunction {
    pub name: String,
    pub first_line: usize,
    pub last_line: usize,
    /// Token range of the declaration within the file.
    pub token_range: (usize, usize),
    pub parsed: Result<FunctionDecl, ParseError>,
}

/// Scans a compilation unit and returns every method or constructor with a
/// body, parsing each one independently so that one unsupported method
/// does not hide the others. Only lexical errors fail the whole file.
pub fn parse_file(source: &str) -> Result<Vec<FileFunction>, ParseError> {
    let tokens = tokenize(source)?;
    let mut out = Vec::new();
    scan_members(&tokens, 0, tokens.len(), &mut out);
    Ok(out)
}

fn matching(tokens: &[Token], open: usize, end: usize) -> usize {
    let (o, c) = match tokens[open].text.as_str() {
        "{" => ("{", "}"),
        "(" => ("(", ")"),
        _ => ("[", "]"),
    };
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().take(end).skip(open) {
        if t.kind != TokenKind::Punctuation {
            continue;
        }
        if t.text == o {
            depth += 1;
        } else if t.text == c {
            depth -= 1;
            if depth == 0 {
                return i;
            }
        }
    }
    end.saturating_sub(1)
}

/// Walks declarations in `tokens[start..end]`, which is either the whole
/// file or the inside of a type body.
fn scan_members(tokens: &[Token], start: usize, end: usize, out: &mut Vec<FileFunction>) {
    let mut i = start;
    while i < end {
        let member_start = i;
        let mut saw_paren = None;
        let mut saw_assign = false;
        let mut type_keyword = None;
        // Find the end of this member: a `;` or a `{...}` at depth zero.
        while i < end {
            let t = &tokens[i];
            if t.kind == TokenKind::Punctuation && (t.text == "(" || t.text == "[") {
                if t.text == "(" && saw_paren.is_none() {
                    saw_paren = Some(i);
                }
                i = matching(tokens, i, end) + 1;
                continue;
            }
            if t.kind == TokenKind::Operator && t.text == "=" {
                saw_assign = true;
            }
            if t.kind == TokenKind::Keyword && matches!(t.text.as_str(), "class" | "interface" | "enum") && type_keyword.is_none() {
                type_keyword = Some(t.text.clone());
            }
            if t.kind == TokenKind::Punctuation && (t.text == ";" || t.text == "{") {
                break;
            }
            i += 1;
        }
        if i >= end {
            break;
        }
        if tokens[i].text == ";" {
            i += 1;
            continue;
        }
        // tokens[i] is `{`.
        let close = matching(tokens, i, end);
        if saw_assign {
            // `int[] a = {1, 2};` - skip the initializer and the trailing `;`.
            i = close + 1;
            while i < end && tokens[i].text != ";" {
                i += 1;
            }
            i += 1;
            continue;
        }
        match type_keyword.as_deref() {
            Some("class") | Some("interface") => {
                scan_members(tokens, i + 1, close, out);
            }
            Some(_) => {
                // Enum bodies are outside the subset.
            }
            None => {
                if let Some(paren) = saw_paren {
                    let name = paren
                        .checked_sub(1)
                        .map(|n| tokens[n].text.clone())
                        .unwrap_or_default();
                    let slice = &tokens[member_start..=close];
                    out.push(FileFunction {
                        name,
                        first_line: tokens[member_start].line,
                        last_line: tokens[close].line,
                        token_range: (member_start, close + 1),
                        parsed: parse_function_tokens(slice),
                    });
                }
                // Otherwise an initializer block.
            }
        }
        i = close + 1;
    }
}
