//! Tokenizer for the supported Java subset.
//!
//! Comments and annotations are dropped. Every other non-whitespace
//! character ends up in exactly one token.

use serde::{Deserialize, Serialize};

use crate::error::LexError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Keyword,
    NumericLiteral,
    StringLiteral,
    BooleanLiteral,
    Operator,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters.
    pub column: usize,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "null", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while", "var",
];

// Longest first so that maximal munch falls out of a linear scan.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/", "%",
    "=", "<", ">", "!", "~", "?", ":", "&", "|", "^",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', '.', '@'];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphanumeric()
}

/// Splits `source` into tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { src: source, pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let (start, line, column) = (cur.pos, cur.line, cur.column);
        if cur.rest().starts_with("//") {
            cur.bump_while(|c| c != '\n');
            continue;
        }
        if cur.rest().starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(LexError::UnterminatedComment { line, column });
                }
            }
            continue;
        }
        if c == '@' && cur.peek_at(1).is_some_and(is_ident_start) {
            skip_annotation(&mut cur)?;
            continue;
        }
        let kind = if is_ident_start(c) {
            cur.bump_while(is_ident_continue);
            let word = &source[start..cur.pos];
            match word {
                "true" | "false" => TokenKind::BooleanLiteral,
                w if is_keyword(w) => TokenKind::Keyword,
                _ => TokenKind::Identifier,
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur);
            TokenKind::NumericLiteral
        } else if c == '"' || c == '\'' {
            lex_quoted(&mut cur, c, line, column)?;
            TokenKind::StringLiteral
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.rest().starts_with(**op)) {
            if *op == "..." {
                for _ in 0..3 {
                    cur.bump();
                }
                TokenKind::Punctuation
            } else {
                for _ in 0..op.len() {
                    cur.bump();
                }
                TokenKind::Operator
            }
        } else if PUNCTUATION.contains(&c) {
            cur.bump();
            TokenKind::Punctuation
        } else {
            return Err(LexError::IllegalCharacter { ch: c, line, column });
        };
        tokens.push(Token { kind, text: source[start..cur.pos].to_string(), line, column, offset: start });
    }
    Ok(tokens)
}

fn lex_number(cur: &mut Cursor<'_>) {
    if cur.rest().starts_with("0x") || cur.rest().starts_with("0X") {
        cur.bump();
        cur.bump();
        cur.bump_while(|c| c.is_ascii_hexdigit() || c == '_');
    } else {
        cur.bump_while(|c| c.is_ascii_digit() || c == '_');
        if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
            cur.bump_while(|c| c.is_ascii_digit() || c == '_');
        } else if cur.peek() == Some('.') && !cur.peek_at(1).is_some_and(is_ident_start) {
            // `1.` is a valid double literal, `1.foo` is not a number at all.
            cur.bump();
        }
        if matches!(cur.peek(), Some('e' | 'E')) {
            let sign = matches!(cur.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if cur.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                for _ in 0..digit_at {
                    cur.bump();
                }
                cur.bump_while(|c| c.is_ascii_digit());
            }
        }
    }
    if matches!(cur.peek(), Some('l' | 'L' | 'f' | 'F' | 'd' | 'D')) {
        cur.bump();
    }
}

fn lex_quoted(cur: &mut Cursor<'_>, quote: char, line: usize, column: usize) -> Result<(), LexError> {
    cur.bump();
    loop {
        match cur.peek() {
            None | Some('\n') => return Err(LexError::UnterminatedString { line, column }),
            Some('\\') => {
                cur.bump();
                if cur.peek().is_none() {
                    return Err(LexError::UnterminatedString { line, column });
                }
                cur.bump();
            }
            Some(c) if c == quote => {
                cur.bump();
                return Ok(());
            }
            Some(_) => {
                cur.bump();
            }
        }
    }
}

/// Skips `@Name`, `@a.b.Name` and `@Name(...)` with balanced parentheses.
fn skip_annotation(cur: &mut Cursor<'_>) -> Result<(), LexError> {
    cur.bump();
    loop {
        cur.bump_while(is_ident_continue);
        if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(is_ident_start) {
            cur.bump();
            continue;
        }
        break;
    }
    let save = (cur.pos, cur.line, cur.column);
    cur.bump_while(|c| c.is_whitespace());
    if cur.peek() != Some('(') {
        (cur.pos, cur.line, cur.column) = save;
        return Ok(());
    }
    let mut depth = 0usize;
    while let Some(c) = cur.peek() {
        match c {
            '"' | '\'' => {
                let (line, column) = (cur.line, cur.column);
                lex_quoted(cur, c, line, column)?;
                continue;
            }
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    cur.bump();
                    return Ok(());
                }
            }
            _ => {}
        }
        cur.bump();
    }
    Ok(())
}

/// Joins token texts with single spaces. This is the canonical normalized
/// form of a piece of code.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.as_ref());
    }
    out
}

pub fn token_texts(tokens: &[Token]) -> Vec<String> {
    tokens.iter().map(|t| t.text.clone()).collect()
}

/// Canonical whitespace-normalized form: tokenize, then join with single
/// spaces. Falls back to collapsing whitespace runs when the text does not
/// lex.
pub fn normalize(source: &str) -> String {
    match tokenize(source) {
        Ok(tokens) => detokenize(&token_texts(&tokens)),
        Err(_) => source.split_whitespace().collect::<Vec<_>>().join(" "),
    }
}
