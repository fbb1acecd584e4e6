//! Tokenizer and cursor shared by every text format in the crate.
//!
//! Words are runs of ASCII letters, digits and underscores. Single-quoted
//! strings accept `\'` and `\\` escapes. `#` starts a comment that runs to the
//! end of the line. A few Unicode operators are folded onto their ASCII
//! spelling (`≥`, `≤`, `⊆`, `←`, `•`).

use std::fmt;

use thiserror::Error;

/// A syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError { line, col, msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Str(s) => write!(f, "string '{s}'"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCTS: &[&str] = &["?-", ":-", "<=", ">=", "(", ")", "[", "]", "{", "}", ",", ".", ":", "=", "@", "*", "/"];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if c == '\'' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(ParseError::new(tl, tc, "unterminated string")),
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(&e @ ('\'' | '\\')) => s.push(e),
                            _ => return Err(ParseError::new(line, col, "bad escape in string")),
                        }
                        i += 2;
                        col += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        let folded = match c {
            '≥' => Some(">="),
            '≤' | '⊆' => Some("<="),
            '←' => Some(":-"),
            '•' => Some("*"),
            _ => None,
        };
        if let Some(p) = folded {
            out.push(Token { tok: Tok::Punct(p), line: tl, col: tc });
            i += 1;
            col += 1;
            continue;
        }
        if c == 'φ' {
            return Err(ParseError::new(tl, tc, "fresh constants (φ) cannot appear in input"));
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                out.push(Token { tok: Tok::Punct(p), line: tl, col: tc });
                i += p.len();
                col += p.len();
            }
            None => return Err(ParseError::new(tl, tc, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Recursive-descent helper over a token vector.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: tokenize(src)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn err(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(t.line, t.col, msg)
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        self.err(format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    pub fn expect_keyword(&mut self, w: &str) -> Result<(), ParseError> {
        if self.is_word(w) {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    /// An identifier: a word that does not start with a digit.
    pub fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Word(w) if !w.starts_with(|c: char| c.is_ascii_digit()) => {
                let w = w.clone();
                self.next();
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn expect_usize(&mut self, what: &str) -> Result<usize, ParseError> {
        match self.peek() {
            Tok::Word(w) if w.bytes().all(|b| b.is_ascii_digit()) => {
                let n = w.parse().map_err(|_| self.err(format!("{what} out of range")))?;
                self.next();
                Ok(n)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn position(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }
}

/// Whether a constant name can be printed without quotes in every format.
pub fn is_bare_constant(s: &str) -> bool {
    !s.is_empty()
        && s.starts_with(|c: char| c.is_ascii_lowercase() || c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}
