//! Structural checker for the HCL subset the generator emits.
//!
//! Grammar accepted:
//!
//! ```text
//! body      := (attribute | block)*
//! attribute := IDENT "=" expr NEWLINE
//! block     := IDENT (STRING | IDENT)* "{" NEWLINE body "}" NEWLINE
//! expr      := STRING | NUMBER | IDENT ("." IDENT)*
//!            | "[" (expr ("," expr)* ","?)? "]"
//!            | "{" (key ("=" | ":") expr ("," | NEWLINE)*)* "}"
//! ```
//!
//! Comments (`#`, `//`, `/* */`) are skipped. This is not a general HCL
//! parser; it exists to catch generator bugs.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Number,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Colon,
    Comma,
    Dot,
    Newline,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::Number => "number".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Newline => "end of line".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub at: Position,
    pub message: String,
}

/// A top-level block, e.g. `resource "aws_instance" "web" { ... }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopBlock {
    pub kind: String,
    pub labels: Vec<String>,
    pub at: Position,
}

fn tokenize(text: &str) -> (Vec<(Tok, Position)>, Vec<SyntaxError>) {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let here = Position { line, column: col };
        match c {
            '\n' => {
                toks.push((Tok::Newline, here));
                bump!();
            }
            c if c.is_whitespace() => bump!(),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                bump!();
                bump!();
                let mut closed = false;
                while i < chars.len() {
                    if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                        bump!();
                        bump!();
                        closed = true;
                        break;
                    }
                    bump!();
                }
                if !closed {
                    errors.push(SyntaxError { at: here.clone(), message: "unterminated block comment".into() });
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                let mut closed = false;
                while i < chars.len() {
                    match chars[i] {
                        '"' => {
                            bump!();
                            closed = true;
                            break;
                        }
                        '\n' => break,
                        '\\' => {
                            let esc_at = Position { line, column: col };
                            bump!();
                            match chars.get(i) {
                                Some(&e @ ('"' | '\\' | 'n' | 't' | 'r')) => {
                                    s.push(e);
                                    bump!();
                                }
                                other => {
                                    errors.push(SyntaxError {
                                        at: esc_at,
                                        message: format!("invalid escape sequence `\\{}`", other.map(|c| c.to_string()).unwrap_or_default()),
                                    });
                                }
                            }
                        }
                        ch => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                if !closed {
                    errors.push(SyntaxError { at: here.clone(), message: "unterminated string".into() });
                }
                toks.push((Tok::Str(s), here));
            }
            '{' | '}' | '[' | ']' | '=' | ':' | ',' | '.' => {
                let t = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '=' => Tok::Eq,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                };
                toks.push((t, here));
                bump!();
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                bump!();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '.' | '+' | '-')) {
                    bump!();
                }
                let lit: String = chars[start..i].iter().collect();
                if lit.parse::<f64>().is_err() {
                    errors.push(SyntaxError { at: here.clone(), message: format!("malformed number `{lit}`") });
                }
                toks.push((Tok::Number, here));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '-')) {
                    bump!();
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), here));
            }
            other => {
                errors.push(SyntaxError { at: here.clone(), message: format!("unexpected character `{other}`") });
                bump!();
            }
        }
    }
    (toks, errors)
}

/// Reports unmatched braces/brackets with their positions.
fn balance(toks: &[(Tok, Position)]) -> Vec<SyntaxError> {
    let mut stack: Vec<(&Tok, &Position)> = Vec::new();
    let mut errors = Vec::new();
    for (t, p) in toks {
        match t {
            Tok::LBrace | Tok::LBracket => stack.push((t, p)),
            Tok::RBrace | Tok::RBracket => {
                let want = if *t == Tok::RBrace { Tok::LBrace } else { Tok::LBracket };
                match stack.pop() {
                    Some((open, _)) if *open == want => {}
                    Some((open, at)) => errors.push(SyntaxError {
                        at: p.clone(),
                        message: format!("{} closes {} opened at {at}", t.describe(), open.describe()),
                    }),
                    None => errors.push(SyntaxError { at: p.clone(), message: format!("unmatched {}", t.describe()) }),
                }
            }
            _ => {}
        }
    }
    for (open, at) in stack {
        errors.push(SyntaxError { at: at.clone(), message: format!("{} is never closed", open.describe()) });
    }
    errors
}

struct Parser<'t> {
    toks: &'t [(Tok, Position)],
    pos: usize,
    end: Position,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> Position {
        self.toks.get(self.pos).map(|(_, p)| p.clone()).unwrap_or_else(|| self.end.clone())
    }

    fn next(&mut self) -> Option<&'t Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn err<T>(&self, message: String) -> PResult<T> {
        Err(SyntaxError { at: self.here(), message })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        match self.peek() {
            Some(t) => self.err(format!("expected {wanted}, found {}", t.describe())),
            None => self.err(format!("expected {wanted}, found end of input")),
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek() == Some(&Tok::Newline) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(Tok::Newline) => {
                self.pos += 1;
                Ok(())
            }
            Some(Tok::RBrace) => Ok(()),
            _ => self.unexpected("end of line"),
        }
    }

    /// Parses a body until `}` (nested) or end of input (top level).
    fn body(&mut self, top: bool, blocks: &mut Vec<TopBlock>) -> PResult<()> {
        loop {
            self.skip_newlines();
            match self.peek() {
                None if top => return Ok(()),
                None => return self.unexpected("`}`"),
                Some(Tok::RBrace) if !top => return Ok(()),
                Some(Tok::Ident(name)) => {
                    let at = self.here();
                    self.pos += 1;
                    if self.peek() == Some(&Tok::Eq) {
                        self.pos += 1;
                        self.expr()?;
                        self.end_of_line()?;
                    } else {
                        let mut labels = Vec::new();
                        while let Some(Tok::Str(s) | Tok::Ident(s)) = self.peek() {
                            labels.push(s.clone());
                            self.pos += 1;
                        }
                        self.expect(Tok::LBrace)?;
                        self.body(false, &mut Vec::new())?;
                        self.expect(Tok::RBrace)?;
                        self.end_of_line()?;
                        if top {
                            blocks.push(TopBlock { kind: name.clone(), labels, at });
                        }
                    }
                }
                Some(_) => return self.unexpected("attribute or block"),
            }
        }
    }

    fn expr(&mut self) -> PResult<()> {
        match self.next() {
            Some(Tok::Str(_) | Tok::Number) => Ok(()),
            Some(Tok::Ident(_)) => {
                while self.peek() == Some(&Tok::Dot) {
                    self.pos += 1;
                    match self.next() {
                        Some(Tok::Ident(_)) => {}
                        _ => {
                            self.pos -= 1;
                            return self.unexpected("identifier after `.`");
                        }
                    }
                }
                Ok(())
            }
            Some(Tok::LBracket) => {
                self.skip_newlines();
                while self.peek() != Some(&Tok::RBracket) {
                    self.expr()?;
                    self.skip_newlines();
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        self.skip_newlines();
                    } else if self.peek() != Some(&Tok::RBracket) {
                        return self.unexpected("`,` or `]`");
                    }
                }
                self.pos += 1;
                Ok(())
            }
            Some(Tok::LBrace) => {
                loop {
                    while matches!(self.peek(), Some(Tok::Newline | Tok::Comma)) {
                        self.pos += 1;
                    }
                    match self.next() {
                        Some(Tok::RBrace) => return Ok(()),
                        Some(Tok::Ident(_) | Tok::Str(_)) => {}
                        _ => {
                            self.pos -= 1;
                            return self.unexpected("object key or `}`");
                        }
                    }
                    match self.next() {
                        Some(Tok::Eq | Tok::Colon) => {}
                        _ => {
                            self.pos -= 1;
                            return self.unexpected("`=` after object key");
                        }
                    }
                    self.expr()?;
                    match self.peek() {
                        Some(Tok::Newline | Tok::Comma | Tok::RBrace) => {}
                        _ => return self.unexpected("`,`, end of line or `}`"),
                    }
                }
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.unexpected("expression")
            }
        }
    }
}

/// Checks `text` and returns its top-level blocks, or every syntax error
/// found (lexical and bracket errors are all reported; grammar checking
/// stops at the first error).
pub fn parse_structure(text: &str) -> Result<Vec<TopBlock>, Vec<SyntaxError>> {
    let (toks, mut errors) = tokenize(text);
    errors.extend(balance(&toks));
    if !errors.is_empty() {
        errors.sort_by_key(|e| (e.at.line, e.at.column));
        return Err(errors);
    }
    let last_line = text.lines().count().max(1);
    let end = Position { line: last_line, column: text.lines().last().map_or(1, |l| l.chars().count() + 1) };
    let mut p = Parser { toks: &toks, pos: 0, end };
    let mut blocks = Vec::new();
    p.body(true, &mut blocks).map_err(|e| vec![e])?;
    Ok(blocks)
}
