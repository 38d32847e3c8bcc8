//! S-expression reader and printer for SyGuS-IF and SMT-LIB text.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

/// Largest bit-vector literal width the reader accepts.
pub const MAX_BV_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Symbol(String),
    Int(BigInt),
    /// `#x`/`#b` literal. `bits` is already reduced to `width`.
    BitVec { width: u32, bits: u64 },
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SExpr {
    Atom(Atom),
    List(Vec<SExpr>),
}

/// Location of a reader error, 1-based line and column plus byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("unbalanced parentheses at {0}")]
    UnbalancedParens(Position),
    #[error("malformed token `{token}` at {position}")]
    BadToken { token: String, position: Position },
}

impl SExpr {
    pub fn symbol(s: impl Into<String>) -> SExpr {
        SExpr::Atom(Atom::Symbol(s.into()))
    }

    pub fn int(v: impl Into<BigInt>) -> SExpr {
        SExpr::Atom(Atom::Int(v.into()))
    }

    pub fn list(items: Vec<SExpr>) -> SExpr {
        SExpr::List(items)
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Atom(Atom::Symbol(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            _ => None,
        }
    }

    /// Head symbol of a non-empty list whose first item is a symbol.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(SExpr::as_symbol)
    }
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Reader<'a> {
    fn position_at(&self, offset: usize) -> Position {
        // Offsets handed in always lie on the current line.
        Position { offset, line: self.line, column: offset - self.line_start + 1 }
    }

    fn skip_trivia(&mut self) {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                b' ' | b'\t' | b'\r' => self.pos += 1,
                b';' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read_all(&mut self) -> Result<Vec<SExpr>, ReadError> {
        let mut out = Vec::new();
        // Stack of open lists with the position of their opening paren.
        let mut stack: Vec<(Position, Vec<SExpr>)> = Vec::new();
        loop {
            self.skip_trivia();
            let bytes = self.text.as_bytes();
            if self.pos >= bytes.len() {
                break;
            }
            match bytes[self.pos] {
                b'(' => {
                    stack.push((self.position_at(self.pos), Vec::new()));
                    self.pos += 1;
                }
                b')' => {
                    let here = self.position_at(self.pos);
                    self.pos += 1;
                    let (_, items) = stack.pop().ok_or(ReadError::UnbalancedParens(here))?;
                    push(&mut stack, &mut out, SExpr::List(items));
                }
                _ => {
                    let start = self.pos;
                    while self.pos < bytes.len()
                        && !matches!(bytes[self.pos], b'(' | b')' | b';' | b' ' | b'\t' | b'\r' | b'\n')
                    {
                        self.pos += 1;
                    }
                    let token = &self.text[start..self.pos];
                    let atom = parse_atom(token).ok_or_else(|| ReadError::BadToken {
                        token: token.to_string(),
                        position: self.position_at(start),
                    })?;
                    push(&mut stack, &mut out, SExpr::Atom(atom));
                }
            }
        }
        match stack.pop() {
            Some((open, _)) => Err(ReadError::UnbalancedParens(open)),
            None => Ok(out),
        }
    }
}

fn push(stack: &mut [(Position, Vec<SExpr>)], out: &mut Vec<SExpr>, e: SExpr) {
    match stack.last_mut() {
        Some((_, items)) => items.push(e),
        None => out.push(e),
    }
}

fn parse_atom(token: &str) -> Option<Atom> {
    if let Some(hex) = token.strip_prefix("#x") {
        let width = u32::try_from(hex.len()).ok()?.checked_mul(4)?;
        if hex.is_empty() || width > MAX_BV_WIDTH {
            return None;
        }
        let bits = u64::from_str_radix(hex, 16).ok()?;
        return Some(Atom::BitVec { width, bits });
    }
    if let Some(bin) = token.strip_prefix("#b") {
        let width = u32::try_from(bin.len()).ok()?;
        if bin.is_empty() || width > MAX_BV_WIDTH {
            return None;
        }
        let bits = u64::from_str_radix(bin, 2).ok()?;
        return Some(Atom::BitVec { width, bits });
    }
    if token.starts_with('#') {
        return None;
    }
    match token {
        "true" => return Some(Atom::Bool(true)),
        "false" => return Some(Atom::Bool(false)),
        _ => {}
    }
    let digits = token.strip_prefix('-').unwrap_or(token);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        return token.parse::<BigInt>().ok().map(Atom::Int);
    }
    // Symbols must not start with a digit.
    if token.as_bytes()[0].is_ascii_digit() {
        return None;
    }
    Some(Atom::Symbol(token.to_string()))
}

/// Reads every top-level S-expression in `text`.
pub fn read_sexprs(text: &str) -> Result<Vec<SExpr>, ReadError> {
    Reader { text, pos: 0, line: 1, line_start: 0 }.read_all()
}

/// Formats a bit-vector literal, `#x` when the width is a multiple of four.
pub fn format_bv(width: u32, bits: u64) -> String {
    if width % 4 == 0 {
        format!("#x{:0w$x}", bits, w = (width / 4) as usize)
    } else {
        format!("#b{:0w$b}", bits, w = width as usize)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Symbol(s) => f.write_str(s),
            Atom::Int(i) => write!(f, "{i}"),
            Atom::BitVec { width, bits } => f.write_str(&format_bv(*width, *bits)),
            Atom::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => a.fmt(f),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    item.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn print_sexpr(e: &SExpr) -> String {
    e.to_string()
}
