use crate::diag::{Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Digits only; signs and fractions are built by the parser.
    Int(String),
    Arrow,
    Sym(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) => format!("number `{s}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const PUNCT: &str = "{}[]();,|+-*/^='";

/// Splits `src` into tokens; `#` starts a comment running to the end of the
/// line. The last token is always [`Tok::Eof`].
pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut pos = Pos { line: 1, col: 1 };
    let advance = |c: char, pos: &mut Pos| {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut pos);
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut pos);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !(c.is_ascii_alphanumeric() || c == '_') {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut pos);
            }
            out.push((Tok::Ident(s), start));
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut pos);
            }
            if chars.peek().is_some_and(|c| c.is_ascii_alphabetic() || *c == '_' || *c == '.') {
                return Err(Diagnostic::syntax(start, "numbers are integers or fractions `p/q`; decimals and suffixes are not allowed"));
            }
            out.push((Tok::Int(s), start));
        } else if c == '-' {
            chars.next();
            advance(c, &mut pos);
            if chars.peek() == Some(&'>') {
                chars.next();
                advance('>', &mut pos);
                out.push((Tok::Arrow, start));
            } else {
                out.push((Tok::Sym('-'), start));
            }
        } else if PUNCT.contains(c) {
            chars.next();
            advance(c, &mut pos);
            out.push((Tok::Sym(c), start));
        } else {
            return Err(Diagnostic::syntax(start, format!("unexpected character {c:?}")));
        }
    }
    out.push((Tok::Eof, pos));
    Ok(out)
}
