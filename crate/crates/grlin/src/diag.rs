use std::fmt;

/// 1-based line and column (in characters).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagKind {
    Syntax,
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: {} error: {message}", pos.line, pos.col, match kind { DiagKind::Syntax => "syntax", DiagKind::Semantic => "semantic" })]
pub struct Diagnostic {
    pub pos: Pos,
    pub kind: DiagKind,
    pub message: String,
}

impl Diagnostic {
    pub fn syntax(pos: Pos, message: impl fmt::Display) -> Diagnostic {
        Diagnostic { pos, kind: DiagKind::Syntax, message: message.to_string() }
    }

    pub fn semantic(pos: Pos, message: impl fmt::Display) -> Diagnostic {
        Diagnostic { pos, kind: DiagKind::Semantic, message: message.to_string() }
    }
}
