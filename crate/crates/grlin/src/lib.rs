//! Text format for bundle presentations and the `grlin` command set.

pub mod commands;
pub mod diag;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod report;

pub use commands::{run, Command, Options};
pub use diag::{DiagKind, Diagnostic, Pos};
pub use parser::{parse, parse_document, Document};
pub use printer::print;
pub use report::CommandReport;
