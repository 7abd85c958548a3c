use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("base coordinate {0} cannot be substituted inside an opaque coefficient function")]
    OpaqueComposition(String),
    #[error("unknown coordinate or symbol {0}")]
    Unknown(String),
    #[error("invalid presentation: {0}")]
    Invalid(String),
    #[error("law of removed coordinate {var} in transition {chart} does not vanish on the restriction")]
    InconsistentRestriction { var: String, chart: String },
    #[error("law of {var} in transition {chart} mentions truncated coordinate {removed}")]
    TruncationLeak { var: String, chart: String, removed: String },
    #[error("no symbolic inverse: {0}")]
    NoInverse(String),
    #[error("not in adapted form: {0}")]
    NotAdapted(String),
    #[error("diagonalisation is not well defined: {0}")]
    NotWellDefined(String),
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
