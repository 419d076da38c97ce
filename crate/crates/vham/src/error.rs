use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for expression parsing, evaluation, and the
/// solver/certification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("function `{name}` expects {expected} argument(s), got {got} (offset {pos})")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
        pos: usize,
    },

    #[error("missing binding for variable `{name}`")]
    MissingBinding { name: &'static str },

    #[error("domain error in `{op}`: {detail}")]
    EvalDomain { op: &'static str, detail: String },

    #[error("{source} (at grid node ({i}, {j}, {k}))")]
    AtNode {
        i: usize,
        j: usize,
        k: usize,
        source: Box<Error>,
    },

    #[error("expression for {context} may only use {{{allowed}}}, found {{{found}}}")]
    ExprVariables {
        context: String,
        allowed: String,
        found: String,
    },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("fields live on different domains")]
    DomainMismatch,

    #[error("contraction factor q = {0} is not in [0, 1)")]
    QOutOfRange(f64),

    #[error("l_g*N = {0} is not in [0, 1)")]
    LgNOutOfRange(f64),

    #[error("certificate has no stability constant (requires l_g*N < 1)")]
    CertificateIncomplete,

    #[error("invalid phi: {0}")]
    InvalidPhi(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("in `{field}`: {source}")]
    Field { field: String, source: Box<Error> },

    #[error("schema error: {msg}")]
    Schema { msg: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a grid node index to an evaluation error.
    pub fn at_node(self, i: usize, j: usize, k: usize) -> Error {
        Error::AtNode {
            i,
            j,
            k,
            source: Box::new(self),
        }
    }

    /// Attach a configuration field name, e.g. `problem.K`.
    pub fn in_field(self, field: &str) -> Error {
        Error::Field {
            field: field.to_string(),
            source: Box::new(self),
        }
    }
}
