use thiserror::Error;

/// Errors raised while reading a `.bench` document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed statement `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown gate function `{name}`")]
    UnknownFunction { line: usize, name: String },
    #[error("line {line}: `{net}` is defined more than once")]
    Duplicate { line: usize, net: String },
    #[error("line {line}: reference to undefined net `{net}`")]
    Undefined { line: usize, net: String },
    #[error("line {line}: combinational cycle through `{net}`")]
    Cycle { line: usize, net: String },
    #[error("line {line}: {function} gate `{net}` cannot take {got} fanin(s)")]
    Arity {
        line: usize,
        net: String,
        function: String,
        got: usize,
    },
    #[error("no inputs declared")]
    NoInputs,
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UnknownFunction { line, .. }
            | ParseError::Duplicate { line, .. }
            | ParseError::Undefined { line, .. }
            | ParseError::Cycle { line, .. }
            | ParseError::Arity { line, .. } => Some(*line),
            ParseError::NoInputs => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("pagerank did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("design has no internal nets")]
    NoInternalNets,
    #[error("no payload candidates remain")]
    NoPayloadCandidate,
    #[error("injection rejected: {0}")]
    Injection(String),
    #[error("invalid candidate edge {src}->{dst}: {reason}")]
    InvalidCandidate {
        src: String,
        dst: String,
        reason: String,
    },
    #[error("netlist too small to host a trojan: {0}")]
    TooSmall(String),
    #[error("missing value for input `{0}`")]
    MissingInput(String),
    #[error("{inputs} inputs exceeds the exhaustive limit of {limit}; sampling is not supported")]
    TooManyInputs { inputs: usize, limit: usize },
    #[error("input sets differ: {0}")]
    InputMismatch(String),
    #[error("report for `{report}` does not match instance `{instance}`")]
    DesignMismatch { report: String, instance: String },
    #[error("nothing to aggregate")]
    EmptyAggregate,
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
