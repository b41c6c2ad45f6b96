use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("control and target must differ (both are qubit {0})")]
    ControlEqualsTarget(usize),

    #[error("angle source references parameter {index}, but only {available} are bound")]
    UnresolvedAngle { index: usize, available: usize },

    #[error("amplitude preparation must be the first operation of a circuit (found at position {0})")]
    PrepNotFirst(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("arcsin embedding requires |x| < 1, got x = {x}")]
    ArcsinDomain { x: f64 },

    #[error("time {t} s lies outside the simulated interval [{start}, {end}] s")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing boundary value for variable `{0}`")]
    MissingBoundary(String),

    #[error("non-finite {what} at t = {t} s")]
    NonFinite { what: &'static str, t: f64 },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("window {index} failed: {source}")]
    Window {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Walks through `Window` wrappers to the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Window { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
