use thiserror::Error;

/// Why an edge offered by a builder was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SelfLoop,
    RepeatedEdge,
    DegreeExceeded { vertex: usize },
    UnknownVertex { vertex: usize },
    StepBudgetExhausted,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SelfLoop => write!(f, "self-loop"),
            Violation::RepeatedEdge => write!(f, "edge already present"),
            Violation::DegreeExceeded { vertex } => {
                write!(f, "vertex {vertex} already has maximum degree")
            }
            Violation::UnknownVertex { vertex } => write!(f, "unknown vertex {vertex}"),
            Violation::StepBudgetExhausted => write!(f, "step budget exhausted"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("builder protocol violation at step {step}: {violation}")]
    BuilderProtocol { step: usize, violation: Violation },

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("degenerate palette: A^{phase}({vertex}) is empty")]
    DegeneratePalette { vertex: usize, phase: usize },

    #[error("phase {phase} out of range for vertex {vertex}")]
    PhaseOutOfRange { vertex: usize, phase: usize },

    #[error("color set {0} is not tracked")]
    Untracked(usize),

    #[error("vertex pair ({0}, {1}) is not monitored")]
    Unmonitored(usize, usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("instance exceeds enumeration cap: {0}")]
    OverCap(String),

    #[error("inconsistent transcript: {0}")]
    Inconsistent(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
