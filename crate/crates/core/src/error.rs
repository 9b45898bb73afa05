use thiserror::Error;

/// A single failed configuration constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
    pub value: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} (got {})", self.field, self.constraint, self.value)
    }
}

#[derive(Debug, Error)]
pub enum NspdError {
    /// Array or field shapes that do not fit together.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input that violates an operation's precondition (e.g. non-solenoidal velocity).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure (non-finite value) at step {step}")]
    NumericalFailure { step: usize },

    #[error("Picard iteration diverged at iterate {iterate}: residual {residual:e} exceeds {limit:e}")]
    Divergence {
        iterate: usize,
        residual: f64,
        limit: f64,
    },

    #[error("invalid configuration:\n{}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("snapshot format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  - {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, NspdError>;
