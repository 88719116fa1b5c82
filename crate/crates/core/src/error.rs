use thiserror::Error;

/// Which operand of a two-sided system an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TropError {
    #[error("arithmetic overflow in {op}")]
    Overflow { op: &'static str },

    #[error("shape mismatch in {op}: expected {expected}, found {found}")]
    Shape {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix must have at least one row and one column")]
    Empty,

    #[error("matrix {side}: row {index} not R-astic (no finite entry)")]
    RowNotRAstic { side: Side, index: usize },

    #[error("matrix {side}: column {index} not R-astic (no finite entry)")]
    ColumnNotRAstic { side: Side, index: usize },

    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("vector is not a solution of the system")]
    NotASolution,

    #[error("row product is -inf; argmax set undefined")]
    DegenerateRow,

    #[error("no finite solution exists (after {iterations} iterations)")]
    NoFiniteSolution { iterations: u64 },

    #[error("iteration cap of {cap} reached without stabilizing")]
    IterationCap { cap: u64 },

    #[error("generator for row {}: {source}", .row + 1)]
    Generator {
        row: usize,
        #[source]
        source: Box<TropError>,
    },

    #[error("alpha override {alpha} must exceed {threshold}")]
    AlphaTooSmall { alpha: String, threshold: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid of {size} candidates exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u64 },

    #[error("oracle requires integer entries; found {0}")]
    NotInteger(String),

    #[error("line {line}, column {column}: malformed token {token:?}")]
    Token {
        line: usize,
        column: usize,
        token: String,
    },

    #[error("line {line}: ragged row with {found} entries, expected {expected}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
}

impl TropError {
    /// The innermost error, looking through generator wrappers.
    pub fn root(&self) -> &TropError {
        match self {
            TropError::Generator { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = TropError> = std::result::Result<T, E>;

/// An error tagged with the pipeline step it arose in.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("step {step}: {source}")]
pub struct PipelineError {
    pub step: u8,
    #[source]
    pub source: TropError,
}

impl PipelineError {
    pub fn at(step: u8) -> impl Fn(TropError) -> PipelineError {
        move |source| PipelineError { step, source }
    }
}
