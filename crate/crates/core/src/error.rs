use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // graph construction and queries
    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    IndexOutOfRange { index: usize, num_nodes: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("label {label} outside alphabet 1..={alphabet}")]
    LabelOutOfAlphabet { label: u32, alphabet: u32 },
    #[error("expected {expected} labels, got {actual}")]
    LabelCountMismatch { expected: usize, actual: usize },

    // smiles
    #[error("empty SMILES input")]
    EmptyInput,
    #[error("unknown atom `{symbol}` at byte {position}")]
    UnknownAtom { symbol: String, position: usize },
    #[error("unbalanced parenthesis at byte {0}")]
    UnbalancedParenthesis(usize),
    #[error("ring closure {0} never closed")]
    DanglingRingClosure(u32),
    #[error("unexpected character `{ch}` at byte {position}")]
    UnexpectedCharacter { ch: char, position: usize },
    #[error("multi-fragment SMILES (`.`) is not supported")]
    MultipleFragments,

    // embeddings and tensors
    #[error("label {0} has no interned embedding row")]
    UninternedLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("gradient requested for non-scalar output of shape {0:?}")]
    NonScalarOutput((usize, usize)),
    #[error("graph has no nodes")]
    EmptyGraph,

    // training
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("target {target} is not valid for a {task} task")]
    TargetTypeMismatch { target: f64, task: &'static str },

    // synthetic data
    #[error("no simple {degree}-regular graph on {nodes} nodes")]
    InfeasibleDegreeSequence { nodes: usize, degree: usize },
    #[error("generation budget of {0} attempts exceeded")]
    GenerationBudgetExceeded(usize),

    // theory
    #[error("lattice of {0} points exceeds the size guard")]
    SizeOverflow(u128),
    #[error("embedding dimension {dim} is smaller than the {needed} distinct extended labels")]
    DimensionTooSmall { dim: usize, needed: usize },

    // evaluation
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("metric over an empty input")]
    Empty,
    #[error("ROC-AUC needs both classes present")]
    SingleClass,
    #[error("operation requires a {expected} model, got {actual}")]
    WrongEmbeddingVariant {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("no replacement label different from the original is available")]
    DegenerateShufflePool,

    // experiment configuration
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // io
    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end, grouped by error family.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::IndexOutOfRange { .. }
            | Error::SelfLoop(_)
            | Error::LabelOutOfAlphabet { .. }
            | Error::LabelCountMismatch { .. } => 2,
            Error::EmptyInput
            | Error::UnknownAtom { .. }
            | Error::UnbalancedParenthesis(_)
            | Error::DanglingRingClosure(_)
            | Error::UnexpectedCharacter { .. }
            | Error::MultipleFragments => 3,
            Error::UninternedLabel(_)
            | Error::DimensionMismatch(_)
            | Error::NonScalarOutput(_)
            | Error::EmptyGraph => 4,
            Error::EmptyDataset | Error::TargetTypeMismatch { .. } => 5,
            Error::InfeasibleDegreeSequence { .. } | Error::GenerationBudgetExceeded(_) => 6,
            Error::SizeOverflow(_) | Error::DimensionTooSmall { .. } => 7,
            Error::LengthMismatch(..)
            | Error::Empty
            | Error::SingleClass
            | Error::WrongEmbeddingVariant { .. }
            | Error::DegenerateShufflePool => 8,
            Error::Parse { .. } | Error::Checkpoint(_) | Error::Io(_) | Error::Json(_) => 9,
            Error::InvalidConfig(_) => 10,
        }
    }
}
