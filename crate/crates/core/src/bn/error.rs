use thiserror::Error;

/// Errors raised while building networks or answering queries against them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnError {
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),

    #[error("variable `{variable}` lists state `{state}` more than once")]
    DuplicateState { variable: String, state: String },

    #[error("variable `{0}` has no states")]
    NoStates(String),

    #[error("CPT for `{cpt}` references unknown variable `{name}`")]
    DanglingReference { cpt: String, name: String },

    #[error("variable `{0}` has more than one CPT")]
    DuplicateCpt(String),

    #[error("variable `{0}` has no CPT")]
    MissingCpt(String),

    #[error("CPT for `{cpt}` lists parent `{parent}` more than once")]
    DuplicateParent { cpt: String, parent: String },

    #[error("edge {from} -> {to} closes a directed cycle")]
    CycleDetected { from: String, to: String },

    #[error("CPT for `{cpt}` has {actual} entries, expected {expected}")]
    ShapeMismatch { cpt: String, expected: usize, actual: usize },

    #[error("CPT for `{cpt}` holds {value} at entry {index}, outside [0, 1]")]
    ProbabilityOutOfRange { cpt: String, index: usize, value: f64 },

    #[error("CPT for `{cpt}` row {row} ({parents}) sums to {sum}")]
    UnnormalizedRow {
        cpt: String,
        row: usize,
        parents: String,
        sum: f64,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },

    #[error("query target `{0}` is also observed")]
    TargetObserved(String),

    #[error("evidence has probability zero")]
    ImpossibleEvidence,

    #[error("joint state space of {size} entries exceeds the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("no value supplied for state `{state}` of `{variable}`")]
    MissingStateValue { variable: String, state: String },
}

impl BnError {
    /// Stable machine-readable code for CLI and HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            BnError::DuplicateVariable(_) => "DUPLICATE_VARIABLE",
            BnError::DuplicateState { .. } => "DUPLICATE_STATE",
            BnError::NoStates(_) => "NO_STATES",
            BnError::DanglingReference { .. } => "DANGLING_REFERENCE",
            BnError::DuplicateCpt(_) => "DUPLICATE_CPT",
            BnError::MissingCpt(_) => "MISSING_CPT",
            BnError::DuplicateParent { .. } => "DUPLICATE_PARENT",
            BnError::CycleDetected { .. } => "CYCLE_DETECTED",
            BnError::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            BnError::ProbabilityOutOfRange { .. } => "PROBABILITY_OUT_OF_RANGE",
            BnError::UnnormalizedRow { .. } => "UNNORMALIZED_ROW",
            BnError::UnknownVariable(_) => "UNKNOWN_VARIABLE",
            BnError::UnknownState { .. } => "EVIDENCE_UNKNOWN_STATE",
            BnError::TargetObserved(_) => "TARGET_OBSERVED",
            BnError::ImpossibleEvidence => "IMPOSSIBLE_EVIDENCE",
            BnError::StateSpaceTooLarge { .. } => "STATE_SPACE_TOO_LARGE",
            BnError::MissingStateValue { .. } => "MISSING_STATE_VALUE",
        }
    }
}

pub type Result<T, E = BnError> = std::result::Result<T, E>;
