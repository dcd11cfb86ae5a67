//! The USS Theodore Roosevelt outbreak network and the formulas behind its CPTs.

mod builder;
mod formulas;
mod inputs;

use thiserror::Error;

use crate::bn::BnError;

pub use builder::{
    build_roosevelt_model, clamped_cells, grid_label, ir_labels, node_groups, pi_labels, pi_table,
    roosevelt_network, ClampedCell, NodeGroup,
};
pub use formulas::{cumulative_pi, has_covid_prob, has_covid_raw, preventive_index, snap_to_grid, vulnerability};
pub use inputs::{
    roosevelt_measures, DemographicRates, Measure, ModelConfig, ModelInputs, PreventionMeasure,
    PreventionProfile, SymptomCounts, AGE_BANDS, GENDERS, SURVEY_INFECTED, SURVEY_VOLUNTEERS,
    SYMPTOM_STATES,
};

/// Node names of the non-behaviour variables.
pub mod node {
    pub const PREVENTION_INDEX: &str = "PreventionIndex";
    pub const GENDER: &str = "Gender";
    pub const AGE: &str = "Age";
    pub const VULNERABLE: &str = "Vulnerable";
    pub const INFECTION_RATE: &str = "InfectionRate";
    pub const HAS_COVID: &str = "HasCovid";
    pub const SYMPTOMS: &str = "Symptoms";
    pub const TEST: &str = "Test";
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("beta must be positive")]
    ZeroBeta,
    #[error("vulnerability is undefined when a*g + (1-a)(1-g) = 0")]
    DegenerateRate,
    #[error("preventive index {0} must be positive")]
    NonpositivePi(f64),
    #[error("rate {value} is outside [0, 1]")]
    RateOutOfRange { value: f64 },
    #[error("measure {0} has out-of-range inputs")]
    InvalidMeasure(&'static str),
    #[error("survey counts for {0} are inconsistent")]
    InconsistentCounts(&'static str),
    #[error("{0} priors do not sum to 1")]
    PriorsNotNormalized(&'static str),
    #[error("{0} is empty")]
    EmptyGrid(&'static str),
    #[error("{0} must be strictly increasing")]
    GridNotIncreasing(&'static str),
    #[error(transparent)]
    Network(#[from] BnError),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::ZeroBeta => "ZERO_BETA",
            ModelError::DegenerateRate => "DEGENERATE_RATE",
            ModelError::NonpositivePi(_) => "NONPOSITIVE_PI",
            ModelError::RateOutOfRange { .. } => "RATE_OUT_OF_RANGE",
            ModelError::InvalidMeasure(_) => "INVALID_MEASURE",
            ModelError::InconsistentCounts(_) => "INCONSISTENT_COUNTS",
            ModelError::PriorsNotNormalized(_) => "PRIORS_NOT_NORMALIZED",
            ModelError::EmptyGrid(_) => "EMPTY_GRID",
            ModelError::GridNotIncreasing(_) => "GRID_NOT_INCREASING",
            ModelError::Network(e) => e.code(),
        }
    }
}
