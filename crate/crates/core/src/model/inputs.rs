//! Survey-derived inputs for the carrier outbreak model.
//!
//! Prevention-behaviour and symptom tables are kept as the underlying
//! volunteer counts (382 volunteers, 238 of them infected) so that derived
//! percentages and preventive indices are exact rather than re-rounded.

use serde::{Deserialize, Serialize};

use super::formulas::preventive_index;
use super::ModelError;
use crate::risk::{error_rates, ConfusionCounts, ErrorRates};

pub const SURVEY_VOLUNTEERS: u32 = 382;
pub const SURVEY_INFECTED: u32 = 238;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measure {
    HandWash,
    HandSanitizer,
    AvoidCommonAreas,
    FaceCover,
    WorkspaceCleaning,
    BerthCleaning,
    KeepingDistance,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::HandWash,
        Measure::HandSanitizer,
        Measure::AvoidCommonAreas,
        Measure::FaceCover,
        Measure::WorkspaceCleaning,
        Measure::BerthCleaning,
        Measure::KeepingDistance,
    ];

    /// Node name in the network.
    pub fn name(self) -> &'static str {
        match self {
            Measure::HandWash => "HandWash",
            Measure::HandSanitizer => "HandSanitizer",
            Measure::AvoidCommonAreas => "AvoidCommonAreas",
            Measure::FaceCover => "FaceCover",
            Measure::WorkspaceCleaning => "WorkspaceCleaning",
            Measure::BerthCleaning => "BerthCleaning",
            Measure::KeepingDistance => "KeepingDistance",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Volunteers reporting the measure, and how many of those were infected.
    pub fn roosevelt_survey(self) -> (u32, u32) {
        match self {
            Measure::HandWash => (351, 218),
            Measure::HandSanitizer => (356, 219),
            Measure::AvoidCommonAreas => (145, 78),
            Measure::FaceCover => (283, 158),
            Measure::WorkspaceCleaning => (307, 195),
            Measure::BerthCleaning => (252, 156),
            Measure::KeepingDistance => (192, 105),
        }
    }
}

/// One prevention behaviour: infection percentage when taken (`alpha`) and
/// not taken (`beta`), plus the share of people taking it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreventionMeasure {
    pub measure: Measure,
    pub alpha: f64,
    pub beta: f64,
    pub prior_yes: f64,
}

impl PreventionMeasure {
    pub fn new(measure: Measure, alpha: f64, beta: f64, prior_yes: f64) -> Result<Self, ModelError> {
        let m = Self {
            measure,
            alpha,
            beta,
            prior_yes,
        };
        m.validate()?;
        Ok(m)
    }

    /// Derives alpha, beta and the prior from survey counts.
    pub fn from_counts(
        measure: Measure,
        taken: u32,
        taken_infected: u32,
        volunteers: u32,
        infected: u32,
    ) -> Result<Self, ModelError> {
        if taken == 0
            || taken >= volunteers
            || taken_infected > taken
            || taken_infected > infected
            || infected - taken_infected > volunteers - taken
        {
            return Err(ModelError::InconsistentCounts(measure.name()));
        }
        Self::new(
            measure,
            100.0 * taken_infected as f64 / taken as f64,
            100.0 * (infected - taken_infected) as f64 / (volunteers - taken) as f64,
            taken as f64 / volunteers as f64,
        )
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let pct = 0.0..=100.0;
        if !pct.contains(&self.alpha) || !pct.contains(&self.beta) {
            return Err(ModelError::InvalidMeasure(self.measure.name()));
        }
        if !(0.0..=1.0).contains(&self.prior_yes) {
            return Err(ModelError::InvalidMeasure(self.measure.name()));
        }
        if !(self.beta > 0.0) {
            return Err(ModelError::ZeroBeta);
        }
        Ok(())
    }

    pub fn preventive_index(&self) -> Result<f64, ModelError> {
        preventive_index(self.alpha, self.beta)
    }
}

pub fn roosevelt_measures() -> [PreventionMeasure; 7] {
    Measure::ALL.map(|m| {
        let (taken, taken_infected) = m.roosevelt_survey();
        PreventionMeasure::from_counts(m, taken, taken_infected, SURVEY_VOLUNTEERS, SURVEY_INFECTED)
            .expect("bundled survey counts are consistent")
    })
}

/// Which of the seven measures a person takes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreventionProfile {
    taken: [bool; 7],
}

impl PreventionProfile {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(taken: [bool; 7]) -> Self {
        Self { taken }
    }

    pub fn only(measures: &[Measure]) -> Self {
        let mut p = Self::none();
        for &m in measures {
            p.taken[m.index()] = true;
        }
        p
    }

    /// Every measure except those listed.
    pub fn all_except(measures: &[Measure]) -> Self {
        let mut p = Self::new([true; 7]);
        for &m in measures {
            p.taken[m.index()] = false;
        }
        p
    }

    pub fn is_taken(&self, m: Measure) -> bool {
        self.taken[m.index()]
    }

    pub fn set(&mut self, m: Measure, taken: bool) {
        self.taken[m.index()] = taken;
    }

    pub fn flags(&self) -> [bool; 7] {
        self.taken
    }

    /// All 128 profiles in CPT row order (first measure slowest).
    pub fn all() -> impl Iterator<Item = PreventionProfile> {
        (0u32..128).map(|row| {
            let mut taken = [false; 7];
            for (i, t) in taken.iter_mut().enumerate() {
                *t = (row >> (6 - i)) & 1 == 1;
            }
            PreventionProfile { taken }
        })
    }
}

pub const AGE_BANDS: [&str; 4] = ["18-24", "25-29", "30-39", "40-59"];
pub const GENDERS: [&str; 2] = ["Male", "Female"];

/// Infection rates and population shares by age band and gender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicRates {
    pub age_rates: [f64; 4],
    pub age_priors: [f64; 4],
    pub gender_rates: [f64; 2],
    pub gender_priors: [f64; 2],
}

impl DemographicRates {
    pub fn roosevelt() -> Self {
        Self {
            age_rates: [0.681, 0.641, 0.588, 0.558],
            age_priors: [0.2958, 0.2042, 0.3874, 0.1126],
            gender_rates: [0.657, 0.516],
            gender_priors: [0.7565, 0.2435],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let rates = self.age_rates.iter().chain(&self.gender_rates);
        let priors = self.age_priors.iter().chain(&self.gender_priors);
        for &v in rates.chain(priors) {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::RateOutOfRange { value: v });
            }
        }
        for (name, sum) in [
            ("Age", self.age_priors.iter().sum::<f64>()),
            ("Gender", self.gender_priors.iter().sum::<f64>()),
        ] {
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ModelError::PriorsNotNormalized(name));
            }
        }
        Ok(())
    }
}

pub const SYMPTOM_STATES: [&str; 5] = ["0", "1-3", "4-5", "6-8", ">8"];

/// Volunteers per symptom-count band, split by infection status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymptomCounts {
    pub healthy: [u32; 5],
    pub infected: [u32; 5],
}

impl SymptomCounts {
    pub fn roosevelt() -> Self {
        Self {
            healthy: [54, 49, 13, 16, 12],
            infected: [44, 51, 37, 50, 56],
        }
    }

    /// Rows `[P(. | No), P(. | Yes)]`.
    pub fn cpt_rows(&self) -> Result<[[f64; 5]; 2], ModelError> {
        let row = |c: &[u32; 5]| -> Result<[f64; 5], ModelError> {
            let total: u32 = c.iter().sum();
            if total == 0 {
                return Err(ModelError::InconsistentCounts("Symptoms"));
            }
            Ok(c.map(|n| n as f64 / total as f64))
        };
        Ok([row(&self.healthy)?, row(&self.infected)?])
    }
}

/// Everything tabular the model builder consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInputs {
    pub measures: [PreventionMeasure; 7],
    pub demographics: DemographicRates,
    pub symptoms: SymptomCounts,
}

impl ModelInputs {
    pub fn roosevelt() -> Self {
        Self {
            measures: roosevelt_measures(),
            demographics: DemographicRates::roosevelt(),
            symptoms: SymptomCounts::roosevelt(),
        }
    }

    pub fn preventive_indices(&self) -> Result<[f64; 7], ModelError> {
        let mut out = [0.0; 7];
        for (slot, m) in out.iter_mut().zip(&self.measures) {
            *slot = m.preventive_index()?;
        }
        Ok(out)
    }
}

impl Default for ModelInputs {
    fn default() -> Self {
        Self::roosevelt()
    }
}

/// Discretization grids and test characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Infection-rate states in percent, uniform prior.
    pub ir_states: Vec<f64>,
    /// Cumulative preventive index states.
    pub pi_grid: Vec<f64>,
    /// Preventive index with no measure taken.
    pub pi_default: f64,
    pub test_rates: ErrorRates,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            ir_states: (0..=10).map(|k| 10.0 * k as f64).collect(),
            pi_grid: (9..=23).map(|k| k as f64 / 10.0).collect(),
            pi_default: 1.0,
            test_rates: error_rates(ConfusionCounts::ROOSEVELT_ELISA)
                .expect("bundled confusion counts have positive denominators"),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, grid) in [("ir_states", &self.ir_states), ("pi_grid", &self.pi_grid)] {
            if grid.is_empty() {
                return Err(ModelError::EmptyGrid(name));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(ModelError::GridNotIncreasing(name));
            }
        }
        if let Some(&v) = self.ir_states.iter().find(|v| !(0.0..=100.0).contains(*v)) {
            return Err(ModelError::RateOutOfRange { value: v / 100.0 });
        }
        if let Some(&v) = self.pi_grid.iter().find(|v| !(**v > 0.0)) {
            return Err(ModelError::NonpositivePi(v));
        }
        for v in [self.test_rates.fpr, self.test_rates.fnr] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::RateOutOfRange { value: v });
            }
        }
        Ok(())
    }
}
