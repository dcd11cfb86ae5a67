//! Test error rates, infection rate and impact-weighted decision risk.
//!
//! Positive risk weighs missed infections against justified precaution:
//! `impact_u * FNR + impact_k * (1 - FNR)`. Negative risk weighs false alarms
//! against the base cost of testing: `impact_q * FPR + impact_c * (1 - FPR)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bn::{BnError, Network};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("{0} has a zero denominator")]
    EmptyDenominator(&'static str),
    #[error("population must be positive")]
    ZeroPopulation,
    #[error("{infections} infections exceed population {population}")]
    CountExceedsPopulation { infections: u64, population: u64 },
    #[error("{name} = {value} is outside [0, 1]")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("impact {name} = {value} must be a nonnegative number")]
    NegativeImpact { name: &'static str, value: f64 },
    #[error(transparent)]
    Network(#[from] BnError),
}

impl RiskError {
    pub fn code(&self) -> &'static str {
        match self {
            RiskError::EmptyDenominator(_) => "EMPTY_DENOMINATOR",
            RiskError::ZeroPopulation => "ZERO_POPULATION",
            RiskError::CountExceedsPopulation { .. } => "COUNT_EXCEEDS_POPULATION",
            RiskError::RateOutOfRange { .. } => "RATE_OUT_OF_RANGE",
            RiskError::NegativeImpact { .. } => "NEGATIVE_IMPACT",
            RiskError::Network(e) => e.code(),
        }
    }
}

/// Confusion-matrix counts of a diagnostic test against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    /// ELISA against RT-PCR on the carrier crew: 16 of 147 RT-PCR negatives
    /// tested positive, 23 of 235 RT-PCR positives tested negative.
    pub const ROOSEVELT_ELISA: ConfusionCounts = ConfusionCounts {
        tp: 212,
        fp: 16,
        tn: 131,
        fn_: 23,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub fpr: f64,
    pub fnr: f64,
}

/// `FPR = FP / (FP + TN)`, `FNR = FN / (FN + TP)`.
pub fn error_rates(c: ConfusionCounts) -> Result<ErrorRates, RiskError> {
    let negatives = c.fp + c.tn;
    let positives = c.fn_ + c.tp;
    if negatives == 0 {
        return Err(RiskError::EmptyDenominator("FPR"));
    }
    if positives == 0 {
        return Err(RiskError::EmptyDenominator("FNR"));
    }
    Ok(ErrorRates {
        fpr: c.fp as f64 / negatives as f64,
        fnr: c.fn_ as f64 / positives as f64,
    })
}

/// Reads FPR and FNR off a network's `Test` CPT given `HasCovid`.
pub fn error_rates_from_network(net: &Network) -> Result<ErrorRates, RiskError> {
    let healthy = net.cpt_row("Test", &["No"])?;
    let infected = net.cpt_row("Test", &["Yes"])?;
    let test = net
        .variable("Test")
        .ok_or_else(|| BnError::UnknownVariable("Test".into()))?;
    let pos = state(test, "Positive")?;
    let neg = state(test, "Negative")?;
    Ok(ErrorRates {
        fpr: healthy[pos],
        fnr: infected[neg],
    })
}

fn state(var: &crate::bn::Variable, name: &str) -> Result<usize, BnError> {
    var.state_index(name).ok_or_else(|| BnError::UnknownState {
        variable: var.name().to_string(),
        state: name.to_string(),
    })
}

/// `k * infections / population`; `k = 100` yields a percentage.
pub fn infection_rate(infections: u64, population: u64, k: f64) -> Result<f64, RiskError> {
    if population == 0 {
        return Err(RiskError::ZeroPopulation);
    }
    if infections > population {
        return Err(RiskError::CountExceedsPopulation {
            infections,
            population,
        });
    }
    Ok(k * infections as f64 / population as f64)
}

/// Impact weights in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskParams {
    /// Undetected spread.
    pub impact_u: f64,
    /// Precaution taken on a true positive.
    pub impact_k: f64,
    /// Quarantine after a false alarm.
    pub impact_q: f64,
    /// Base testing cost.
    pub impact_c: f64,
}

impl RiskParams {
    /// very high = 4, high = 3, low = 2, very low = 1.
    pub const DEFAULT_PROFILE: RiskParams = RiskParams {
        impact_u: 4.0,
        impact_k: 3.0,
        impact_q: 2.0,
        impact_c: 1.0,
    };

    pub fn validate(&self) -> Result<(), RiskError> {
        for (name, value) in [
            ("u", self.impact_u),
            ("k", self.impact_k),
            ("q", self.impact_q),
            ("c", self.impact_c),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(RiskError::NegativeImpact { name, value });
            }
        }
        Ok(())
    }
}

impl Default for RiskParams {
    fn default() -> Self {
        Self::DEFAULT_PROFILE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskScores {
    pub risk_p: f64,
    pub risk_n: f64,
}

pub fn risk_scores(fpr: f64, fnr: f64, params: &RiskParams) -> Result<RiskScores, RiskError> {
    for (name, value) in [("fpr", fpr), ("fnr", fnr)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(RiskError::RateOutOfRange { name, value });
        }
    }
    params.validate()?;
    Ok(RiskScores {
        risk_p: params.impact_u * fnr + params.impact_k * (1.0 - fnr),
        risk_n: params.impact_q * fpr + params.impact_c * (1.0 - fpr),
    })
}
