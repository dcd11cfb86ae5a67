//! Request and response bodies.

use std::collections::BTreeMap;

use outbreak_core::model::{Measure, NodeGroup};
use outbreak_core::scenario::ScenarioResult;
use outbreak_core::{Evidence, Posterior};
use serde::{Deserialize, Serialize};

/// Rounds to six fractional digits, the precision of every probability on the wire.
pub fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDescriptor {
    pub name: String,
    pub states: Vec<String>,
    pub parents: Vec<String>,
    pub group: Option<NodeGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiEntry {
    /// One flag per entry of [`PiTable::measures`].
    pub taken: Vec<bool>,
    pub pi: f64,
}

/// Unsnapped cumulative preventive index for every behaviour combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiTable {
    pub measures: Vec<String>,
    pub entries: Vec<PiEntry>,
}

impl PiTable {
    pub fn from_pairs(pairs: &[(outbreak_core::model::PreventionProfile, f64)]) -> Self {
        Self {
            measures: Measure::ALL.iter().map(|m| m.name().to_string()).collect(),
            entries: pairs
                .iter()
                .map(|(p, pi)| PiEntry {
                    taken: p.flags().to_vec(),
                    pi: round6(*pi),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub variables: Vec<VariableDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_table: Option<PiTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    #[serde(default)]
    pub evidence: Evidence,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateProbability {
    pub state: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBody {
    pub target: String,
    pub distribution: Vec<StateProbability>,
}

impl From<&Posterior> for PosteriorBody {
    fn from(p: &Posterior) -> Self {
        Self {
            target: p.target().to_string(),
            distribution: p
                .iter()
                .map(|(s, v)| StateProbability {
                    state: s.to_string(),
                    probability: round6(v),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub posteriors: Vec<PosteriorBody>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impacts {
    pub u: f64,
    pub k: f64,
    pub q: f64,
    pub c: f64,
}

/// Omitted rates come from the model's `Test` node; omitted impacts use the
/// (4, 3, 2, 1) profile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RiskRequest {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub impacts: Option<Impacts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskResponse {
    pub fpr: f64,
    pub fnr: f64,
    pub impacts: Impacts,
    pub risk_p: f64,
    pub risk_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRowBody {
    pub evidence: BTreeMap<String, Option<String>>,
    pub label: String,
    pub computed: f64,
    pub reference: Option<f64>,
    pub abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBody {
    pub id: u32,
    pub name: String,
    pub value_label: String,
    pub rows: Vec<ScenarioRowBody>,
}

impl From<&ScenarioResult> for ScenarioBody {
    fn from(r: &ScenarioResult) -> Self {
        Self {
            id: r.id,
            name: r.name.clone(),
            value_label: r.value_label.clone(),
            rows: r
                .rows
                .iter()
                .map(|row| ScenarioRowBody {
                    evidence: row.assignments.iter().cloned().collect(),
                    label: row.evidence_label(),
                    computed: round6(row.computed),
                    reference: row.reference,
                    abs_diff: row.abs_diff().map(round6),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewSession {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionUpdate {
    pub label: Option<String>,
    pub evidence: Option<Evidence>,
}
