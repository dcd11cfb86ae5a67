//! Declarative evidence sweeps over a network, with published reference values
//! attached for comparison.

mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bn::{self, BnError, Evidence, Network};
use crate::exec::{self, Execution};
use crate::model::node;

pub use report::{emit_report, evidence_label, ReportFormat, ReferenceTables, CSV_HEADER};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("unknown scenario {0}")]
    UnknownScenario(u32),
    #[error(transparent)]
    Inference(#[from] BnError),
    #[error("malformed reference table: {0}")]
    Reference(String),
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::InvalidSpec(_) => "INVALID_SCENARIO",
            ScenarioError::UnknownScenario(_) => "SCENARIO_NOT_FOUND",
            ScenarioError::Inference(e) => e.code(),
            ScenarioError::Reference(_) => "REFERENCE_PARSE_ERROR",
        }
    }
}

/// One swept variable; `None` means "leave unobserved".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub variable: String,
    pub states: Vec<Option<String>>,
}

impl Sweep {
    /// Sweep over `states` followed by a no-evidence row.
    pub fn with_unobserved<S: Into<String>>(variable: &str, states: impl IntoIterator<Item = S>) -> Self {
        let mut states: Vec<Option<String>> = states.into_iter().map(|s| Some(s.into())).collect();
        states.push(None);
        Self {
            variable: variable.to_string(),
            states,
        }
    }

    pub fn observed_only<S: Into<String>>(variable: &str, states: impl IntoIterator<Item = S>) -> Self {
        Self {
            variable: variable.to_string(),
            states: states.into_iter().map(|s| Some(s.into())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ValueMap {
    Explicit(BTreeMap<String, f64>),
    /// Parse each state label as a number.
    StateLabels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Query {
    /// `100 * P(target = state | evidence)`.
    StateProbability { target: String, state: String },
    /// Posterior mean of per-state values.
    Expectation { target: String, values: ValueMap },
}

impl Query {
    pub fn target(&self) -> &str {
        match self {
            Query::StateProbability { target, .. } | Query::Expectation { target, .. } => target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: u32,
    pub name: String,
    pub sweeps: Vec<Sweep>,
    pub fixed: Evidence,
    pub query: Query,
}

impl ScenarioSpec {
    pub fn validate(&self, net: &Network) -> Result<(), ScenarioError> {
        let target = self.query.target();
        net.variable_id(target)?;
        if self.fixed.contains(target) {
            return Err(ScenarioError::InvalidSpec(format!("target `{target}` is fixed evidence")));
        }
        net.validate_evidence(&self.fixed)?;
        let mut seen = Vec::new();
        for sweep in &self.sweeps {
            if sweep.variable == target {
                return Err(ScenarioError::InvalidSpec(format!("target `{target}` is swept")));
            }
            if self.fixed.contains(&sweep.variable) || seen.contains(&sweep.variable.as_str()) {
                return Err(ScenarioError::InvalidSpec(format!(
                    "`{}` is assigned more than once",
                    sweep.variable
                )));
            }
            seen.push(sweep.variable.as_str());
            let var = net
                .variable(&sweep.variable)
                .ok_or_else(|| BnError::UnknownVariable(sweep.variable.clone()))?;
            for state in sweep.states.iter().flatten() {
                if var.state_index(state).is_none() {
                    return Err(BnError::UnknownState {
                        variable: sweep.variable.clone(),
                        state: state.clone(),
                    }
                    .into());
                }
            }
        }
        if let Query::StateProbability { state, .. } = &self.query {
            if net.variable(target).and_then(|v| v.state_index(state)).is_none() {
                return Err(BnError::UnknownState {
                    variable: target.to_string(),
                    state: state.clone(),
                }
                .into());
            }
        }
        Ok(())
    }

    /// All sweep combinations, first sweep slowest.
    pub fn combinations(&self) -> Vec<Vec<(String, Option<String>)>> {
        let mut combos: Vec<Vec<(String, Option<String>)>> = vec![Vec::new()];
        for sweep in &self.sweeps {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    sweep.states.iter().map(move |s| {
                        let mut row = prefix.clone();
                        row.push((sweep.variable.clone(), s.clone()));
                        row
                    })
                })
                .collect();
        }
        combos
    }

    pub fn value_label(&self) -> String {
        match &self.query {
            Query::StateProbability { target, state } => format!("P({target}={state}) %"),
            Query::Expectation { target, .. } => format!("E[{target}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub assignments: Vec<(String, Option<String>)>,
    pub computed: f64,
    pub reference: Option<f64>,
}

impl ScenarioRow {
    pub fn evidence_label(&self) -> String {
        evidence_label(&self.assignments)
    }

    pub fn abs_diff(&self) -> Option<f64> {
        self.reference.map(|r| (self.computed - r).abs())
    }

    /// State assigned to `variable` in this row, if any.
    pub fn state_of(&self, variable: &str) -> Option<&str> {
        self.assignments
            .iter()
            .find(|(v, _)| v == variable)
            .and_then(|(_, s)| s.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub id: u32,
    pub name: String,
    pub value_label: String,
    pub rows: Vec<ScenarioRow>,
}

impl ScenarioResult {
    /// Fills `reference` on every row the tables cover.
    pub fn with_reference(mut self, tables: &ReferenceTables) -> Self {
        for row in &mut self.rows {
            row.reference = tables.get(self.id, &row.evidence_label());
        }
        self
    }

    pub fn row(&self, assignments: &[(&str, Option<&str>)]) -> Option<&ScenarioRow> {
        self.rows.iter().find(|r| {
            r.assignments.len() == assignments.len()
                && r
                    .assignments
                    .iter()
                    .zip(assignments)
                    .all(|((v, s), (v2, s2))| v == v2 && s.as_deref() == *s2)
        })
    }
}

pub fn run_scenario(spec: &ScenarioSpec, net: &Network) -> Result<ScenarioResult, ScenarioError> {
    run_scenario_with(spec, net, Execution::default())
}

/// Evaluates every sweep combination; rows come back in combination order
/// regardless of `exec`.
pub fn run_scenario_with(
    spec: &ScenarioSpec,
    net: &Network,
    exec: Execution,
) -> Result<ScenarioResult, ScenarioError> {
    spec.validate(net)?;
    let values = match &spec.query {
        Query::Expectation { target, values } => Some(resolve_values(net, target, values)?),
        Query::StateProbability { .. } => None,
    };
    let combos = spec.combinations();
    let computed = exec::map(exec, &combos, |combo| {
        let mut evidence = spec.fixed.clone();
        for (var, state) in combo {
            if let Some(s) = state {
                evidence.set(var.clone(), s.clone());
            }
        }
        match &spec.query {
            Query::StateProbability { target, state } => bn::posterior(net, &evidence, target)
                .map(|p| 100.0 * p.probability(state).expect("state validated")),
            Query::Expectation { target, .. } => {
                bn::expectation(net, &evidence, target, values.as_ref().expect("resolved"))
            }
        }
    });
    let rows = combos
        .into_iter()
        .zip(computed)
        .map(|(assignments, value)| {
            Ok(ScenarioRow {
                assignments,
                computed: value?,
                reference: None,
            })
        })
        .collect::<Result<Vec<_>, BnError>>()?;
    Ok(ScenarioResult {
        id: spec.id,
        name: spec.name.clone(),
        value_label: spec.value_label(),
        rows,
    })
}

fn resolve_values(net: &Network, target: &str, values: &ValueMap) -> Result<BTreeMap<String, f64>, ScenarioError> {
    match values {
        ValueMap::Explicit(map) => Ok(map.clone()),
        ValueMap::StateLabels => {
            let var = net
                .variable(target)
                .ok_or_else(|| BnError::UnknownVariable(target.to_string()))?;
            var.states()
                .iter()
                .map(|s| {
                    s.parse::<f64>().map(|v| (s.clone(), v)).map_err(|_| {
                        ScenarioError::InvalidSpec(format!("state `{s}` of `{target}` is not numeric"))
                    })
                })
                .collect()
        }
    }
}

const SYMPTOMS: [&str; 5] = ["0", "1-3", "4-5", "6-8", ">8"];

/// The four published experiments on the carrier model.
pub fn builtin_scenarios() -> Vec<ScenarioSpec> {
    vec![
        ScenarioSpec {
            id: 1,
            name: "Effects of PreventionIndex on HasCovid with InfectionRate = 70%".into(),
            sweeps: vec![
                Sweep::with_unobserved(node::VULNERABLE, ["Yes", "No"]),
                Sweep::with_unobserved(node::PREVENTION_INDEX, ["0.9", "1.0", "1.5", "2.0", "2.3"]),
            ],
            fixed: Evidence::new().with(node::INFECTION_RATE, "70"),
            query: Query::StateProbability {
                target: node::HAS_COVID.into(),
                state: "Yes".into(),
            },
        },
        ScenarioSpec {
            id: 2,
            name: "Influences of Symptoms on HasCovid".into(),
            sweeps: vec![Sweep::with_unobserved(node::SYMPTOMS, SYMPTOMS)],
            fixed: Evidence::new(),
            query: Query::StateProbability {
                target: node::HAS_COVID.into(),
                state: "Yes".into(),
            },
        },
        ScenarioSpec {
            id: 3,
            name: "Impacts of HasCovid on Vulnerable".into(),
            sweeps: vec![Sweep::with_unobserved(node::HAS_COVID, ["Yes", "No"])],
            fixed: Evidence::new(),
            query: Query::StateProbability {
                target: node::VULNERABLE.into(),
                state: "Yes".into(),
            },
        },
        ScenarioSpec {
            id: 4,
            name: "Estimated InfectionRate given Symptoms and PreventionIndex".into(),
            sweeps: vec![
                Sweep::observed_only(node::PREVENTION_INDEX, ["0.9", "1.5", "2.3"]),
                Sweep::with_unobserved(node::SYMPTOMS, SYMPTOMS),
            ],
            fixed: Evidence::new(),
            query: Query::Expectation {
                target: node::INFECTION_RATE.into(),
                values: ValueMap::StateLabels,
            },
        },
    ]
}

pub fn builtin_scenario(id: u32) -> Result<ScenarioSpec, ScenarioError> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or(ScenarioError::UnknownScenario(id))
}

/// Runs builtin scenario `id` and attaches the bundled reference values.
pub fn run_builtin(id: u32, net: &Network, exec: Execution) -> Result<ScenarioResult, ScenarioError> {
    let spec = builtin_scenario(id)?;
    Ok(run_scenario_with(&spec, net, exec)?.with_reference(ReferenceTables::bundled()))
}
