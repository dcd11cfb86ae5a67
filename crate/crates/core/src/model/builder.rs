use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::formulas::{cumulative_pi, has_covid_prob, has_covid_raw, snap_to_grid, vulnerability};
use super::inputs::{Measure, ModelConfig, ModelInputs, PreventionProfile, AGE_BANDS, GENDERS, SYMPTOM_STATES};
use super::{node, ModelError};
use crate::bn::{Cpt, Network, Variable};

const BINARY: [&str; 2] = ["No", "Yes"];

/// Knowledge order of a node: survey priors, values computed from closed-form
/// rules, or quantities observed/inferred downstream of infection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeGroup {
    Prior,
    Computed,
    Inferred,
}

impl NodeGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeGroup::Prior => "prior",
            NodeGroup::Computed => "computed",
            NodeGroup::Inferred => "inferred",
        }
    }

    pub fn parse(s: &str) -> Option<NodeGroup> {
        match s {
            "prior" => Some(NodeGroup::Prior),
            "computed" => Some(NodeGroup::Computed),
            "inferred" => Some(NodeGroup::Inferred),
            _ => None,
        }
    }
}

pub fn node_groups() -> BTreeMap<String, NodeGroup> {
    let mut groups: BTreeMap<String, NodeGroup> = Measure::ALL
        .iter()
        .map(|m| (m.name().to_string(), NodeGroup::Prior))
        .collect();
    for name in [node::GENDER, node::AGE, node::INFECTION_RATE] {
        groups.insert(name.into(), NodeGroup::Prior);
    }
    for name in [node::PREVENTION_INDEX, node::VULNERABLE, node::HAS_COVID] {
        groups.insert(name.into(), NodeGroup::Computed);
    }
    for name in [node::SYMPTOMS, node::TEST] {
        groups.insert(name.into(), NodeGroup::Inferred);
    }
    groups
}

/// State label for a grid value; whole numbers keep one decimal when
/// `keep_decimal` is set (`1.0`), otherwise print bare (`70`).
pub fn grid_label(value: f64, keep_decimal: bool) -> String {
    if keep_decimal && value.fract() == 0.0 {
        format!("{value:.1}")
    } else {
        format!("{value}")
    }
}

pub fn pi_labels(config: &ModelConfig) -> Vec<String> {
    config.pi_grid.iter().map(|&v| grid_label(v, true)).collect()
}

pub fn ir_labels(config: &ModelConfig) -> Vec<String> {
    config.ir_states.iter().map(|&v| grid_label(v, false)).collect()
}

/// Builds the carrier outbreak network:
///
/// * seven binary prevention nodes feeding a deterministic `PreventionIndex`
///   node (cumulative index snapped to `pi_grid`),
/// * `Gender` and `Age` feeding `Vulnerable`,
/// * a uniform `InfectionRate` node,
/// * `HasCovid` given (`InfectionRate`, `PreventionIndex`, `Vulnerable`),
/// * `Symptoms` and `Test` given `HasCovid`.
pub fn build_roosevelt_model(config: &ModelConfig, inputs: &ModelInputs) -> Result<Network, ModelError> {
    config.validate()?;
    inputs.demographics.validate()?;
    for m in &inputs.measures {
        m.validate()?;
    }

    let mut variables = Vec::new();
    let mut cpts = Vec::new();

    for m in &inputs.measures {
        variables.push(Variable::new(m.measure.name(), BINARY));
        cpts.push(Cpt::prior(m.measure.name(), vec![1.0 - m.prior_yes, m.prior_yes]));
    }

    let indices = inputs.preventive_indices()?;
    let pi_states = pi_labels(config);
    let mut pi_rows = Vec::with_capacity(128 * pi_states.len());
    for profile in PreventionProfile::all() {
        let hit = snap_to_grid(cumulative_pi(config.pi_default, &profile, &indices), &config.pi_grid);
        pi_rows.extend((0..pi_states.len()).map(|k| if k == hit { 1.0 } else { 0.0 }));
    }
    variables.push(Variable::new(node::PREVENTION_INDEX, pi_states));
    cpts.push(Cpt::new(
        node::PREVENTION_INDEX,
        inputs.measures.iter().map(|m| m.measure.name()),
        pi_rows,
    ));

    let demo = &inputs.demographics;
    variables.push(Variable::new(node::GENDER, GENDERS));
    cpts.push(Cpt::prior(node::GENDER, demo.gender_priors.to_vec()));
    variables.push(Variable::new(node::AGE, AGE_BANDS));
    cpts.push(Cpt::prior(node::AGE, demo.age_priors.to_vec()));

    let mut vul_rows = Vec::with_capacity(16);
    for &g in &demo.gender_rates {
        for &a in &demo.age_rates {
            let v = vulnerability(a, g)?;
            vul_rows.extend([1.0 - v, v]);
        }
    }
    variables.push(Variable::new(node::VULNERABLE, BINARY));
    cpts.push(Cpt::new(node::VULNERABLE, [node::GENDER, node::AGE], vul_rows));

    let n_ir = config.ir_states.len();
    variables.push(Variable::new(node::INFECTION_RATE, ir_labels(config)));
    cpts.push(Cpt::prior(node::INFECTION_RATE, vec![1.0 / n_ir as f64; n_ir]));

    let mut covid_rows = Vec::with_capacity(n_ir * config.pi_grid.len() * 4);
    for &ir in &config.ir_states {
        for &pi in &config.pi_grid {
            for vulnerable in [false, true] {
                let p = has_covid_prob(ir / 100.0, pi, vulnerable)?;
                covid_rows.extend([1.0 - p, p]);
            }
        }
    }
    variables.push(Variable::new(node::HAS_COVID, BINARY));
    cpts.push(Cpt::new(
        node::HAS_COVID,
        [node::INFECTION_RATE, node::PREVENTION_INDEX, node::VULNERABLE],
        covid_rows,
    ));

    let [healthy, infected] = inputs.symptoms.cpt_rows()?;
    variables.push(Variable::new(node::SYMPTOMS, SYMPTOM_STATES));
    cpts.push(Cpt::new(
        node::SYMPTOMS,
        [node::HAS_COVID],
        healthy.iter().chain(&infected).copied().collect(),
    ));

    let t = config.test_rates;
    variables.push(Variable::new(node::TEST, ["Positive", "Negative"]));
    cpts.push(Cpt::new(
        node::TEST,
        [node::HAS_COVID],
        vec![t.fpr, 1.0 - t.fpr, 1.0 - t.fnr, t.fnr],
    ));

    Ok(Network::build(variables, cpts)?)
}

/// The model with bundled inputs and default grids.
pub fn roosevelt_network() -> Network {
    build_roosevelt_model(&ModelConfig::default(), &ModelInputs::roosevelt())
        .expect("bundled model inputs are valid")
}

/// A `HasCovid` CPT cell whose raw value exceeded 1 and was clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClampedCell {
    pub infection_rate: f64,
    pub prevention_index: f64,
    pub vulnerable: bool,
    pub raw: f64,
}

/// Every `HasCovid` cell where clamping to 1 changed the value.
pub fn clamped_cells(config: &ModelConfig) -> Result<Vec<ClampedCell>, ModelError> {
    let mut out = Vec::new();
    for &ir in &config.ir_states {
        for &pi in &config.pi_grid {
            for vulnerable in [false, true] {
                let raw = has_covid_raw(ir / 100.0, pi, vulnerable)?;
                if raw > 1.0 {
                    out.push(ClampedCell {
                        infection_rate: ir,
                        prevention_index: pi,
                        vulnerable,
                        raw,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Unsnapped cumulative preventive index for each of the 128 behaviour profiles.
pub fn pi_table(config: &ModelConfig, inputs: &ModelInputs) -> Result<Vec<(PreventionProfile, f64)>, ModelError> {
    let indices = inputs.preventive_indices()?;
    Ok(PreventionProfile::all()
        .map(|p| (p, cumulative_pi(config.pi_default, &p, &indices)))
        .collect())
}
