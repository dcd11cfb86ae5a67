//! JSON model documents.
//!
//! A document has three top-level sections: `cpts` (child, parents, flat
//! row-major probabilities), `meta` (node-group tags) and `variables` (name,
//! ordered states). The canonical form sorts keys, prints every probability
//! with six decimals, puts one CPT row per line, and uses LF line endings.
//! Rows are rounded with largest-remainder allocation so each printed row
//! sums to exactly 1.000000.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bn::{BnError, Cpt, Network, Variable};
use crate::model::NodeGroup;

const MICRO: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("meta groups name unknown variable `{0}`")]
    UnknownGroupVariable(String),
    #[error(transparent)]
    Network(#[from] BnError),
}

impl ModelFileError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelFileError::Io(_) => "MODEL_UNREADABLE",
            ModelFileError::Parse(_) => "MODEL_PARSE_ERROR",
            ModelFileError::UnknownGroupVariable(_) => "DANGLING_REFERENCE",
            ModelFileError::Network(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default)]
    pub groups: BTreeMap<String, NodeGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub cpts: Vec<Cpt>,
    #[serde(default)]
    pub meta: Meta,
    pub variables: Vec<Variable>,
}

/// A network together with its node-group tags.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub network: Network,
    pub groups: BTreeMap<String, NodeGroup>,
}

impl LoadedModel {
    /// The built-in outbreak network with its group tags, at full precision.
    pub fn roosevelt() -> Self {
        Self {
            network: crate::model::roosevelt_network(),
            groups: crate::model::node_groups(),
        }
    }
}

pub fn parse_model(text: &str) -> Result<LoadedModel, ModelFileError> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    let network = Network::build(doc.variables, doc.cpts)?;
    if let Some(name) = doc.meta.groups.keys().find(|n| network.variable(n).is_none()) {
        return Err(ModelFileError::UnknownGroupVariable(name.clone()));
    }
    Ok(LoadedModel {
        network,
        groups: doc.meta.groups,
    })
}

pub fn load_model(path: &Path) -> Result<LoadedModel, ModelFileError> {
    parse_model(&std::fs::read_to_string(path)?)
}

/// Canonical text of `net` with the given group tags.
pub fn to_canonical_string(net: &Network, groups: &BTreeMap<String, NodeGroup>) -> String {
    let mut out = String::new();
    out.push_str("{\n  \"cpts\": [");
    for (i, cpt) in net.cpts().iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let card = net
            .variable(cpt.child())
            .expect("CPT child exists")
            .cardinality();
        write_cpt(&mut out, cpt, card);
    }
    out.push_str("\n  ],\n  \"meta\": {\n    \"groups\": {");
    let groups: Vec<_> = groups
        .iter()
        .filter(|(name, _)| net.variable(name).is_some())
        .collect();
    for (i, (name, group)) in groups.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "      {}: {}", quote(name), quote(group.as_str()));
    }
    if !groups.is_empty() {
        out.push_str("\n    ");
    }
    out.push_str("}\n  },\n  \"variables\": [");
    for (i, var) in net.variables().iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(
            out,
            "    {{\n      \"name\": {},\n      \"states\": {}\n    }}",
            quote(var.name()),
            string_list(var.states())
        );
    }
    out.push_str("\n  ]\n}\n");
    out
}

fn write_cpt(out: &mut String, cpt: &Cpt, card: usize) {
    let _ = write!(
        out,
        "    {{\n      \"child\": {},\n      \"parents\": {},\n      \"probabilities\": [\n",
        quote(cpt.child()),
        string_list(cpt.parents())
    );
    let rows: Vec<&[f64]> = cpt.probabilities().chunks(card).collect();
    for (r, row) in rows.iter().enumerate() {
        let cells: Vec<String> = round_row(row).into_iter().map(format_micro).collect();
        out.push_str("        ");
        out.push_str(&cells.join(", "));
        out.push_str(if r + 1 == rows.len() { "\n" } else { ",\n" });
    }
    out.push_str("      ]\n    }");
}

/// Rounds a normalized row to millionths that sum to exactly one million.
pub fn round_row(row: &[f64]) -> Vec<u64> {
    let sum: f64 = row.iter().sum();
    let scaled: Vec<f64> = row.iter().map(|p| p / sum * MICRO as f64).collect();
    let mut units: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = units.iter().sum();
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(MICRO.saturating_sub(assigned) as usize) {
        units[i] += 1;
    }
    units
}

fn format_micro(units: u64) -> String {
    format!("{}.{:06}", units / MICRO, units % MICRO)
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn string_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| quote(s)).collect();
    format!("[{}]", quoted.join(", "))
}
