//! Validated network representation.
//!
//! CPT probabilities are stored row-major: parent assignments enumerate as an
//! odometer with the last parent changing fastest, and the child's states form
//! the innermost (contiguous) axis of each row.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::error::{BnError, Result};

/// Row sums must land within this distance of 1 before rows are renormalized.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new<N, S, I>(name: N, states: I) -> Self
    where
        N: Into<String>,
        S: Into<String>,
        I: IntoIterator<Item = S>,
    {
        Self {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Conditional probability table for one child given an ordered parent list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    child: String,
    parents: Vec<String>,
    probabilities: Vec<f64>,
}

impl Cpt {
    pub fn new<C, P, I>(child: C, parents: I, probabilities: Vec<f64>) -> Self
    where
        C: Into<String>,
        P: Into<String>,
        I: IntoIterator<Item = P>,
    {
        Self {
            child: child.into(),
            parents: parents.into_iter().map(Into::into).collect(),
            probabilities,
        }
    }

    /// CPT for a parentless variable.
    pub fn prior<C: Into<String>>(child: C, probabilities: Vec<f64>) -> Self {
        Self::new(child, Vec::<String>::new(), probabilities)
    }

    pub fn child(&self) -> &str {
        &self.child
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Observed states for a subset of variables. A variable appears at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Evidence(BTreeMap<String, String>);

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder form of [`Evidence::set`].
    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.set(variable, state);
        self
    }

    /// Assigns `state` to `variable`, replacing any earlier assignment.
    pub fn set(&mut self, variable: impl Into<String>, state: impl Into<String>) {
        self.0.insert(variable.into(), state.into());
    }

    pub fn remove(&mut self, variable: &str) -> Option<String> {
        self.0.remove(variable)
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn contains(&self, variable: &str) -> bool {
        self.0.contains_key(variable)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.0
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Evidence {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl From<BTreeMap<String, String>> for Evidence {
    fn from(map: BTreeMap<String, String>) -> Self {
        Self(map)
    }
}

/// Distribution of one target variable conditioned on some evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    target: String,
    states: Vec<String>,
    probabilities: Vec<f64>,
}

impl Posterior {
    pub(crate) fn new(target: String, states: Vec<String>, probabilities: Vec<f64>) -> Self {
        debug_assert_eq!(states.len(), probabilities.len());
        Self {
            target,
            states,
            probabilities,
        }
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, state: &str) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == state)
            .map(|i| self.probabilities[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.states
            .iter()
            .map(String::as_str)
            .zip(self.probabilities.iter().copied())
    }

    /// Largest per-state absolute difference to another distribution over the same states.
    pub fn max_abs_diff(&self, other: &Posterior) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// An immutable, validated discrete Bayesian network.
#[derive(Debug, Clone)]
pub struct Network {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    cpts: Vec<Cpt>,
    topological: Vec<usize>,
}

impl Network {
    /// Validates `variables` and `cpts` and assembles a network.
    ///
    /// Structural problems (duplicates, dangling names, missing tables,
    /// cycles) are reported before numeric ones (shape, range, row sums).
    /// Rows that pass the tolerance check are divided by their sum.
    pub fn build(variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Self> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, var) in variables.iter().enumerate() {
            if var.states.is_empty() {
                return Err(BnError::NoStates(var.name.clone()));
            }
            let mut seen = HashSet::new();
            for state in &var.states {
                if !seen.insert(state.as_str()) {
                    return Err(BnError::DuplicateState {
                        variable: var.name.clone(),
                        state: state.clone(),
                    });
                }
            }
            if index.insert(var.name.clone(), i).is_some() {
                return Err(BnError::DuplicateVariable(var.name.clone()));
            }
        }

        let mut slots: Vec<Option<Cpt>> = vec![None; variables.len()];
        let mut parents = vec![Vec::new(); variables.len()];
        for cpt in cpts {
            let child = *index
                .get(&cpt.child)
                .ok_or_else(|| BnError::DanglingReference {
                    cpt: cpt.child.clone(),
                    name: cpt.child.clone(),
                })?;
            if slots[child].is_some() {
                return Err(BnError::DuplicateCpt(cpt.child.clone()));
            }
            let mut ids = Vec::with_capacity(cpt.parents.len());
            for p in &cpt.parents {
                let id = *index.get(p).ok_or_else(|| BnError::DanglingReference {
                    cpt: cpt.child.clone(),
                    name: p.clone(),
                })?;
                if ids.contains(&id) {
                    return Err(BnError::DuplicateParent {
                        cpt: cpt.child.clone(),
                        parent: p.clone(),
                    });
                }
                ids.push(id);
            }
            parents[child] = ids;
            slots[child] = Some(cpt);
        }
        if let Some(i) = slots.iter().position(Option::is_none) {
            return Err(BnError::MissingCpt(variables[i].name.clone()));
        }
        let mut cpts: Vec<Cpt> = slots.into_iter().map(Option::unwrap).collect();

        let topological = topological_order(&variables, &parents)?;

        for (child, cpt) in cpts.iter_mut().enumerate() {
            normalize_cpt(&variables, &parents[child], child, cpt)?;
        }

        Ok(Self {
            variables,
            index,
            parents,
            cpts,
            topological,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.index.get(name).map(|&i| &self.variables[i])
    }

    pub fn variable_id(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| BnError::UnknownVariable(name.to_string()))
    }

    /// The (renormalized) CPT of `name`.
    pub fn cpt(&self, name: &str) -> Option<&Cpt> {
        self.index.get(name).map(|&i| &self.cpts[i])
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub(crate) fn parent_ids(&self, id: usize) -> &[usize] {
        &self.parents[id]
    }

    pub(crate) fn table(&self, id: usize) -> &[f64] {
        &self.cpts[id].probabilities
    }

    pub(crate) fn cardinality(&self, id: usize) -> usize {
        self.variables[id].cardinality()
    }

    /// Variable ids with every parent ahead of its children.
    pub fn topological_ids(&self) -> &[usize] {
        &self.topological
    }

    /// Conditional distribution of `child` for one parent assignment given as state labels.
    pub fn cpt_row(&self, child: &str, parent_states: &[&str]) -> Result<&[f64]> {
        let id = self.variable_id(child)?;
        let parents = &self.parents[id];
        if parent_states.len() != parents.len() {
            return Err(BnError::ShapeMismatch {
                cpt: child.to_string(),
                expected: parents.len(),
                actual: parent_states.len(),
            });
        }
        let mut row = 0;
        for (&p, &state) in parents.iter().zip(parent_states) {
            let var = &self.variables[p];
            let s = var.state_index(state).ok_or_else(|| BnError::UnknownState {
                variable: var.name.clone(),
                state: state.to_string(),
            })?;
            row = row * var.cardinality() + s;
        }
        let card = self.variables[id].cardinality();
        Ok(&self.cpts[id].probabilities[row * card..(row + 1) * card])
    }

    /// Maps evidence onto per-variable observed state indices.
    pub(crate) fn resolve(&self, evidence: &Evidence) -> Result<Vec<Option<usize>>> {
        let mut observed = vec![None; self.variables.len()];
        for (name, state) in evidence.iter() {
            let id = self.variable_id(name)?;
            let var = &self.variables[id];
            let s = var.state_index(state).ok_or_else(|| BnError::UnknownState {
                variable: name.to_string(),
                state: state.to_string(),
            })?;
            observed[id] = Some(s);
        }
        Ok(observed)
    }

    /// Checks every evidence entry names a known variable and state.
    pub fn validate_evidence(&self, evidence: &Evidence) -> Result<()> {
        self.resolve(evidence).map(|_| ())
    }
}

/// Kahn's algorithm; on failure a DFS over the leftover nodes names one back edge.
fn topological_order(variables: &[Variable], parents: &[Vec<usize>]) -> Result<Vec<usize>> {
    let n = variables.len();
    let mut children = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (child, ps) in parents.iter().enumerate() {
        indegree[child] = ps.len();
        for &p in ps {
            children[p].push(child);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    ready.reverse();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    for start in 0..n {
        if color[start] != 0 || indegree[start] == 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color[start] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&c) = children[v].get(*next) {
                *next += 1;
                match color[c] {
                    0 => {
                        color[c] = 1;
                        stack.push((c, 0));
                    }
                    1 => {
                        return Err(BnError::CycleDetected {
                            from: variables[v].name.clone(),
                            to: variables[c].name.clone(),
                        })
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    unreachable!("Kahn's algorithm left nodes but no back edge was found")
}

fn normalize_cpt(
    variables: &[Variable],
    parents: &[usize],
    child: usize,
    cpt: &mut Cpt,
) -> Result<()> {
    let card = variables[child].cardinality();
    let rows: usize = parents.iter().map(|&p| variables[p].cardinality()).product();
    let expected = rows * card;
    if cpt.probabilities.len() != expected {
        return Err(BnError::ShapeMismatch {
            cpt: cpt.child.clone(),
            expected,
            actual: cpt.probabilities.len(),
        });
    }
    if let Some((index, &value)) = cpt
        .probabilities
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0 + ROW_TOLERANCE).contains(*v))
    {
        return Err(BnError::ProbabilityOutOfRange {
            cpt: cpt.child.clone(),
            index,
            value,
        });
    }
    for (row, chunk) in cpt.probabilities.chunks_mut(card).enumerate() {
        let sum: f64 = chunk.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(BnError::UnnormalizedRow {
                cpt: cpt.child.clone(),
                row,
                parents: describe_row(variables, parents, row),
                sum,
            });
        }
        chunk.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(())
}

fn describe_row(variables: &[Variable], parents: &[usize], mut row: usize) -> String {
    if parents.is_empty() {
        return "prior".to_string();
    }
    let mut parts = Vec::with_capacity(parents.len());
    for &p in parents.iter().rev() {
        let var = &variables[p];
        parts.push(format!("{}={}", var.name, var.states[row % var.cardinality()]));
        row /= var.cardinality();
    }
    parts.reverse();
    parts.join(", ")
}
