//! Seeded random networks and evidence, used by property tests and benches.

use rand::seq::SliceRandom;
use rand::Rng;

use super::network::{Cpt, Evidence, Network, Variable};

/// Shape limits for [`random_dag_parts`].
#[derive(Debug, Clone, Copy)]
pub struct RandomShape {
    pub nodes: usize,
    pub max_parents: usize,
    pub max_states: usize,
    /// Probability that a CPT row is one-hot, to exercise zero entries.
    pub deterministic_rows: f64,
}

impl Default for RandomShape {
    fn default() -> Self {
        Self {
            nodes: 8,
            max_parents: 3,
            max_states: 2,
            deterministic_rows: 0.1,
        }
    }
}

/// Variables `X0..Xn` with parents drawn only from lower indices.
pub fn random_dag_parts<R: Rng + ?Sized>(rng: &mut R, shape: RandomShape) -> (Vec<Variable>, Vec<Cpt>) {
    let mut variables = Vec::with_capacity(shape.nodes);
    let mut parent_sets = Vec::with_capacity(shape.nodes);
    for i in 0..shape.nodes {
        let card = rng.random_range(2..=shape.max_states.max(2));
        variables.push(Variable::new(
            format!("X{i}"),
            (0..card).map(|s| format!("s{s}")),
        ));
        let mut candidates: Vec<usize> = (0..i).collect();
        candidates.shuffle(rng);
        let k = rng.random_range(0..=shape.max_parents.min(i));
        let mut parents: Vec<usize> = candidates.into_iter().take(k).collect();
        parents.sort_unstable();
        parent_sets.push(parents);
    }
    let cpts = parent_sets
        .iter()
        .enumerate()
        .map(|(i, parents)| random_cpt(rng, &variables, i, parents, shape.deterministic_rows))
        .collect();
    (variables, cpts)
}

pub fn random_cpt<R: Rng + ?Sized>(
    rng: &mut R,
    variables: &[Variable],
    child: usize,
    parents: &[usize],
    deterministic_rows: f64,
) -> Cpt {
    let card = variables[child].cardinality();
    let rows: usize = parents.iter().map(|&p| variables[p].cardinality()).product();
    let mut values = Vec::with_capacity(rows * card);
    for _ in 0..rows {
        if rng.random_bool(deterministic_rows) {
            let hot = rng.random_range(0..card);
            values.extend((0..card).map(|s| if s == hot { 1.0 } else { 0.0 }));
        } else {
            let raw: Vec<f64> = (0..card).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            values.extend(raw.into_iter().map(|v| v / sum));
        }
    }
    Cpt::new(
        variables[child].name(),
        parents.iter().map(|&p| variables[p].name().to_string()),
        values,
    )
}

pub fn random_network<R: Rng + ?Sized>(rng: &mut R, shape: RandomShape) -> Network {
    let (variables, cpts) = random_dag_parts(rng, shape);
    Network::build(variables, cpts).expect("generated network is valid")
}

/// Random evidence over up to `max_observed` variables, never touching `exclude`.
pub fn random_evidence<R: Rng + ?Sized>(
    rng: &mut R,
    net: &Network,
    exclude: &str,
    max_observed: usize,
) -> Evidence {
    let mut names: Vec<&Variable> = net.variables().iter().filter(|v| v.name() != exclude).collect();
    names.shuffle(rng);
    let k = rng.random_range(0..=max_observed.min(names.len()));
    names
        .into_iter()
        .take(k)
        .map(|v| {
            let s = rng.random_range(0..v.cardinality());
            (v.name().to_string(), v.states()[s].clone())
        })
        .collect()
}

/// Adds one edge that closes a cycle: some existing edge `a -> b` gains the
/// reverse edge `b -> a`. A chain edge is created first if the DAG has none.
/// Returns the `(from, to)` names of the added edge.
pub fn with_back_edge<R: Rng + ?Sized>(
    rng: &mut R,
    variables: &[Variable],
    cpts: &mut [Cpt],
) -> (String, String) {
    let find = |cpts: &[Cpt], name: &str| cpts.iter().position(|c| c.child() == name).expect("cpt");
    let id = |name: &str| variables.iter().position(|v| v.name() == name).expect("var");
    let edges: Vec<(String, String)> = cpts
        .iter()
        .flat_map(|c| c.parents().iter().map(move |p| (p.clone(), c.child().to_string())))
        .collect();
    let (a, b) = if edges.is_empty() {
        let (a, b) = (variables[0].name().to_string(), variables[1].name().to_string());
        let slot = find(cpts, &b);
        cpts[slot] = random_cpt(rng, variables, id(&b), &[id(&a)], 0.0);
        (a, b)
    } else {
        edges[rng.random_range(0..edges.len())].clone()
    };
    let slot = find(cpts, &a);
    let mut parents: Vec<usize> = cpts[slot].parents().iter().map(|p| id(p)).collect();
    parents.push(id(&b));
    cpts[slot] = random_cpt(rng, variables, id(&a), &parents, 0.0);
    (b, a)
}

/// Shifts one entry of one CPT row so that the row no longer sums to 1.
/// Returns `(child, row)`.
pub fn perturb_row<R: Rng + ?Sized>(rng: &mut R, variables: &[Variable], cpts: &mut [Cpt]) -> (String, usize) {
    let slot = rng.random_range(0..cpts.len());
    let card = variables
        .iter()
        .find(|v| v.name() == cpts[slot].child())
        .expect("var")
        .cardinality();
    let mut probs = cpts[slot].probabilities().to_vec();
    let row = rng.random_range(0..probs.len() / card);
    let entry = row * card + rng.random_range(0..card);
    let delta = rng.random_range(1e-6..0.5);
    probs[entry] = if probs[entry] + delta <= 1.0 {
        probs[entry] + delta
    } else {
        probs[entry] - delta
    };
    let c = &cpts[slot];
    let child = c.child().to_string();
    cpts[slot] = Cpt::new(child.clone(), c.parents().to_vec(), probs);
    (child, row)
}

/// Rewrites every row of `variables[var]`'s CPT so that `state` has probability
/// zero, making evidence `var = state` impossible.
pub fn forbid_state(variables: &[Variable], cpts: &mut [Cpt], var: usize, state: usize) {
    let name = variables[var].name();
    let card = variables[var].cardinality();
    let slot = cpts.iter().position(|c| c.child() == name).expect("cpt");
    let mut probs = cpts[slot].probabilities().to_vec();
    for row in probs.chunks_mut(card) {
        let removed = row[state];
        row[state] = 0.0;
        let other = (state + 1) % card;
        row[other] += removed;
    }
    let c = &cpts[slot];
    cpts[slot] = Cpt::new(name, c.parents().to_vec(), probs);
}
