//! Exact inference by variable elimination.

use std::collections::BTreeMap;

use super::error::{BnError, Result};
use super::factor::Factor;
use super::network::{Evidence, Network, Posterior};
use crate::exec::{self, Execution};

/// Order in which hidden variables are summed out.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum EliminationOrder {
    /// Greedy minimum degree on the current interaction graph, ties broken by
    /// variable name.
    #[default]
    MinDegree,
    /// Caller-supplied order. Names that are not hidden for the query are
    /// skipped; hidden variables left out are eliminated afterwards by
    /// minimum degree.
    Explicit(Vec<String>),
}

/// `P(target | evidence)` by variable elimination with the min-degree order.
pub fn posterior(net: &Network, evidence: &Evidence, target: &str) -> Result<Posterior> {
    posterior_with_order(net, evidence, target, &EliminationOrder::MinDegree)
}

pub fn posterior_with_order(
    net: &Network,
    evidence: &Evidence,
    target: &str,
    order: &EliminationOrder,
) -> Result<Posterior> {
    let target_id = net.variable_id(target)?;
    let observed = net.resolve(evidence)?;
    if observed[target_id].is_some() {
        return Err(BnError::TargetObserved(target.to_string()));
    }

    let mut factors: Vec<Factor> = (0..net.len())
        .map(|id| {
            let mut vars = net.parent_ids(id).to_vec();
            vars.push(id);
            let cards = vars.iter().map(|&v| net.cardinality(v)).collect();
            let mut f = Factor::new(vars, cards, net.table(id).to_vec());
            for (v, s) in observed.iter().enumerate() {
                if let Some(s) = *s {
                    f = f.reduce(v, s);
                }
            }
            f
        })
        .collect();

    let mut hidden: Vec<usize> = (0..net.len())
        .filter(|&v| v != target_id && observed[v].is_none())
        .collect();

    if let EliminationOrder::Explicit(names) = order {
        for name in names {
            let id = net.variable_id(name)?;
            if let Some(pos) = hidden.iter().position(|&h| h == id) {
                hidden.remove(pos);
                eliminate(&mut factors, id);
            }
        }
    }
    while !hidden.is_empty() {
        let pos = pick_min_degree(net, &factors, &hidden);
        let id = hidden.remove(pos);
        eliminate(&mut factors, id);
    }

    let joint = factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
    // Only the target can remain in scope.
    let unnormalized = if joint.vars().is_empty() {
        vec![joint.values()[0]; net.cardinality(target_id)]
    } else {
        debug_assert_eq!(joint.vars(), &[target_id]);
        joint.values().to_vec()
    };
    normalize(net, target_id, unnormalized)
}

pub(crate) fn normalize(net: &Network, target: usize, values: Vec<f64>) -> Result<Posterior> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(BnError::ImpossibleEvidence);
    }
    let var = &net.variables()[target];
    Ok(Posterior::new(
        var.name().to_string(),
        var.states().to_vec(),
        values.into_iter().map(|v| v / total).collect(),
    ))
}

fn eliminate(factors: &mut Vec<Factor>, var: usize) {
    let (touching, rest): (Vec<Factor>, Vec<Factor>) =
        factors.drain(..).partition(|f| f.contains(var));
    *factors = rest;
    if touching.is_empty() {
        return;
    }
    let product = touching
        .iter()
        .skip(1)
        .fold(touching[0].clone(), |acc, f| acc.product(f));
    factors.push(product.sum_out(var));
}

fn pick_min_degree(net: &Network, factors: &[Factor], hidden: &[usize]) -> usize {
    let mut best: Option<(usize, &str, usize)> = None;
    for (pos, &v) in hidden.iter().enumerate() {
        let mut neighbours: Vec<usize> = factors
            .iter()
            .filter(|f| f.contains(v))
            .flat_map(|f| f.vars().iter().copied())
            .filter(|&u| u != v)
            .collect();
        neighbours.sort_unstable();
        neighbours.dedup();
        let degree = neighbours.len();
        let name = net.variables()[v].name();
        let better = match best {
            None => true,
            Some((d, n, _)) => degree < d || (degree == d && name < n),
        };
        if better {
            best = Some((degree, name, pos));
        }
    }
    best.map(|(_, _, pos)| pos).expect("hidden is nonempty")
}

/// Posterior-weighted mean of per-state `values` for `target`.
pub fn expectation(
    net: &Network,
    evidence: &Evidence,
    target: &str,
    values: &BTreeMap<String, f64>,
) -> Result<f64> {
    let var = net
        .variable(target)
        .ok_or_else(|| BnError::UnknownVariable(target.to_string()))?;
    let weights = var
        .states()
        .iter()
        .map(|s| {
            values.get(s).copied().ok_or_else(|| BnError::MissingStateValue {
                variable: target.to_string(),
                state: s.clone(),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let post = posterior(net, evidence, target)?;
    Ok(post
        .probabilities()
        .iter()
        .zip(&weights)
        .map(|(p, w)| p * w)
        .sum())
}

/// Posteriors for several targets under shared evidence, evaluated per `exec`.
pub fn posteriors(
    net: &Network,
    evidence: &Evidence,
    targets: &[String],
    exec: Execution,
) -> Vec<Result<Posterior>> {
    exec::map(exec, targets, |t| posterior(net, evidence, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{Cpt, Variable};

    fn chain() -> Network {
        Network::build(
            vec![Variable::new("A", ["a0", "a1"]), Variable::new("B", ["b0", "b1"])],
            vec![
                Cpt::prior("A", vec![0.3, 0.7]),
                Cpt::new("B", ["A"], vec![0.9, 0.1, 0.2, 0.8]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn root_prior_is_returned_without_evidence() {
        let net = Network::build(
            vec![Variable::new("HandWash", ["No", "Yes"])],
            vec![Cpt::prior("HandWash", vec![0.0812, 0.9188])],
        )
        .unwrap();
        let post = posterior(&net, &Evidence::new(), "HandWash").unwrap();
        assert!((post.probability("Yes").unwrap() - 0.9188).abs() < 1e-12);
        assert!((post.probability("No").unwrap() - 0.0812).abs() < 1e-12);
    }

    #[test]
    fn no_evidence_identity_on_chain() {
        let post = posterior(&chain(), &Evidence::new(), "A").unwrap();
        assert_eq!(post.probabilities(), &[0.3, 0.7]);
    }

    #[test]
    fn diagnostic_query_on_chain() {
        // P(A=a1 | B=b1) = 0.7*0.8 / (0.3*0.1 + 0.7*0.8)
        let post = posterior(&chain(), &Evidence::new().with("B", "b1"), "A").unwrap();
        let expected = 0.56 / 0.59;
        assert!((post.probability("a1").unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let net = chain();
        assert_eq!(
            posterior(&net, &Evidence::new(), "Z").unwrap_err(),
            BnError::UnknownVariable("Z".into())
        );
        assert_eq!(
            posterior(&net, &Evidence::new().with("A", "a0"), "A").unwrap_err(),
            BnError::TargetObserved("A".into())
        );
        assert!(matches!(
            posterior(&net, &Evidence::new().with("A", "purple"), "B").unwrap_err(),
            BnError::UnknownState { .. }
        ));
    }

    #[test]
    fn zero_probability_evidence_is_impossible() {
        let net = Network::build(
            vec![Variable::new("A", ["a0", "a1"]), Variable::new("B", ["b0", "b1"])],
            vec![
                Cpt::prior("A", vec![1.0, 0.0]),
                Cpt::new("B", ["A"], vec![1.0, 0.0, 0.5, 0.5]),
            ],
        )
        .unwrap();
        let err = posterior(&net, &Evidence::new().with("B", "b1"), "A").unwrap_err();
        assert_eq!(err, BnError::ImpossibleEvidence);
        assert_eq!(err.code(), "IMPOSSIBLE_EVIDENCE");
    }

    #[test]
    fn expectation_of_uniform_grid_is_midpoint() {
        let states: Vec<String> = (0..=10).map(|k| (10 * k).to_string()).collect();
        let net = Network::build(
            vec![Variable::new("IR", states.clone())],
            vec![Cpt::prior("IR", vec![1.0 / 11.0; 11])],
        )
        .unwrap();
        let values = states
            .iter()
            .map(|s| (s.clone(), s.parse::<f64>().unwrap()))
            .collect();
        let mean = expectation(&net, &Evidence::new(), "IR", &values).unwrap();
        assert!((mean - 50.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_of_single_state_node() {
        let net = Network::build(
            vec![Variable::new("K", ["only"])],
            vec![Cpt::prior("K", vec![1.0])],
        )
        .unwrap();
        let values = BTreeMap::from([("only".to_string(), 7.0)]);
        assert_eq!(expectation(&net, &Evidence::new(), "K", &values).unwrap(), 7.0);
        let err = expectation(&net, &Evidence::new(), "K", &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, BnError::MissingStateValue { .. }));
    }

    #[test]
    fn explicit_order_with_unknown_name_fails() {
        let err = posterior_with_order(
            &chain(),
            &Evidence::new(),
            "B",
            &EliminationOrder::Explicit(vec!["nope".into()]),
        )
        .unwrap_err();
        assert_eq!(err, BnError::UnknownVariable("nope".into()));
    }
}
