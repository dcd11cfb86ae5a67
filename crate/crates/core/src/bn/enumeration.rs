//! Brute-force inference by summing the full factored joint.
//!
//! Shares no code with variable elimination beyond the network itself, so it
//! serves as the reference answer in tests.

use super::elimination::normalize;
use super::error::{BnError, Result};
use super::network::{Evidence, Network, Posterior};

/// Default upper bound on the number of joint entries enumerated.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 22;

pub fn joint_enumeration(net: &Network, evidence: &Evidence, target: &str) -> Result<Posterior> {
    joint_enumeration_with_cap(net, evidence, target, DEFAULT_ENUMERATION_CAP)
}

pub fn joint_enumeration_with_cap(
    net: &Network,
    evidence: &Evidence,
    target: &str,
    cap: u128,
) -> Result<Posterior> {
    let target_id = net.variable_id(target)?;
    let observed = net.resolve(evidence)?;
    if observed[target_id].is_some() {
        return Err(BnError::TargetObserved(target.to_string()));
    }
    let size = net
        .variables()
        .iter()
        .try_fold(1u128, |acc, v| acc.checked_mul(v.cardinality() as u128))
        .unwrap_or(u128::MAX);
    if size > cap {
        return Err(BnError::StateSpaceTooLarge { size, cap });
    }

    let n = net.len();
    let cards: Vec<usize> = net.variables().iter().map(|v| v.cardinality()).collect();
    let free: Vec<usize> = (0..n).filter(|&v| observed[v].is_none()).collect();
    let mut assignment: Vec<usize> = observed.iter().map(|s| s.unwrap_or(0)).collect();
    let mut sums = vec![0.0; cards[target_id]];

    loop {
        let mut p = 1.0;
        for v in 0..n {
            let mut row = 0;
            for &u in net.parent_ids(v) {
                row = row * cards[u] + assignment[u];
            }
            p *= net.table(v)[row * cards[v] + assignment[v]];
            if p == 0.0 {
                break;
            }
        }
        sums[assignment[target_id]] += p;

        // advance the free variables as an odometer
        let mut carried = true;
        for &v in free.iter().rev() {
            assignment[v] += 1;
            if assignment[v] < cards[v] {
                carried = false;
                break;
            }
            assignment[v] = 0;
        }
        if carried {
            break;
        }
    }
    normalize(net, target_id, sums)
}
