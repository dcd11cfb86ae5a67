//! Discrete Bayesian networks: validated representation, exact inference by
//! variable elimination, and a brute-force enumeration oracle.

mod elimination;
mod enumeration;
mod error;
mod factor;
mod network;
pub mod random;

pub use elimination::{expectation, posterior, posterior_with_order, posteriors, EliminationOrder};
pub use enumeration::{joint_enumeration, joint_enumeration_with_cap, DEFAULT_ENUMERATION_CAP};
pub use error::{BnError, Result};
pub use network::{Cpt, Evidence, Network, Posterior, Variable, ROW_TOLERANCE};

/// Validates and assembles a network; see [`Network::build`].
pub fn build_network(variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Network> {
    Network::build(variables, cpts)
}
