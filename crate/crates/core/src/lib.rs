//! Exact Bayesian inference and decision-risk scoring for the USS Theodore
//! Roosevelt COVID-19 outbreak model.
//!
//! * [`bn`]: discrete networks, variable elimination, enumeration oracle
//! * [`model`]: preventive index, vulnerability and infection CPT rules, and
//!   the assembled outbreak network
//! * [`risk`]: test error rates, infection rate, positive/negative risk
//! * [`scenario`]: evidence sweeps with published reference values
//! * [`model_file`]: canonical JSON model documents
//! * [`exec`]: rayon-backed map with a sequential fallback

pub mod bn;
pub mod exec;
pub mod model;
pub mod model_file;
pub mod risk;
pub mod scenario;

pub use bn::{BnError, Cpt, Evidence, Network, Posterior, Variable};
pub use exec::Execution;
