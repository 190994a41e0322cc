//! Joint stop-pattern, headway and fleet-size design for transit lines.
//!
//! A [`Scenario`] describes routes, demand and caps. [`milp::build_model`]
//! turns it into a destination-labelled multi-commodity flow MILP which a
//! [`solver::MilpBackend`] solves; [`solver::decode_plan`] reads the design
//! back as a [`ServicePlan`]. [`evaluator::assign_flows`] prices any fixed plan
//! independently of the MILP, and [`oracle::certify`] enumerates every design of
//! a toy instance to check the MILP optimum.

pub mod combinatorics;
pub mod error;
pub mod evaluator;
pub mod milp;
pub mod network;
pub mod oracle;
pub mod plan;
pub mod solver;

pub use combinatorics::{enumerate_combinations, frequency_shares, perceived_headway, Combination, CombinationSet};
pub use error::{
    BuildError, CombinationError, DecodeError, EvalError, OracleError, PlanError, ScenarioError, SolverError,
};
pub use network::{load_scenario, validate_scenario, RouteSpec, Scenario, Violation};
pub use plan::{PatternPlan, ServicePlan};
