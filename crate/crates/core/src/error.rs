use thiserror::Error;

use crate::network::Violation;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("direction-stop {stop} out of range for a loop of {n_dir} stops")]
    StopOutOfRange { stop: usize, n_dir: usize },
    #[error("arc from direction-stop {stop} to itself has no travel time")]
    SelfArc { stop: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombinationError {
    #[error("headway menu is empty")]
    EmptyMenu,
    #[error("a combination needs at least one pattern")]
    NoPatterns,
    #[error("combination has no pattern in service")]
    AllOutOfService,
    #[error("headway index {index} is outside a menu of {menu_len} entries")]
    IndexOutOfMenu { index: usize, menu_len: usize },
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("scenario is invalid: {}", join(.0))]
    InvalidScenario(Vec<Violation>),
    #[error("route {route}: {message}")]
    Structural { route: usize, message: String },
    #[error(transparent)]
    Combination(#[from] CombinationError),
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("plan has no entry for route {route}, period {period}, pattern {pattern}")]
    MissingPattern { route: usize, period: usize, pattern: usize },
    #[error("plan references route {route}, period {period}, pattern {pattern} that the scenario lacks")]
    UnknownPattern { route: usize, period: usize, pattern: usize },
    #[error("route {route}, period {period}, pattern {pattern}: {message}")]
    MalformedPattern {
        route: usize,
        period: usize,
        pattern: usize,
        message: String,
    },
    #[error("route {route}, period {period}, pattern {pattern}: arc {from} -> {to} is not allowed")]
    ArcNotAllowed {
        route: usize,
        period: usize,
        pattern: usize,
        from: usize,
        to: usize,
    },
    #[error("route {route}, period {period}, pattern {pattern}: headway {headway} is not on the menu")]
    HeadwayNotInMenu {
        route: usize,
        period: usize,
        pattern: usize,
        headway: f64,
    },
    #[error("route {route}, period {period}: pattern 0 must serve every stop")]
    FullPatternRequired { route: usize, period: usize },
    #[error("route {route}, period {period}, pattern {pattern}: not mirror-symmetric")]
    NotSymmetric { route: usize, period: usize, pattern: usize },
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver backend `{0}` is not available")]
    BackendUnavailable(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("solver backend failed: {0}")]
    Backend(String),
    #[error("model file i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("solve status {0} carries no solution to decode")]
    NoSolution(String),
    #[error("binary variable {name} has fractional value {value}")]
    FractionalBinary { name: String, value: f64 },
    #[error("route {route}, period {period}, pattern {pattern}: {message}")]
    InvalidLoop {
        route: usize,
        period: usize,
        pattern: usize,
        message: String,
    },
    #[error("decoded plan violates {0}")]
    Invariant(String),
    #[error("assignment length {got} does not match model with {expected} variables")]
    AssignmentLength { got: usize, expected: usize },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("route {route}, period {period}: no feasible path from stop {origin} to stop {destination} under this plan")]
    Unreachable {
        route: usize,
        period: usize,
        origin: String,
        destination: String,
    },
    #[error("route {route}, period {period}: demand cannot be routed within the plan's capacity")]
    Infeasible { route: usize, period: usize },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("evaluator ({evaluator}) and fixed-design MILP ({milp}) disagree on plan {plan}")]
    Inconsistent {
        plan: String,
        evaluator: f64,
        milp: f64,
    },
    #[error("evaluator feasibility ({evaluator}) disagrees with fixed-design MILP status {milp} on plan {plan}")]
    FeasibilityMismatch {
        plan: String,
        evaluator: bool,
        milp: String,
    },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
