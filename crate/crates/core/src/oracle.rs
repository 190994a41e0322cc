//! Exhaustive design enumeration for toy instances.
//!
//! A pattern in service is determined by the set of direction-stops it
//! serves (its arcs follow stop order), so the design space of a route is
//! the set of (stop subset, headway) choices per pattern. Every such plan is
//! priced with the flow evaluator and, as a cross-check, by the MILP with all
//! design binaries fixed.

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, OracleError};
use crate::evaluator::{assign_flows, compute_metrics};
use crate::milp::{build_model, fix_baseline, MilpModel};
use crate::network::{DirStop, RouteSpec, Scenario};
use crate::plan::{cycle_time, FleetEntry, PatternPlan, ServicePlan};
use crate::solver::{HighsBackend, MilpBackend, SolveResult, SolveStatus, SolverConfig};

pub const MAX_PHYSICAL_STOPS: usize = 6;
pub const MAX_PATTERNS: usize = 2;
pub const MAX_MENU: usize = 2;
pub const MAX_ROUTES: usize = 2;

const MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch { delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `None` when no enumerated plan is feasible.
    pub best_objective: Option<f64>,
    pub best_plans: Vec<ServicePlan>,
    pub enumerated_count: usize,
    pub feasible_count: usize,
    pub milp_objective: Option<f64>,
    pub verdict: Verdict,
}

/// `|a - b| <= 1e-6 * max(1, |b|)`
pub fn objectives_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOLERANCE * b.abs().max(1.0)
}

fn check_size(s: &Scenario) -> Result<(), OracleError> {
    let too_large = |what: String| Err(OracleError::TooLarge(what));
    if s.periods.len() != 1 {
        return too_large(format!("{} periods (exactly 1 supported)", s.periods.len()));
    }
    if s.routes.len() > MAX_ROUTES {
        return too_large(format!("{} routes (at most {MAX_ROUTES})", s.routes.len()));
    }
    for route in &s.routes {
        if route.n_physical() > MAX_PHYSICAL_STOPS {
            return too_large(format!(
                "route {} has {} stops (at most {MAX_PHYSICAL_STOPS})",
                route.name,
                route.n_physical()
            ));
        }
        if route.n_patterns > MAX_PATTERNS {
            return too_large(format!(
                "route {} has {} patterns (at most {MAX_PATTERNS})",
                route.name, route.n_patterns
            ));
        }
        if route.headway_menus.iter().any(|m| m.len() > MAX_MENU) {
            return too_large(format!("route {} has a menu longer than {MAX_MENU}", route.name));
        }
    }
    Ok(())
}

/// Stop sets a single pattern may serve, in lexicographic order.
fn stop_sets(s: &Scenario, route: &RouteSpec) -> Vec<Vec<DirStop>> {
    let nd = route.n_dir();
    let mut out = Vec::new();
    for mask in 1u32..(1 << nd) {
        let stops: Vec<DirStop> = (0..nd).filter(|&i| mask & (1 << i) != 0).collect();
        if stops.len() < 2 {
            continue;
        }
        if s.options.enforce_symmetry {
            if stops.len() < 4 || stops.iter().any(|&i| mask & (1 << route.mirror(i)) == 0) {
                continue;
            }
        }
        let closed = stops
            .iter()
            .zip(stops.iter().cycle().skip(1))
            .all(|(&i, &j)| route.is_arc_allowed(i, j));
        if closed {
            out.push(stops);
        }
    }
    out.sort();
    out
}

/// Every design of one route in period 0, as per-pattern (stops, headway
/// index) lists.
fn route_designs(s: &Scenario, route: &RouteSpec) -> Vec<Vec<(Vec<DirStop>, usize)>> {
    let k = route.menu(0).len();
    let full: Vec<DirStop> = (0..route.n_dir()).collect();
    let sets = stop_sets(s, route);
    let options = |p: usize| -> Vec<(Vec<DirStop>, usize)> {
        let mut v = Vec::new();
        if p == 0 && s.options.require_full_pattern {
            for h in 1..=k {
                v.push((full.clone(), h));
            }
            return v;
        }
        for h in 1..=k {
            for set in &sets {
                v.push((set.clone(), h));
            }
        }
        v.push((Vec::new(), 0));
        v
    };
    let order_key = |h: usize| if h == 0 { usize::MAX } else { h };
    let mut designs: Vec<Vec<(Vec<DirStop>, usize)>> = vec![Vec::new()];
    for p in 0..route.n_patterns {
        let mut next = Vec::new();
        for partial in &designs {
            for option in options(p) {
                if let Some(prev) = partial.last() {
                    if order_key(prev.1) > order_key(option.1) {
                        continue;
                    }
                    // identical headways: keep one ordering of the two stop sets
                    let free = !(p == 1 && s.options.require_full_pattern);
                    if free && prev.1 == option.1 && prev.1 != 0 && prev.0 > option.0 {
                        continue;
                    }
                }
                let mut extended = partial.clone();
                extended.push(option);
                next.push(extended);
            }
        }
        designs = next;
    }
    // all patterns off only carries a route without demand
    let route_riders: f64 = route.demand.iter().map(|e| e.riders).sum();
    if route_riders > 0.0 {
        designs.retain(|d| d.iter().any(|(_, h)| *h != 0));
    }
    designs
}

fn vehicles_needed(s: &Scenario, route: &RouteSpec, design: &[(Vec<DirStop>, usize)]) -> f64 {
    let menu = route.menu(0);
    let need: f64 = design
        .iter()
        .filter(|(_, h)| *h != 0)
        .map(|(stops, h)| cycle_time(route, stops) / menu[h - 1])
        .sum();
    if s.options.integer_fleet {
        (need - 1e-9).ceil().max(0.0)
    } else {
        need
    }
}

fn to_plan(s: &Scenario, designs: &[&Vec<(Vec<DirStop>, usize)>], fleet: &[f64]) -> ServicePlan {
    let mut plan = ServicePlan::default();
    for (r, design) in designs.iter().enumerate() {
        let menu = s.routes[r].menu(0);
        for (p, (stops, h)) in design.iter().enumerate() {
            plan.patterns.push(if *h == 0 {
                PatternPlan::off(r, 0, p)
            } else {
                PatternPlan {
                    route: r,
                    period: 0,
                    pattern: p,
                    stops: stops.clone(),
                    headway: Some(menu[h - 1]),
                }
            });
        }
        plan.fleet.push(FleetEntry {
            route: r,
            period: 0,
            vehicles: fleet[r],
        });
    }
    plan
}

/// All distinct designs of a toy instance within the fleet caps, in a fixed
/// order. Pattern headway indices never decrease (out of service last) and
/// equal-headway patterns list their stop sets in ascending order.
pub fn enumerate_plans(s: &Scenario) -> Result<Vec<ServicePlan>, OracleError> {
    check_size(s)?;
    let per_route: Vec<_> = s.routes.iter().map(|route| route_designs(s, route)).collect();
    let mut plans = Vec::new();
    let mut pick = vec![0usize; s.routes.len()];
    if per_route.iter().any(|d| d.is_empty()) {
        return Ok(plans);
    }
    loop {
        let chosen: Vec<_> = pick.iter().enumerate().map(|(r, &k)| &per_route[r][k]).collect();
        let fleet: Vec<f64> = chosen
            .iter()
            .enumerate()
            .map(|(r, d)| vehicles_needed(s, &s.routes[r], d))
            .collect();
        let total: f64 = fleet.iter().sum();
        let hours = total * s.periods[0].duration_hours;
        if total <= s.fleet_cap + 1e-9 && hours <= s.vehicle_hours_cap + 1e-9 {
            plans.push(to_plan(s, &chosen, &fleet));
        }
        // odometer over routes
        let mut pos = s.routes.len();
        loop {
            if pos == 0 {
                return Ok(plans);
            }
            pos -= 1;
            pick[pos] += 1;
            if pick[pos] < per_route[pos].len() {
                break;
            }
            pick[pos] = 0;
        }
    }
}

/// Price one plan with the evaluator and with the fixed-design MILP;
/// `None` means the plan cannot carry the demand.
fn price(s: &Scenario, model: &MilpModel, plan: &ServicePlan) -> Result<Option<f64>, OracleError> {
    let evaluated = match assign_flows(s, plan) {
        Ok(fa) => Some(compute_metrics(&fa, s, plan).objective),
        Err(EvalError::Unreachable { .. } | EvalError::Infeasible { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let fixed = fix_baseline(model, plan, s)?;
    let result = HighsBackend.solve(&fixed, &SolverConfig::default())?;
    match (evaluated, &result.status) {
        (Some(e), SolveStatus::Optimal) => {
            if !objectives_match(result.objective, e) {
                return Err(OracleError::Inconsistent {
                    plan: plan.encoding(),
                    evaluator: e,
                    milp: result.objective,
                });
            }
            Ok(Some(e))
        }
        (None, SolveStatus::Infeasible) => Ok(None),
        (e, status) => Err(OracleError::FeasibilityMismatch {
            plan: plan.encoding(),
            evaluator: e.is_some(),
            milp: status.to_string(),
        }),
    }
}

/// Compare a MILP result against the best enumerated design.
pub fn certify(s: &Scenario, milp_result: &SolveResult) -> Result<OracleReport, OracleError> {
    let plans = enumerate_plans(s)?;
    let model = build_model(s)?;
    let mut priced = Vec::new();
    for plan in &plans {
        if let Some(objective) = price(s, &model, plan)? {
            priced.push((objective, plan));
        }
    }
    let best_objective = priced.iter().map(|(o, _)| *o).min_by(f64::total_cmp);
    let mut best_plans: Vec<ServicePlan> = match best_objective {
        Some(best) => priced
            .iter()
            .filter(|(o, _)| objectives_match(*o, best))
            .map(|(_, p)| (*p).clone())
            .collect(),
        None => Vec::new(),
    };
    best_plans.sort_by_key(|p| p.encoding());
    let milp_objective = milp_result.status.has_solution().then_some(milp_result.objective);
    let verdict = match (milp_objective, best_objective) {
        (Some(m), Some(b)) if objectives_match(m, b) => Verdict::Match,
        (Some(m), Some(b)) => Verdict::Mismatch { delta: m - b },
        (None, None) => Verdict::Match,
        (Some(m), None) => Verdict::Mismatch { delta: m },
        (None, Some(_)) => Verdict::Mismatch { delta: f64::INFINITY },
    };
    Ok(OracleReport {
        best_objective,
        best_plans,
        enumerated_count: plans.len(),
        feasible_count: priced.len(),
        milp_objective,
        verdict,
    })
}
