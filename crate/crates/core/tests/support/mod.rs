#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use transit_design::network::{DemandEntry, OptionFlags, PeriodSpec, RouteSpec, Scenario};
use transit_design::evaluator::{
    assign_flows, compute_metrics, conservation_residual, fleet_requirement, share_residual, FlowAssignment,
};
use transit_design::milp::{build_model, MilpModel};
use transit_design::plan::{FleetEntry, PatternPlan, ServicePlan};
use transit_design::solver::{decode_plan, solve, SolveResult, SolveStatus, SolverConfig};

pub fn route(stops: usize, link: f64, turnback: f64, n_patterns: usize, menu: &[f64]) -> RouteSpec {
    RouteSpec {
        name: "Line".into(),
        stops: (0..stops).map(|k| format!("S{k}")).collect(),
        link_run_times: [vec![link; stops - 1], vec![link; stops - 1]],
        dwell_saving: 0.0,
        turnback_time: turnback,
        allowed_arcs: None,
        capacity: 1000.0,
        n_patterns,
        headway_menus: vec![menu.to_vec()],
        demand: Vec::new(),
    }
}

pub fn scenario(routes: Vec<RouteSpec>) -> Scenario {
    Scenario {
        periods: vec![PeriodSpec { id: 0, duration_hours: 1.0 }],
        routes,
        fleet_cap: 1000.0,
        vehicle_hours_cap: 1000.0,
        gamma_wait: 1.5,
        gamma_transfer: 2.0,
        transfer_time: 3.0,
        options: OptionFlags::default(),
    }
}

pub fn demand(o: usize, d: usize, riders: f64) -> DemandEntry {
    DemandEntry { t: 0, o, d, riders }
}

/// Plan for route 0, period 0 from (stops, headway) per pattern.
pub fn plan(patterns: &[(Vec<usize>, Option<f64>)]) -> ServicePlan {
    ServicePlan {
        patterns: patterns
            .iter()
            .enumerate()
            .map(|(p, (stops, headway))| PatternPlan {
                route: 0,
                period: 0,
                pattern: p,
                stops: stops.clone(),
                headway: *headway,
            })
            .collect(),
        fleet: vec![FleetEntry { route: 0, period: 0, vehicles: 0.0 }],
    }
}

pub fn full(route: &RouteSpec) -> Vec<usize> {
    (0..route.n_dir()).collect()
}

/// Small random single-route instance with the default cost weights.
pub fn random_toy(rng: &mut ChaCha8Rng, stops: usize, n_patterns: usize, symmetric: bool) -> Scenario {
    let out: Vec<f64> = (0..stops - 1).map(|_| rng.gen_range(2..=8) as f64).collect();
    let inb: Vec<f64> = out.iter().rev().map(|v| v + rng.gen_range(0..=1) as f64).collect();
    let low = rng.gen_range(3..=6) as f64;
    let high = low + rng.gen_range(2..=5) as f64;
    let mut r = RouteSpec {
        name: "Toy".into(),
        stops: (0..stops).map(|k| format!("S{k}")).collect(),
        link_run_times: [out, inb],
        dwell_saving: rng.gen_range(0..=2) as f64 * 0.25,
        turnback_time: rng.gen_range(1..=3) as f64,
        allowed_arcs: None,
        capacity: 1000.0,
        n_patterns,
        headway_menus: vec![vec![low, high]],
        demand: Vec::new(),
    };
    for o in 0..stops {
        for d in 0..stops {
            if o != d && rng.gen_bool(0.6) {
                r.demand.push(demand(o, d, rng.gen_range(5..=60) as f64));
            }
        }
    }
    let mut s = scenario(vec![r]);
    s.options.enforce_symmetry = symmetric;
    s
}

pub struct Solved {
    pub model: MilpModel,
    pub result: SolveResult,
    pub plan: ServicePlan,
    pub flows: FlowAssignment,
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * b.abs().max(1.0)
}

/// Solve to optimality and assert the invariants every solved instance must
/// satisfy: the objective recomputes from the assignment, the evaluator prices
/// the decoded plan identically, flows conserve, headways are ordered with
/// out-of-service patterns last and fleet caps hold.
pub fn solve_checked(s: &Scenario) -> Solved {
    let model = build_model(s).expect("model builds");
    let result = solve(&model, &SolverConfig::default()).expect("solver runs");
    assert_eq!(result.status, SolveStatus::Optimal);
    assert!(rel_close(model.objective_value(&result.assignment), result.objective));
    assert!(model.max_violation(&result.assignment) <= 1e-6);
    let (plan, flows) = decode_plan(&model, &result, s).expect("solution decodes");
    assert_solution_invariants(s, &plan, &flows, result.objective);
    Solved { model, result, plan, flows }
}

pub fn assert_solution_invariants(s: &Scenario, plan: &ServicePlan, flows: &FlowAssignment, objective: f64) {
    assert!(conservation_residual(flows, s) <= 1e-6);
    assert!(share_residual(flows, s) <= 1e-6);
    let decoded = compute_metrics(flows, s, plan).objective;
    assert!(rel_close(decoded, objective), "decoded flows {decoded} vs solver {objective}");
    let evaluated = assign_flows(s, plan).expect("decoded plan is evaluable");
    let priced = compute_metrics(&evaluated, s, plan).objective;
    assert!(rel_close(priced, objective), "evaluator {priced} vs solver {objective}");
    assert!(conservation_residual(&evaluated, s) <= 1e-6);
    assert!(share_residual(&evaluated, s) <= 1e-6);

    for (r, route) in s.routes.iter().enumerate() {
        for t in 0..s.periods.len() {
            let idx = plan.headway_indices(s, r, t).unwrap();
            let key = |h: usize| if h == 0 { usize::MAX } else { h };
            assert!(idx.windows(2).all(|w| key(w[0]) <= key(w[1])), "headway order {idx:?}");
            assert_eq!(idx.len(), route.n_patterns);
        }
    }
    let need = fleet_requirement(plan, s);
    let mut hours = 0.0;
    for (t, period) in s.periods.iter().enumerate() {
        let mut total = 0.0;
        for f in plan.fleet.iter().filter(|f| f.period == t) {
            let required = need.iter().find(|n| n.route == f.route && n.period == t).unwrap().vehicles;
            assert!(required <= f.vehicles + 1e-6);
            total += f.vehicles;
        }
        assert!(total <= s.fleet_cap);
        hours += total * period.duration_hours;
    }
    assert!(hours <= s.vehicle_hours_cap);
}
