mod support;

use approx::assert_abs_diff_eq;
use support::{demand, full, plan, route, scenario};
use transit_design::evaluator::{
    assign_flows, compute_metrics, conservation_residual, fleet_requirement, share_residual,
};
use transit_design::{EvalError, PlanError, Scenario};

/// Two stops twelve minutes apart, thirty riders outbound.
fn shuttle(menu: &[f64], n_patterns: usize) -> Scenario {
    let mut r = route(2, 12.0, 3.0, n_patterns, menu);
    r.demand = vec![demand(0, 1, 30.0)];
    scenario(vec![r])
}

#[test]
fn single_full_pattern_hand_priced() {
    let s = shuttle(&[10.0], 1);
    let p = plan(&[(full(&s.routes[0]), Some(10.0))]);
    let fa = assign_flows(&s, &p).unwrap();
    let m = compute_metrics(&fa, &s, &p);
    // 30 * (12 + 1.5 * 10 / 2)
    assert_abs_diff_eq!(m.objective, 585.0, epsilon = 1e-9);
    assert_abs_diff_eq!(m.avg_riding_min, 12.0, epsilon = 1e-9);
    assert_abs_diff_eq!(m.avg_waiting_min, 5.0, epsilon = 1e-9);
    assert_abs_diff_eq!(m.total_riders, 30.0, epsilon = 1e-9);
    assert_eq!(m.transfers_count, 0.0);
}

#[test]
fn riders_split_by_frequency() {
    let s = shuttle(&[5.0, 10.0], 2);
    let loop_ = full(&s.routes[0]);
    let p = plan(&[(loop_.clone(), Some(5.0)), (loop_, Some(10.0))]);
    let fa = assign_flows(&s, &p).unwrap();
    let m = compute_metrics(&fa, &s, &p);
    // perceived headway 10/3, boardings 20 and 10
    assert_abs_diff_eq!(m.objective, 30.0 * 12.0 + 1.5 * 30.0 * (10.0 / 3.0) / 2.0, epsilon = 1e-9);
    assert_abs_diff_eq!(m.objective, 435.0, epsilon = 1e-9);
    let on = |q: usize| fa.boarding.iter().filter(|b| b.p == q).map(|b| b.riders).sum::<f64>();
    assert_abs_diff_eq!(on(0), 20.0, epsilon = 1e-9);
    assert_abs_diff_eq!(on(1), 10.0, epsilon = 1e-9);
    assert!(share_residual(&fa, &s) <= 1e-9);
    assert!(conservation_residual(&fa, &s) <= 1e-9);
    assert_eq!(fa.combo_choice.len(), 1);
}

/// Short-turn S0-S1 feeding a shuttle S1-S2.
fn feeder(allow_transfers: bool) -> (Scenario, transit_design::ServicePlan) {
    let mut r = route(3, 4.0, 0.0, 2, &[5.0, 10.0]);
    r.demand = vec![demand(0, 2, 10.0)];
    let mut s = scenario(vec![r]);
    s.options.allow_transfers = allow_transfers;
    let p = plan(&[(vec![0, 1, 4, 5], Some(5.0)), (vec![1, 2, 3, 4], Some(10.0))]);
    (s, p)
}

#[test]
fn transfer_hand_priced() {
    let (s, p) = feeder(true);
    let fa = assign_flows(&s, &p).unwrap();
    let m = compute_metrics(&fa, &s, &p);
    // ride 8, wait 1.5 * 5/2, transfer 2 * (10/2 + 3), ten riders
    assert_abs_diff_eq!(m.riding_minutes_total, 80.0, epsilon = 1e-9);
    assert_abs_diff_eq!(m.waiting_weighted_total, 37.5, epsilon = 1e-9);
    assert_abs_diff_eq!(m.transfer_weighted_total, 160.0, epsilon = 1e-9);
    assert_abs_diff_eq!(m.objective, 277.5, epsilon = 1e-9);
    assert_abs_diff_eq!(m.transfers_count, 10.0, epsilon = 1e-9);
    assert!(conservation_residual(&fa, &s) <= 1e-9);
}

#[test]
fn unreachable_pair_is_named() {
    let (s, p) = feeder(false);
    match assign_flows(&s, &p) {
        Err(EvalError::Unreachable { origin, destination, .. }) => {
            assert_eq!(origin, "S0");
            assert_eq!(destination, "S2");
        }
        other => panic!("expected unreachable, got {other:?}"),
    }
}

#[test]
fn capacity_limits_flow() {
    let mut s = shuttle(&[10.0], 1);
    s.options.enforce_capacity = true;
    // six vehicles an hour carrying four riders each
    s.routes[0].capacity = 4.0;
    let p = plan(&[(full(&s.routes[0]), Some(10.0))]);
    assert!(matches!(assign_flows(&s, &p), Err(EvalError::Infeasible { .. })));
    s.routes[0].capacity = 5.0;
    assert!(assign_flows(&s, &p).is_ok());
}

#[test]
fn zero_demand_is_free() {
    let mut s = shuttle(&[10.0], 1);
    s.routes[0].demand.clear();
    let p = plan(&[(full(&s.routes[0]), Some(10.0))]);
    let fa = assign_flows(&s, &p).unwrap();
    let m = compute_metrics(&fa, &s, &p);
    assert_eq!(m.objective, 0.0);
    assert_eq!(m.avg_journey_min, 0.0);
}

#[test]
fn objective_scales_with_demand_and_headway() {
    let mut r = route(4, 5.0, 2.0, 1, &[6.0, 12.0]);
    r.demand = vec![demand(0, 3, 20.0), demand(2, 1, 7.0), demand(3, 1, 11.0)];
    let s = scenario(vec![r]);
    let loop_ = full(&s.routes[0]);
    let price = |s: &Scenario, h: f64| {
        let p = plan(&[(loop_.clone(), Some(h))]);
        compute_metrics(&assign_flows(s, &p).unwrap(), s, &p).objective
    };
    let base = price(&s, 6.0);
    let mut doubled = s.clone();
    for e in &mut doubled.routes[0].demand {
        e.riders *= 2.0;
    }
    assert_abs_diff_eq!(price(&doubled, 6.0), 2.0 * base, epsilon = 1e-9);
    let slower = price(&s, 12.0);
    // only waiting changes: 38 riders wait 3 more minutes at weight 1.5
    assert_abs_diff_eq!(slower - base, 38.0 * 3.0 * 1.5, epsilon = 1e-9);
}

#[test]
fn express_pattern_saves_dwell() {
    let mut r = route(3, 5.0, 1.0, 1, &[6.0]);
    r.dwell_saving = 0.5;
    r.demand = vec![demand(0, 2, 10.0)];
    let s = scenario(vec![r]);
    let express = plan(&[(vec![0, 2, 3, 5], Some(6.0))]);
    let local = plan(&[(full(&s.routes[0]), Some(6.0))]);
    let fast = compute_metrics(&assign_flows(&s, &express).unwrap(), &s, &express);
    let slow = compute_metrics(&assign_flows(&s, &local).unwrap(), &s, &local);
    assert_abs_diff_eq!(slow.riding_minutes_total - fast.riding_minutes_total, 10.0 * 0.5, epsilon = 1e-9);
}

#[test]
fn fleet_seventy_minute_cycle_at_seven() {
    let s = scenario(vec![route(2, 30.0, 5.0, 1, &[7.0])]);
    let p = plan(&[(full(&s.routes[0]), Some(7.0))]);
    let need = fleet_requirement(&p, &s);
    assert_eq!(need.len(), 1);
    assert_eq!(need[0].vehicles, 10.0);
}

#[test]
fn fleet_sums_over_patterns() {
    let s = scenario(vec![route(3, 15.0, 0.0, 2, &[5.0, 10.0])]);
    let p = plan(&[(full(&s.routes[0]), Some(5.0)), (vec![0, 1, 4, 5], Some(10.0))]);
    // 60 / 5 + 30 / 10
    assert_eq!(fleet_requirement(&p, &s)[0].vehicles, 15.0);
    let off = plan(&[(full(&s.routes[0]), Some(5.0)), (vec![], None)]);
    assert_eq!(fleet_requirement(&off, &s)[0].vehicles, 12.0);
}

#[test]
fn malformed_plans_are_rejected() {
    let s = shuttle(&[5.0, 10.0], 2);
    let loop_ = full(&s.routes[0]);
    let off_menu = plan(&[(loop_.clone(), Some(6.0)), (vec![], None)]);
    assert!(matches!(assign_flows(&s, &off_menu), Err(EvalError::Plan(PlanError::HeadwayNotInMenu { .. }))));
    let missing = plan(&[(loop_, Some(5.0))]);
    assert!(matches!(assign_flows(&s, &missing), Err(EvalError::Plan(PlanError::MissingPattern { .. }))));
}
