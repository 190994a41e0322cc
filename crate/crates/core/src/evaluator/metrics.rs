use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_combinations, CombinationSet};
use crate::evaluator::flows::FlowAssignment;
use crate::network::{arc_travel_time, Scenario};
use crate::plan::{cycle_time, FleetEntry, ServicePlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// riding + weighted waiting + weighted transfer minutes
    pub objective: f64,
    pub riding_minutes_total: f64,
    pub waiting_weighted_total: f64,
    pub waiting_minutes_total: f64,
    pub transfer_weighted_total: f64,
    pub transfer_minutes_total: f64,
    pub transfers_count: f64,
    pub total_riders: f64,
    pub avg_riding_min: f64,
    pub avg_waiting_min: f64,
    pub avg_journey_min: f64,
    pub avg_objective_per_rider: f64,
    pub fleet_by_route_period: Vec<FleetEntry>,
}

fn combination_sets(s: &Scenario) -> Vec<Vec<CombinationSet>> {
    s.routes
        .iter()
        .map(|route| {
            (0..s.periods.len())
                .map(|t| enumerate_combinations(route.n_patterns, route.menu(t)).expect("validated menus"))
                .collect()
        })
        .collect()
}

pub fn compute_metrics(fa: &FlowAssignment, s: &Scenario, plan: &ServicePlan) -> Metrics {
    let combos = combination_sets(s);
    let perceived = |r: usize, t: usize, c: usize| combos[r][t].get(c).perceived_headway;

    let riding: f64 = fa
        .inter_stop
        .iter()
        .map(|l| arc_travel_time(&s.routes[l.route], l.i, l.j).expect("flow on a valid arc") * l.riders)
        .sum();
    let waiting: f64 = fa
        .entry
        .iter()
        .map(|e| perceived(e.route, e.period, e.c) / 2.0 * e.riders)
        .sum();
    let transfer: f64 = fa
        .transfer
        .iter()
        .map(|x| (perceived(x.route, x.period, x.c) / 2.0 + s.transfer_time) * x.riders)
        .sum();
    let waiting_weighted = s.gamma_wait * waiting;
    let transfer_weighted = s.gamma_transfer * transfer;
    let objective = riding + waiting_weighted + transfer_weighted;
    let riders = fa.total_entry();
    let per_rider = |total: f64| if riders > 0.0 { total / riders } else { 0.0 };
    Metrics {
        objective,
        riding_minutes_total: riding,
        waiting_weighted_total: waiting_weighted,
        waiting_minutes_total: waiting,
        transfer_weighted_total: transfer_weighted,
        transfer_minutes_total: transfer,
        transfers_count: fa.total_transfers(),
        total_riders: riders,
        avg_riding_min: per_rider(riding),
        avg_waiting_min: per_rider(waiting),
        avg_journey_min: per_rider(riding + waiting + transfer),
        avg_objective_per_rider: per_rider(objective),
        fleet_by_route_period: fleet_requirement(plan, s),
    }
}

/// Vehicles each (route, period) needs: loop time over headway, summed over
/// patterns in service.
pub fn fleet_requirement(plan: &ServicePlan, s: &Scenario) -> Vec<FleetEntry> {
    let mut out = Vec::new();
    for (r, route) in s.routes.iter().enumerate() {
        for t in 0..s.periods.len() {
            let vehicles = (0..route.n_patterns)
                .filter_map(|p| plan.pattern(r, t, p))
                .filter_map(|pp| pp.headway.map(|h| cycle_time(route, &pp.stops) / h))
                .sum();
            out.push(FleetEntry { route: r, period: t, vehicles });
        }
    }
    out
}

/// Largest deviation from the frequency-share rule over all combination
/// nodes: headway-weighted boardings of every two active patterns agree.
pub fn share_residual(fa: &FlowAssignment, s: &Scenario) -> f64 {
    let combos = combination_sets(s);
    let mut nodes: BTreeMap<(usize, usize, usize, usize, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    for b in &fa.boarding {
        *nodes
            .entry((b.route, b.period, b.d, b.i, b.c))
            .or_default()
            .entry(b.p)
            .or_insert(0.0) += b.riders;
    }
    let mut worst: f64 = 0.0;
    for ((r, t, _, _, c), boarded) in nodes {
        let combo = combos[r][t].get(c);
        let menu = s.routes[r].menu(t);
        let active: Vec<_> = combo.active_patterns().collect();
        for (k, &p1) in active.iter().enumerate() {
            for &p2 in &active[k + 1..] {
                let f1 = boarded.get(&p1).copied().unwrap_or(0.0);
                let f2 = boarded.get(&p2).copied().unwrap_or(0.0);
                let h1 = menu[combo.headway_indices[p1] - 1];
                let h2 = menu[combo.headway_indices[p2] - 1];
                worst = worst.max((h1 * f1 - h2 * f2).abs());
            }
        }
        for (&p, &f) in &boarded {
            if !combo.is_active(p) && f > 0.0 {
                worst = worst.max(f);
            }
        }
    }
    worst
}
