use std::collections::BTreeMap;

use crate::error::DecodeError;
use crate::evaluator::{
    BoardingFlow, EntryFlow, ExitFlow, FlowAssignment, RideFlow, TransferFlow,
};
use crate::milp::{MilpModel, VarKind, VarTag};
use crate::network::{DirStop, Scenario};
use crate::plan::{cycle_time, FleetEntry, PatternPlan, ServicePlan};
use crate::solver::SolveResult;

/// Integral variables must lie this close to an integer.
pub const BINARY_TOLERANCE: f64 = 1e-6;
/// Flows below `-FLOW_TOLERANCE` are an error rather than round-off.
const FLOW_TOLERANCE: f64 = 1e-9;
const CAP_TOLERANCE: f64 = 1e-6;

/// Read a solution back as a service plan and the flows that price it.
/// Nothing is repaired: any decoded value that breaks the loop, headway or
/// fleet rules is reported as an error.
pub fn decode_plan(
    m: &MilpModel,
    result: &SolveResult,
    s: &Scenario,
) -> Result<(ServicePlan, FlowAssignment), DecodeError> {
    if !result.status.has_solution() {
        return Err(DecodeError::NoSolution(result.status.to_string()));
    }
    let x = &result.assignment;
    if x.len() != m.n_vars() {
        return Err(DecodeError::AssignmentLength {
            got: x.len(),
            expected: m.n_vars(),
        });
    }

    let mut arcs: BTreeMap<(usize, usize, usize), Vec<(DirStop, DirStop)>> = BTreeMap::new();
    let mut headway: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
    let mut fleet: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut fa = FlowAssignment::default();

    for v in &m.variables {
        let value = x[v.id];
        let rounded = value.round();
        if v.kind != VarKind::Continuous && (value - rounded).abs() > BINARY_TOLERANCE {
            return Err(DecodeError::FractionalBinary {
                name: v.tag.to_string(),
                value,
            });
        }
        let on = v.kind == VarKind::Binary && rounded >= 0.5;
        let flow = || -> Result<Option<f64>, DecodeError> {
            if value < -FLOW_TOLERANCE {
                return Err(DecodeError::Invariant(format!("negative flow {value} on {}", v.tag)));
            }
            Ok((value > 0.0).then_some(value))
        };
        match v.tag {
            VarTag::X { r, t, p, i, j } => {
                if on {
                    arcs.entry((r as usize, t as usize, p as usize))
                        .or_default()
                        .push((i as usize, j as usize));
                }
            }
            VarTag::Y { r, t, p, h } => {
                if on {
                    headway.entry((r as usize, t as usize, p as usize)).or_default().push(h as usize);
                }
            }
            VarTag::NFleet { r, t } => {
                let n = if v.kind == VarKind::Continuous {
                    (value.max(0.0) * 1e6).round() / 1e6
                } else {
                    rounded
                };
                fleet.insert((r as usize, t as usize), n);
            }
            VarTag::FOmega { r, t, d, i, c } => {
                if let Some(riders) = flow()? {
                    fa.entry.push(EntryFlow {
                        route: r as usize,
                        period: t as usize,
                        d: d as usize,
                        i: i as usize,
                        c: c as usize,
                        riders,
                    });
                }
            }
            VarTag::FAlpha { r, t, d, i, c, p } => {
                if let Some(riders) = flow()? {
                    fa.boarding.push(BoardingFlow {
                        route: r as usize,
                        period: t as usize,
                        d: d as usize,
                        i: i as usize,
                        c: c as usize,
                        p: p as usize,
                        riders,
                    });
                }
            }
            VarTag::FLambda { r, t, d, p, i, j } => {
                if let Some(riders) = flow()? {
                    fa.inter_stop.push(RideFlow {
                        route: r as usize,
                        period: t as usize,
                        d: d as usize,
                        p: p as usize,
                        i: i as usize,
                        j: j as usize,
                        riders,
                    });
                }
            }
            VarTag::FBeta { r, t, j, p } => {
                if let Some(riders) = flow()? {
                    fa.exit.push(ExitFlow {
                        route: r as usize,
                        period: t as usize,
                        j: j as usize,
                        p: p as usize,
                        riders,
                    });
                }
            }
            VarTag::FChi { r, t, d, i, j, p, c } => {
                if let Some(riders) = flow()? {
                    fa.transfer.push(TransferFlow {
                        route: r as usize,
                        period: t as usize,
                        d: d as usize,
                        i: i as usize,
                        j: j as usize,
                        p: p as usize,
                        c: c as usize,
                        riders,
                    });
                }
            }
            VarTag::XEta { .. } | VarTag::Z { .. } => {}
        }
    }
    fa.record_choices();

    let mut plan = ServicePlan::default();
    for (r, route) in s.routes.iter().enumerate() {
        for t in 0..s.periods.len() {
            let menu = route.menu(t);
            let mut indices = Vec::with_capacity(route.n_patterns);
            for p in 0..route.n_patterns {
                let invalid = |message: String| DecodeError::InvalidLoop {
                    route: r,
                    period: t,
                    pattern: p,
                    message,
                };
                let hs = headway.get(&(r, t, p)).cloned().unwrap_or_default();
                if hs.len() != 1 {
                    return Err(invalid(format!("{} headway choices are on", hs.len())));
                }
                let h = hs[0];
                indices.push(h);
                let pattern_arcs = arcs.get(&(r, t, p)).cloned().unwrap_or_default();
                if h == 0 {
                    if !pattern_arcs.is_empty() {
                        return Err(invalid("out-of-service pattern still has arcs".into()));
                    }
                    plan.patterns.push(PatternPlan::off(r, t, p));
                    continue;
                }
                let stops = trace_loop(&pattern_arcs).map_err(invalid)?;
                plan.patterns.push(PatternPlan {
                    route: r,
                    period: t,
                    pattern: p,
                    stops,
                    headway: Some(menu[h - 1]),
                });
            }
            // earlier patterns take the smaller menu index, out of service last
            let key = |h: usize| if h == 0 { usize::MAX } else { h };
            if indices.windows(2).any(|w| key(w[0]) > key(w[1])) {
                return Err(DecodeError::Invariant(format!(
                    "pattern ordering on route {r}, period {t}: indices {indices:?}"
                )));
            }
            let allotted = fleet.get(&(r, t)).copied().unwrap_or(0.0);
            let needed: f64 = plan
                .patterns
                .iter()
                .filter(|pp| pp.route == r && pp.period == t)
                .filter_map(|pp| pp.headway.map(|h| cycle_time(route, &pp.stops) / h))
                .sum();
            if needed > allotted + CAP_TOLERANCE {
                return Err(DecodeError::Invariant(format!(
                    "fleet on route {r}, period {t}: {allotted} vehicles for a requirement of {needed}"
                )));
            }
            // `n` carries no cost, so the solver may leave slack above the
            // requirement; report what the plan actually needs.
            let vehicles = if s.options.integer_fleet {
                (needed - CAP_TOLERANCE).ceil().max(0.0)
            } else {
                needed
            };
            plan.fleet.push(FleetEntry {
                route: r,
                period: t,
                vehicles,
            });
        }
    }

    for t in 0..s.periods.len() {
        let in_use: f64 = plan.fleet.iter().filter(|f| f.period == t).map(|f| f.vehicles).sum();
        if in_use > s.fleet_cap + CAP_TOLERANCE {
            return Err(DecodeError::Invariant(format!(
                "fleet cap in period {t}: {in_use} > {}",
                s.fleet_cap
            )));
        }
    }
    let hours: f64 = plan
        .fleet
        .iter()
        .map(|f| f.vehicles * s.periods[f.period].duration_hours)
        .sum();
    if hours > s.vehicle_hours_cap + CAP_TOLERANCE {
        return Err(DecodeError::Invariant(format!(
            "vehicle-hour cap: {hours} > {}",
            s.vehicle_hours_cap
        )));
    }

    plan.check(s).map_err(|e| DecodeError::Invariant(e.to_string()))?;
    Ok((plan, fa))
}

/// Stops of a single closed loop, starting at the lowest index. Fails on
/// branching, subtours or loops that leave index order.
fn trace_loop(arcs: &[(DirStop, DirStop)]) -> Result<Vec<DirStop>, String> {
    if arcs.len() < 2 {
        return Err(format!("a loop needs at least two arcs, found {}", arcs.len()));
    }
    let mut next = BTreeMap::new();
    for &(i, j) in arcs {
        if next.insert(i, j).is_some() {
            return Err(format!("stop {i} has more than one outgoing arc"));
        }
    }
    let start = *next.keys().next().expect("nonempty");
    let mut stops = vec![start];
    let mut cur = next[&start];
    while cur != start {
        if stops.len() > arcs.len() {
            return Err("arcs do not close into a loop".into());
        }
        stops.push(cur);
        cur = *next
            .get(&cur)
            .ok_or_else(|| format!("stop {cur} is entered but never left"))?;
    }
    if stops.len() != arcs.len() {
        return Err(format!("{} arcs but the loop through {start} visits {} stops", arcs.len(), stops.len()));
    }
    if stops.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("loop {stops:?} does not follow stop order"));
    }
    Ok(stops)
}
