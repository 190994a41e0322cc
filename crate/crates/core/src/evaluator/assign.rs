use std::collections::{BTreeSet, VecDeque};
use std::ops::RangeBounds;

use highs::{HighsModelStatus, RowProblem, Sense};

use crate::combinatorics::{enumerate_combinations, frequency_shares};
use crate::error::{EvalError, SolverError};
use crate::evaluator::flows::{BoardingFlow, EntryFlow, ExitFlow, FlowAssignment, RideFlow, TransferFlow};
use crate::network::{arc_travel_time, DirStop, RouteSpec, Scenario};
use crate::plan::ServicePlan;

/// Cheapest passenger flows for a fixed plan.
///
/// Each (route, period) is an independent problem. Riders bound for `d`
/// reach a stop either by entering or by transferring, pick one of the
/// combinations available there (every nonempty set of the plan's in-service
/// patterns), split across its patterns by frequency share, ride forward and
/// alight at `d` or transfer. Only the combination choice is discrete, and it
/// is only modelled where more than one combination exists.
pub fn assign_flows(s: &Scenario, plan: &ServicePlan) -> Result<FlowAssignment, EvalError> {
    plan.check(s)?;
    let mut fa = FlowAssignment::default();
    for (r, route) in s.routes.iter().enumerate() {
        for t in 0..s.periods.len() {
            let problem = Restricted::new(s, plan, r, t, route)?;
            problem.check_reachable()?;
            problem.solve(&mut fa)?;
        }
    }
    fa.record_choices();
    Ok(fa)
}

struct PatternView {
    p: usize,
    served: Vec<bool>,
    /// forward arcs of the loop (`i < j`)
    rides: Vec<(DirStop, DirStop)>,
}

struct Restricted<'a> {
    s: &'a Scenario,
    r: usize,
    t: usize,
    route: &'a RouteSpec,
    patterns: Vec<PatternView>,
    headways: Vec<f64>,
    /// (combination index, share per pattern, perceived headway)
    combos: Vec<(usize, Vec<f64>, f64)>,
    demand: Vec<Vec<f64>>,
}

impl<'a> Restricted<'a> {
    fn new(s: &'a Scenario, plan: &ServicePlan, r: usize, t: usize, route: &'a RouteSpec) -> Result<Self, EvalError> {
        let nd = route.n_dir();
        let menu = route.menu(t);
        let indices = plan.headway_indices(s, r, t)?;
        let mut patterns = Vec::new();
        let mut headways = vec![0.0; route.n_patterns];
        for (p, &h) in indices.iter().enumerate() {
            if h == 0 {
                continue;
            }
            headways[p] = menu[h - 1];
            let pp = plan.pattern(r, t, p).expect("checked plan");
            let mut served = vec![false; nd];
            for &i in &pp.stops {
                served[i] = true;
            }
            let rides = pp.arcs().into_iter().filter(|&(i, j)| i < j).collect();
            patterns.push(PatternView { p, served, rides });
        }
        let all = enumerate_combinations(route.n_patterns, menu).map_err(|e| {
            EvalError::Solver(SolverError::Config(e.to_string()))
        })?;
        let combos = all
            .iter()
            .enumerate()
            .filter(|(_, c)| c.active_patterns().all(|p| c.headway_indices[p] == indices[p]))
            .map(|(k, c)| {
                let shares = frequency_shares(&c.headway_indices, menu).expect("nonempty combination");
                (k, shares, c.perceived_headway)
            })
            .collect();
        Ok(Self {
            s,
            r,
            t,
            route,
            patterns,
            headways,
            combos,
            demand: s.demand_table(r, t),
        })
    }

    /// Breadth-first search over direction-stops: ride any in-service
    /// pattern forward, cross to the mirror stop where transfers are allowed.
    fn check_reachable(&self) -> Result<(), EvalError> {
        let n = self.route.n_physical();
        let nd = self.route.n_dir();
        for o in 0..n {
            for d in 0..n {
                if o == d || self.demand[o][d] <= 0.0 {
                    continue;
                }
                let mut seen = vec![false; nd];
                let mut queue = VecDeque::new();
                for i in self.route.dir_stops_of(o) {
                    seen[i] = true;
                    queue.push_back((i, true));
                }
                let mut reached = false;
                while let Some((i, fresh)) = queue.pop_front() {
                    if self.route.physical(i) == d {
                        reached = true;
                        break;
                    }
                    // changing vehicles away from the origin is a transfer
                    if !fresh && !self.s.options.allow_transfers {
                        continue;
                    }
                    let mut push = |j: DirStop, queue: &mut VecDeque<_>| {
                        if !seen[j] {
                            seen[j] = true;
                            queue.push_back((j, false));
                        }
                    };
                    if !fresh {
                        push(self.route.mirror(i), &mut queue);
                    }
                    for pv in &self.patterns {
                        if !pv.served[i] {
                            continue;
                        }
                        for &(a, b) in &pv.rides {
                            if a >= i && self.rides_through(pv, i, a) {
                                push(b, &mut queue);
                            }
                        }
                    }
                }
                if !reached {
                    return Err(EvalError::Unreachable {
                        route: self.r,
                        period: self.t,
                        origin: self.route.stops[o].clone(),
                        destination: self.route.stops[d].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Forward arcs chain from `i` to `a` on this pattern.
    fn rides_through(&self, pv: &PatternView, i: DirStop, a: DirStop) -> bool {
        let mut cur = i;
        while cur < a {
            match pv.rides.iter().find(|&&(x, _)| x == cur) {
                Some(&(_, y)) => cur = y,
                None => return false,
            }
        }
        cur == a
    }

    fn solve(&self, fa: &mut FlowAssignment) -> Result<(), EvalError> {
        let n = self.route.n_physical();
        let nd = self.route.n_dir();
        let (r, t) = (self.r, self.t);
        let demand_total: f64 = self.demand.iter().flatten().sum();
        if demand_total <= 0.0 || self.patterns.is_empty() {
            return Ok(());
        }
        let s = self.s;
        let capacity = self.s.options.enforce_capacity;
        let mut lp = Lp::default();

        struct DestVars {
            d: usize,
            entry: Vec<(DirStop, usize, Var)>,
            node: Vec<(DirStop, usize, Var)>,
            rides: Vec<(usize, DirStop, DirStop, Var)>,
            transfers: Vec<(DirStop, DirStop, usize, usize, Var)>,
        }
        let mut dests = Vec::new();
        // rides per (pattern position, arc position) for capacity rows
        let mut arc_load: Vec<Vec<Vec<Var>>> =
            self.patterns.iter().map(|pv| vec![Vec::new(); pv.rides.len()]).collect();

        for d in 0..n {
            let into_d: f64 = (0..n).map(|o| self.demand[o][d]).sum();
            if into_d <= 0.0 {
                continue;
            }
            let is_dest = |i: DirStop| self.route.physical(i) == d;
            let mut dv = DestVars {
                d,
                entry: Vec::new(),
                node: Vec::new(),
                rides: Vec::new(),
                transfers: Vec::new(),
            };
            for i in (0..nd).filter(|&i| !is_dest(i)) {
                for (k, (_, _, perceived)) in self.combos.iter().enumerate() {
                    let wait = s.gamma_wait * perceived / 2.0;
                    dv.entry.push((i, k, lp.var(wait)));
                    dv.node.push((i, k, lp.var(0.0)));
                }
            }
            for (q, pv) in self.patterns.iter().enumerate() {
                for (a, &(i, j)) in pv.rides.iter().enumerate() {
                    if is_dest(i) {
                        continue;
                    }
                    let time = arc_travel_time(self.route, i, j).expect("valid plan arcs");
                    let col = lp.var(time);
                    dv.rides.push((q, i, j, col));
                    arc_load[q][a].push(col);
                }
            }
            if s.options.allow_transfers {
                for i in (0..nd).filter(|&i| !is_dest(i)) {
                    for j in [i, self.route.mirror(i)] {
                        for q in 0..self.patterns.len() {
                            for (k, (_, _, perceived)) in self.combos.iter().enumerate() {
                                let cost = s.gamma_transfer * (perceived / 2.0 + s.transfer_time);
                                dv.transfers.push((i, j, q, k, lp.var(cost)));
                            }
                        }
                    }
                }
            }

            // demand per origin
            for o in (0..n).filter(|&o| o != d) {
                let stops = self.route.dir_stops_of(o);
                let row: Vec<_> = dv
                    .entry
                    .iter()
                    .filter(|e| stops.contains(&e.0))
                    .map(|e| (e.2, 1.0))
                    .collect();
                lp.row(self.demand[o][d]..=self.demand[o][d], row);
            }
            // arrivals at the destination
            let arrive: Vec<_> = dv.rides.iter().filter(|x| is_dest(x.2)).map(|x| (x.3, 1.0)).collect();
            lp.row(into_d..=into_d, arrive);
            // combination nodes
            for (&(i, k, node), &(_, _, entry)) in dv.node.iter().zip(&dv.entry) {
                let mut row = vec![(entry, 1.0), (node, -1.0)];
                row.extend(dv.transfers.iter().filter(|x| x.1 == i && x.3 == k).map(|x| (x.4, 1.0)));
                lp.row(0.0..=0.0, row);
            }
            // pattern nodes away from the destination
            for (q, pv) in self.patterns.iter().enumerate() {
                for j in (0..nd).filter(|&j| !is_dest(j)) {
                    let mut row = Vec::new();
                    for &(i, k, node) in &dv.node {
                        if i == j {
                            let share = self.combos[k].1[pv.p];
                            if share > 0.0 {
                                row.push((node, share));
                            }
                        }
                    }
                    for x in &dv.rides {
                        if x.0 == q && x.2 == j {
                            row.push((x.3, 1.0));
                        }
                        if x.0 == q && x.1 == j {
                            row.push((x.3, -1.0));
                        }
                    }
                    row.extend(dv.transfers.iter().filter(|x| x.0 == j && x.2 == q).map(|x| (x.4, -1.0)));
                    if !row.is_empty() {
                        lp.row(0.0..=0.0, row);
                    }
                }
            }
            // one combination per stop
            if self.combos.len() > 1 {
                for i in (0..nd).filter(|&i| !is_dest(i)) {
                    let mut pick = Vec::new();
                    for &(_, _, node) in dv.node.iter().filter(|x| x.0 == i) {
                        let w = lp.binary();
                        lp.row(..=0.0, [(node, 1.0), (w, -into_d)]);
                        pick.push((w, 1.0));
                    }
                    lp.row(..=1.0, pick);
                }
            }
            dests.push(dv);
        }

        if capacity {
            let per_period = self.route.capacity * s.periods[t].duration_minutes();
            for (q, pv) in self.patterns.iter().enumerate() {
                let limit = per_period / self.headways[pv.p];
                for load in &arc_load[q] {
                    if !load.is_empty() {
                        lp.row(..=limit, load.iter().map(|&c| (c, 1.0)));
                    }
                }
            }
        }

        let mut model = lp.pb.optimise(Sense::Minimise);
        model.make_quiet();
        model.set_option("mip_rel_gap", 0.0);
        let solved = model
            .try_solve()
            .map_err(|status| EvalError::Solver(SolverError::Backend(format!("{status:?}"))))?;
        match solved.status() {
            HighsModelStatus::Optimal => {}
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                return Err(EvalError::Infeasible { route: r, period: t });
            }
            other => {
                return Err(EvalError::Solver(SolverError::Backend(format!("flow problem status {other:?}"))));
            }
        }
        let solution = solved.get_solution();
        let value = |v: Var| solution.columns()[v.ix].max(0.0);

        for dv in &dests {
            let d = dv.d;
            for &(i, k, col) in &dv.entry {
                let riders = value(col);
                if riders > 0.0 {
                    fa.entry.push(EntryFlow { route: r, period: t, d, i, c: self.combos[k].0, riders });
                }
            }
            for &(i, k, col) in &dv.node {
                let total = value(col);
                if total <= 0.0 {
                    continue;
                }
                for pv in &self.patterns {
                    let riders = self.combos[k].1[pv.p] * total;
                    if riders > 0.0 {
                        fa.boarding.push(BoardingFlow {
                            route: r,
                            period: t,
                            d,
                            i,
                            c: self.combos[k].0,
                            p: pv.p,
                            riders,
                        });
                    }
                }
            }
            for &(q, i, j, col) in &dv.rides {
                let riders = value(col);
                if riders > 0.0 {
                    let p = self.patterns[q].p;
                    fa.inter_stop.push(RideFlow { route: r, period: t, d, p, i, j, riders });
                }
            }
            for &(i, j, q, k, col) in &dv.transfers {
                let riders = value(col);
                if riders > 0.0 {
                    fa.transfer.push(TransferFlow {
                        route: r,
                        period: t,
                        d,
                        i,
                        j,
                        p: self.patterns[q].p,
                        c: self.combos[k].0,
                        riders,
                    });
                }
            }
        }
        // exits follow from rides into each destination stop
        let mut exits: BTreeSet<(DirStop, usize)> = BTreeSet::new();
        for l in fa.inter_stop.iter().filter(|l| l.route == r && l.period == t) {
            if self.route.physical(l.j) == l.d {
                exits.insert((l.j, l.p));
            }
        }
        for (j, p) in exits {
            let riders: f64 = fa
                .inter_stop
                .iter()
                .filter(|l| l.route == r && l.period == t && l.j == j && l.p == p && self.route.physical(j) == l.d)
                .map(|l| l.riders)
                .sum();
            fa.exit.push(ExitFlow { route: r, period: t, j, p, riders });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Var {
    col: highs::Col,
    ix: usize,
}

#[derive(Default)]
struct Lp {
    pb: RowProblem,
    n_cols: usize,
}

impl Lp {
    fn var(&mut self, cost: f64) -> Var {
        let col = self.pb.add_column(cost, 0.0..);
        self.n_cols += 1;
        Var { col, ix: self.n_cols - 1 }
    }

    fn binary(&mut self) -> Var {
        let col = self.pb.add_integer_column(0.0, 0.0..=1.0);
        self.n_cols += 1;
        Var { col, ix: self.n_cols - 1 }
    }

    fn row<B: RangeBounds<f64>>(&mut self, bounds: B, terms: impl IntoIterator<Item = (Var, f64)>) {
        self.pb.add_row(bounds, terms.into_iter().map(|(v, a)| (v.col, a)));
    }
}
