//! Scenario to MILP translation.
//!
//! Each (route, period) block is built independently and appended in route
//! then period order; the fleet pooling rows that tie blocks together come
//! last. Variable registration order inside a block is fixed (pattern arcs,
//! arc-headway pairs, headways, combination choices, then the five flow
//! families and the fleet), which makes the model and its export reproducible.

use crate::combinatorics::{enumerate_combinations, CombinationSet};
use crate::error::BuildError;
use crate::milp::model::{MilpModel, Provenance, RowSense, VarId, VarKind, VarTag};
use crate::network::{arc_travel_time, validate_scenario, RouteSpec, Scenario};

/// Big-M for rows labelled with destination `d`: total period demand into
/// `d`. No `d`-labelled flow on a single arc or boarding node exceeds it in
/// an optimal (cycle-free) assignment.
pub fn big_m_flow(s: &Scenario, r: usize, t: usize, d: usize) -> f64 {
    s.routes[r]
        .demand
        .iter()
        .filter(|e| e.t == t && e.d == d)
        .map(|e| e.riders)
        .sum()
}

/// Big-M for the frequency-share linking rows: largest menu headway times
/// the destination's demand bound.
pub fn big_m_share(s: &Scenario, r: usize, t: usize, d: usize) -> f64 {
    let max_headway = s.routes[r]
        .menu(t)
        .iter()
        .copied()
        .fold(0.0, f64::max);
    max_headway * big_m_flow(s, r, t, d)
}

pub fn build_model(s: &Scenario) -> Result<MilpModel, BuildError> {
    let violations = validate_scenario(s);
    if !violations.is_empty() {
        return Err(BuildError::InvalidScenario(violations));
    }
    let mut model = MilpModel::default();
    let mut fleet_vars = vec![vec![0; s.periods.len()]; s.routes.len()];
    for (r, route) in s.routes.iter().enumerate() {
        for t in 0..s.periods.len() {
            let combos = enumerate_combinations(route.n_patterns, route.menu(t))?;
            let block = Block::new(s, r, t, route, &combos)?;
            fleet_vars[r][t] = block.build(&mut model)?;
        }
    }
    for t in 0..s.periods.len() {
        let coefs = (0..s.routes.len()).map(|r| (fleet_vars[r][t], 1.0)).collect();
        model.add_row(Provenance::Eq26, format!("e26_t{t}"), coefs, RowSense::Le, s.fleet_cap);
    }
    let mut hours = Vec::new();
    for r in 0..s.routes.len() {
        for (t, period) in s.periods.iter().enumerate() {
            hours.push((fleet_vars[r][t], period.duration_hours));
        }
    }
    model.add_row(Provenance::Eq27, "e27".into(), hours, RowSense::Le, s.vehicle_hours_cap);
    Ok(model)
}

/// Dense index tables for one (route, period) block.
struct Block<'a> {
    s: &'a Scenario,
    r: usize,
    t: usize,
    route: &'a RouteSpec,
    combos: &'a CombinationSet,
    /// direction-stops
    nd: usize,
    /// physical stops
    n: usize,
    np: usize,
    /// menu length
    k: usize,
    nc: usize,
    arc_time: Vec<f64>,
    x: Vec<Option<VarId>>,
    x_eta: Vec<Option<VarId>>,
    y: Vec<VarId>,
    z: Vec<Option<VarId>>,
    f_omega: Vec<Option<VarId>>,
    f_alpha: Vec<Option<VarId>>,
    f_lambda: Vec<Option<VarId>>,
    f_beta: Vec<VarId>,
    f_chi: Vec<Option<VarId>>,
}

impl<'a> Block<'a> {
    fn new(
        s: &'a Scenario,
        r: usize,
        t: usize,
        route: &'a RouteSpec,
        combos: &'a CombinationSet,
    ) -> Result<Self, BuildError> {
        let nd = route.n_dir();
        let mut arc_time = vec![0.0; nd * nd];
        for i in 0..nd {
            for j in 0..nd {
                if i != j {
                    arc_time[i * nd + j] = arc_travel_time(route, i, j).map_err(|e| BuildError::Structural {
                        route: r,
                        message: e.to_string(),
                    })?;
                }
            }
        }
        Ok(Self {
            s,
            r,
            t,
            route,
            combos,
            nd,
            n: route.n_physical(),
            np: route.n_patterns,
            k: route.menu(t).len(),
            nc: combos.len(),
            arc_time,
            x: Vec::new(),
            x_eta: Vec::new(),
            y: Vec::new(),
            z: Vec::new(),
            f_omega: Vec::new(),
            f_alpha: Vec::new(),
            f_lambda: Vec::new(),
            f_beta: Vec::new(),
            f_chi: Vec::new(),
        })
    }

    fn ix_arc(&self, p: usize, i: usize, j: usize) -> usize {
        (p * self.nd + i) * self.nd + j
    }
    fn ix_eta(&self, p: usize, i: usize, j: usize, h: usize) -> usize {
        self.ix_arc(p, i, j) * self.k + (h - 1)
    }
    fn ix_node(&self, d: usize, i: usize, c: usize) -> usize {
        (d * self.nd + i) * self.nc + c
    }
    fn ix_alpha(&self, d: usize, i: usize, c: usize, p: usize) -> usize {
        self.ix_node(d, i, c) * self.np + p
    }
    fn ix_lambda(&self, d: usize, p: usize, i: usize, j: usize) -> usize {
        ((d * self.np + p) * self.nd + i) * self.nd + j
    }
    /// `side` 0 joins at the alighting stop, 1 at its mirror.
    fn ix_chi(&self, d: usize, i: usize, side: usize, p: usize, c: usize) -> usize {
        (((d * self.nd + i) * 2 + side) * self.np + p) * self.nc + c
    }

    fn is_dest_stop(&self, i: usize, d: usize) -> bool {
        self.route.physical(i) == d
    }

    fn time(&self, i: usize, j: usize) -> f64 {
        self.arc_time[i * self.nd + j]
    }

    fn tag_base(&self) -> (u32, u32) {
        (self.r as u32, self.t as u32)
    }

    fn build(mut self, m: &mut MilpModel) -> Result<VarId, BuildError> {
        self.add_variables(m)?;
        let fleet = m.add_var(
            VarTag::NFleet {
                r: self.r as u32,
                t: self.t as u32,
            },
            if self.s.options.integer_fleet {
                VarKind::Integer
            } else {
                VarKind::Continuous
            },
            0.0,
            f64::INFINITY,
            0.0,
        );
        self.pattern_rows(m);
        self.headway_rows(m);
        self.fleet_row(m, fleet);
        self.combination_rows(m);
        self.flow_rows(m);
        Ok(fleet)
    }

    fn add_variables(&mut self, m: &mut MilpModel) -> Result<(), BuildError> {
        let (r, t) = self.tag_base();
        let (nd, np, k, nc, n) = (self.nd, self.np, self.k, self.nc, self.n);
        let s = self.s;
        let full_loop: Vec<(usize, usize)> = (0..nd).map(|i| (i, (i + 1) % nd)).collect();
        if s.options.require_full_pattern {
            if let Some(&(i, j)) = full_loop.iter().find(|&&(i, j)| !self.route.is_arc_allowed(i, j)) {
                return Err(BuildError::Structural {
                    route: self.r,
                    message: format!("full pattern needs arc {i} -> {j}, which is not allowed"),
                });
            }
        }

        self.x = vec![None; np * nd * nd];
        for p in 0..np {
            for i in 0..nd {
                for j in 0..nd {
                    if !self.route.is_arc_allowed(i, j) {
                        continue;
                    }
                    let (lo, hi) = if p == 0 && s.options.require_full_pattern {
                        let on = full_loop.contains(&(i, j));
                        (on as u8 as f64, on as u8 as f64)
                    } else {
                        (0.0, 1.0)
                    };
                    let tag = VarTag::X { r, t, p: p as u32, i: i as u32, j: j as u32 };
                    let ix = self.ix_arc(p, i, j);
                    self.x[ix] = Some(m.add_var(tag, VarKind::Binary, lo, hi, 0.0));
                }
            }
        }

        self.x_eta = vec![None; np * nd * nd * k];
        for p in 0..np {
            for i in 0..nd {
                for j in 0..nd {
                    if self.x[self.ix_arc(p, i, j)].is_none() {
                        continue;
                    }
                    for h in 1..=k {
                        let tag = VarTag::XEta { r, t, p: p as u32, i: i as u32, j: j as u32, h: h as u32 };
                        let ix = self.ix_eta(p, i, j, h);
                        self.x_eta[ix] = Some(m.add_var(tag, VarKind::Binary, 0.0, 1.0, 0.0));
                    }
                }
            }
        }

        self.y = Vec::with_capacity(np * (k + 1));
        for p in 0..np {
            for h in 0..=k {
                let tag = VarTag::Y { r, t, p: p as u32, h: h as u32 };
                self.y.push(m.add_var(tag, VarKind::Binary, 0.0, 1.0, 0.0));
            }
        }

        self.z = vec![None; n * nd * nc];
        for d in 0..n {
            for i in 0..nd {
                if self.is_dest_stop(i, d) {
                    continue;
                }
                for c in 0..nc {
                    let tag = VarTag::Z { r, t, i: i as u32, d: d as u32, c: c as u32 };
                    let ix = self.ix_node(d, i, c);
                    self.z[ix] = Some(m.add_var(tag, VarKind::Binary, 0.0, 1.0, 0.0));
                }
            }
        }

        let wait_weight = s.gamma_wait;
        self.f_omega = vec![None; n * nd * nc];
        for d in 0..n {
            for i in 0..nd {
                if self.is_dest_stop(i, d) {
                    continue;
                }
                for c in 0..nc {
                    let cost = wait_weight * self.combos.get(c).perceived_headway / 2.0;
                    let tag = VarTag::FOmega { r, t, d: d as u32, i: i as u32, c: c as u32 };
                    let ix = self.ix_node(d, i, c);
                    self.f_omega[ix] = Some(m.add_var(tag, VarKind::Continuous, 0.0, f64::INFINITY, cost));
                }
            }
        }

        self.f_alpha = vec![None; n * nd * nc * np];
        for d in 0..n {
            for i in 0..nd {
                if self.is_dest_stop(i, d) {
                    continue;
                }
                for c in 0..nc {
                    for p in self.combos.get(c).active_patterns() {
                        let tag = VarTag::FAlpha { r, t, d: d as u32, i: i as u32, c: c as u32, p: p as u32 };
                        let ix = self.ix_alpha(d, i, c, p);
                        self.f_alpha[ix] = Some(m.add_var(tag, VarKind::Continuous, 0.0, f64::INFINITY, 0.0));
                    }
                }
            }
        }

        self.f_lambda = vec![None; n * np * nd * nd];
        for d in 0..n {
            for p in 0..np {
                for i in 0..nd {
                    if self.is_dest_stop(i, d) {
                        continue;
                    }
                    for j in (i + 1)..nd {
                        if self.x[self.ix_arc(p, i, j)].is_none() {
                            continue;
                        }
                        let tag = VarTag::FLambda { r, t, d: d as u32, p: p as u32, i: i as u32, j: j as u32 };
                        let ix = self.ix_lambda(d, p, i, j);
                        let cost = self.time(i, j);
                        self.f_lambda[ix] = Some(m.add_var(tag, VarKind::Continuous, 0.0, f64::INFINITY, cost));
                    }
                }
            }
        }

        self.f_beta = Vec::with_capacity(nd * np);
        for j in 0..nd {
            for p in 0..np {
                let tag = VarTag::FBeta { r, t, j: j as u32, p: p as u32 };
                self.f_beta.push(m.add_var(tag, VarKind::Continuous, 0.0, f64::INFINITY, 0.0));
            }
        }

        self.f_chi = vec![None; n * nd * 2 * np * nc];
        if s.options.allow_transfers {
            for d in 0..n {
                for i in 0..nd {
                    if self.is_dest_stop(i, d) {
                        continue;
                    }
                    for side in 0..2 {
                        let j = if side == 0 { i } else { self.route.mirror(i) };
                        for p in 0..np {
                            for c in 0..nc {
                                let perceived = self.combos.get(c).perceived_headway;
                                let cost = s.gamma_transfer * (perceived / 2.0 + s.transfer_time);
                                let tag = VarTag::FChi {
                                    r,
                                    t,
                                    d: d as u32,
                                    i: i as u32,
                                    j: j as u32,
                                    p: p as u32,
                                    c: c as u32,
                                };
                                let ix = self.ix_chi(d, i, side, p, c);
                                self.f_chi[ix] = Some(m.add_var(tag, VarKind::Continuous, 0.0, f64::INFINITY, cost));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn name(&self, prov: Provenance, rest: std::fmt::Arguments<'_>) -> String {
        format!("{}_r{}_t{}_{}", prov.label(), self.r, self.t, rest)
    }

    fn pattern_rows(&self, m: &mut MilpModel) {
        let nd = self.nd;
        for p in 0..self.np {
            for j in 0..nd {
                let incoming: Vec<_> = (0..nd)
                    .filter_map(|i| self.x[self.ix_arc(p, i, j)])
                    .map(|v| (v, 1.0))
                    .collect();
                let mut balance = incoming.clone();
                balance.extend(
                    (0..nd)
                        .filter_map(|k| self.x[self.ix_arc(p, j, k)])
                        .map(|v| (v, -1.0)),
                );
                m.add_row(
                    Provenance::Eq15,
                    self.name(Provenance::Eq15, format_args!("p{p}_j{j}")),
                    balance,
                    RowSense::Eq,
                    0.0,
                );
                m.add_row(
                    Provenance::Eq16,
                    self.name(Provenance::Eq16, format_args!("p{p}_j{j}")),
                    incoming,
                    RowSense::Le,
                    1.0,
                );
            }
            // A loop whose stops are visited in index order has exactly one
            // backward (closing) arc; allowing at most one rules out subtours.
            let backward: Vec<_> = (0..nd)
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .filter_map(|(i, j)| self.x[self.ix_arc(p, i, j)])
                .map(|v| (v, 1.0))
                .collect();
            m.add_row(
                Provenance::SingleLoop,
                self.name(Provenance::SingleLoop, format_args!("p{p}")),
                backward,
                RowSense::Le,
                1.0,
            );

            if self.s.options.enforce_symmetry {
                for i in 0..nd {
                    for j in 0..nd {
                        if i == j {
                            continue;
                        }
                        let (mi, mj) = (self.route.mirror(j), self.route.mirror(i));
                        if (i, j) >= (mi, mj) {
                            continue;
                        }
                        let a = self.x[self.ix_arc(p, i, j)];
                        let b = self.x[self.ix_arc(p, mi, mj)];
                        let coefs = match (a, b) {
                            (Some(a), Some(b)) => vec![(a, 1.0), (b, -1.0)],
                            (Some(v), None) | (None, Some(v)) => vec![(v, 1.0)],
                            (None, None) => continue,
                        };
                        m.add_row(
                            Provenance::Eq18,
                            self.name(Provenance::Eq18, format_args!("p{p}_i{i}_j{j}")),
                            coefs,
                            RowSense::Eq,
                            0.0,
                        );
                    }
                }
            }
        }
    }

    fn headway_rows(&self, m: &mut MilpModel) {
        let (nd, k) = (self.nd, self.k);
        let y = |p: usize, h: usize| self.y[p * (k + 1) + h];
        for p in 0..self.np {
            m.add_row(
                Provenance::Eq19,
                self.name(Provenance::Eq19, format_args!("p{p}")),
                (0..=k).map(|h| (y(p, h), 1.0)).collect(),
                RowSense::Eq,
                1.0,
            );
        }
        // Out-of-service (index 0) sorts after every menu entry, so the
        // cumulative sums run up to the last menu index.
        for p1 in 0..self.np {
            for p2 in (p1 + 1)..self.np {
                for h in 2..=(k + 1) {
                    let mut coefs: Vec<_> = (1..h).map(|hh| (y(p1, hh), 1.0)).collect();
                    coefs.extend((1..h).map(|hh| (y(p2, hh), -1.0)));
                    m.add_row(
                        Provenance::Eq20,
                        self.name(Provenance::Eq20, format_args!("p{p1}_q{p2}_h{h}")),
                        coefs,
                        RowSense::Ge,
                        0.0,
                    );
                }
            }
        }
        for p in 0..self.np {
            for i in 0..nd {
                for j in 0..nd {
                    let Some(x) = self.x[self.ix_arc(p, i, j)] else { continue };
                    let mut align = vec![(x, -1.0)];
                    for h in 1..=k {
                        let eta = self.x_eta[self.ix_eta(p, i, j, h)].expect("eta exists for every arc");
                        m.add_row(
                            Provenance::Eq21,
                            self.name(Provenance::Eq21, format_args!("p{p}_i{i}_j{j}_h{h}")),
                            vec![(eta, 1.0), (y(p, h), -1.0)],
                            RowSense::Le,
                            0.0,
                        );
                        align.push((eta, 1.0));
                    }
                    m.add_row(
                        Provenance::Eq22,
                        self.name(Provenance::Eq22, format_args!("p{p}_i{i}_j{j}")),
                        align,
                        RowSense::Eq,
                        0.0,
                    );
                }
            }
            // A pattern in service runs a loop of at least two arcs; a
            // mirror-closed loop needs four to reach a second physical stop.
            let min_arcs = if self.s.options.enforce_symmetry { 4.0 } else { 2.0 };
            let mut link: Vec<_> = (0..nd)
                .flat_map(|i| (0..nd).map(move |j| (i, j)))
                .filter_map(|(i, j)| self.x[self.ix_arc(p, i, j)])
                .map(|v| (v, 1.0))
                .collect();
            link.extend((1..=k).map(|h| (y(p, h), -min_arcs)));
            m.add_row(
                Provenance::ServiceLink,
                self.name(Provenance::ServiceLink, format_args!("p{p}")),
                link,
                RowSense::Ge,
                0.0,
            );
        }
        if self.s.options.enforce_capacity {
            let menu = self.route.menu(self.t);
            let per_period = self.route.capacity * self.s.periods[self.t].duration_minutes();
            for p in 0..self.np {
                for i in 0..nd {
                    for j in (i + 1)..nd {
                        if self.x[self.ix_arc(p, i, j)].is_none() {
                            continue;
                        }
                        let mut coefs: Vec<_> = (0..self.n)
                            .filter_map(|d| self.f_lambda[self.ix_lambda(d, p, i, j)])
                            .map(|v| (v, 1.0))
                            .collect();
                        for h in 1..=k {
                            let eta = self.x_eta[self.ix_eta(p, i, j, h)].expect("eta exists");
                            coefs.push((eta, -per_period / menu[h - 1]));
                        }
                        m.add_row(
                            Provenance::Eq23,
                            self.name(Provenance::Eq23, format_args!("p{p}_i{i}_j{j}")),
                            coefs,
                            RowSense::Le,
                            0.0,
                        );
                    }
                }
            }
        }
    }

    fn fleet_row(&self, m: &mut MilpModel, fleet: VarId) {
        let menu = self.route.menu(self.t);
        let mut coefs = Vec::new();
        for p in 0..self.np {
            for i in 0..self.nd {
                for j in 0..self.nd {
                    if self.x[self.ix_arc(p, i, j)].is_none() {
                        continue;
                    }
                    for h in 1..=self.k {
                        let eta = self.x_eta[self.ix_eta(p, i, j, h)].expect("eta exists");
                        coefs.push((eta, self.time(i, j) / menu[h - 1]));
                    }
                }
            }
        }
        coefs.push((fleet, -1.0));
        m.add_row(
            Provenance::Eq24,
            format!("e24_r{}_t{}", self.r, self.t),
            coefs,
            RowSense::Le,
            0.0,
        );
    }

    fn combination_rows(&self, m: &mut MilpModel) {
        let (nd, nc, k) = (self.nd, self.nc, self.k);
        for d in 0..self.n {
            let big_m = big_m_flow(self.s, self.r, self.t, d);
            let big_m_share = big_m_share(self.s, self.r, self.t, d);
            for i in 0..nd {
                if self.is_dest_stop(i, d) {
                    continue;
                }
                let zs: Vec<_> = (0..nc)
                    .map(|c| self.z[self.ix_node(d, i, c)].expect("z exists off the destination"))
                    .collect();
                m.add_row(
                    Provenance::Eq28,
                    self.name(Provenance::Eq28, format_args!("i{i}_d{d}")),
                    zs.iter().map(|&v| (v, 1.0)).collect(),
                    RowSense::Le,
                    1.0,
                );
                for c in 0..nc {
                    let combo = self.combos.get(c);
                    for p in combo.active_patterns() {
                        let h = combo.headway_indices[p];
                        m.add_row(
                            Provenance::Eq29,
                            self.name(Provenance::Eq29, format_args!("i{i}_d{d}_c{c}_p{p}")),
                            vec![(zs[c], 1.0), (self.y[p * (k + 1) + h], -1.0)],
                            RowSense::Le,
                            0.0,
                        );
                    }
                    for p in combo.active_patterns() {
                        let fa = self.f_alpha[self.ix_alpha(d, i, c, p)].expect("alpha for active pattern");
                        m.add_row(
                            Provenance::Eq30,
                            self.name(Provenance::Eq30, format_args!("d{d}_i{i}_c{c}_p{p}")),
                            vec![(fa, 1.0), (zs[c], -big_m)],
                            RowSense::Le,
                            0.0,
                        );
                    }
                    if combo.n_active() < 2 {
                        continue;
                    }
                    let menu = self.route.menu(self.t);
                    let active: Vec<_> = combo.active_patterns().collect();
                    for (a, &p1) in active.iter().enumerate() {
                        for &p2 in &active[a + 1..] {
                            let h1 = menu[combo.headway_indices[p1] - 1];
                            let h2 = menu[combo.headway_indices[p2] - 1];
                            let f1 = self.f_alpha[self.ix_alpha(d, i, c, p1)].expect("alpha");
                            let f2 = self.f_alpha[self.ix_alpha(d, i, c, p2)].expect("alpha");
                            m.add_row(
                                Provenance::Eq31,
                                self.name(Provenance::Eq31, format_args!("u_d{d}_i{i}_c{c}_p{p1}_q{p2}")),
                                vec![(f1, h1), (f2, -h2), (zs[c], big_m_share)],
                                RowSense::Le,
                                big_m_share,
                            );
                            m.add_row(
                                Provenance::Eq31,
                                self.name(Provenance::Eq31, format_args!("l_d{d}_i{i}_c{c}_p{p1}_q{p2}")),
                                vec![(f1, h1), (f2, -h2), (zs[c], -big_m_share)],
                                RowSense::Ge,
                                -big_m_share,
                            );
                        }
                    }
                }
            }
        }
    }

    fn flow_rows(&self, m: &mut MilpModel) {
        let (nd, np, nc, n) = (self.nd, self.np, self.nc, self.n);
        let demand = self.s.demand_table(self.r, self.t);

        for d in 0..n {
            let big_m = big_m_flow(self.s, self.r, self.t, d);
            // Arc usage requires the arc in the pattern.
            for p in 0..np {
                for i in 0..nd {
                    for j in (i + 1)..nd {
                        let Some(fl) = self.f_lambda[self.ix_lambda(d, p, i, j)] else { continue };
                        let x = self.x[self.ix_arc(p, i, j)].expect("lambda only on existing arcs");
                        m.add_row(
                            Provenance::Eq17,
                            self.name(Provenance::Eq17, format_args!("d{d}_p{p}_i{i}_j{j}")),
                            vec![(fl, 1.0), (x, -big_m)],
                            RowSense::Le,
                            0.0,
                        );
                    }
                }
            }

            for o in 0..n {
                if o == d {
                    continue;
                }
                let mut coefs = Vec::with_capacity(2 * nc);
                for i in self.route.dir_stops_of(o) {
                    for c in 0..nc {
                        coefs.push((self.f_omega[self.ix_node(d, i, c)].expect("entry var"), 1.0));
                    }
                }
                m.add_row(
                    Provenance::Eq32,
                    self.name(Provenance::Eq32, format_args!("o{o}_d{d}")),
                    coefs,
                    RowSense::Eq,
                    demand[o][d],
                );
            }

            let into_d: f64 = (0..n).map(|o| demand[o][d]).sum();
            let mut exit = Vec::with_capacity(2 * np);
            for j in self.route.dir_stops_of(d) {
                for p in 0..np {
                    exit.push((self.f_beta[j * np + p], 1.0));
                }
            }
            m.add_row(
                Provenance::Eq33,
                self.name(Provenance::Eq33, format_args!("d{d}")),
                exit,
                RowSense::Eq,
                into_d,
            );

            for i in 0..nd {
                if self.is_dest_stop(i, d) {
                    continue;
                }
                let mi = self.route.mirror(i);
                for c in 0..nc {
                    let mut coefs = vec![(self.f_omega[self.ix_node(d, i, c)].expect("entry"), 1.0)];
                    for p in 0..np {
                        // alight at i and re-board at i, or alight at the mirror stop and cross over
                        if let Some(v) = self.f_chi[self.ix_chi(d, i, 0, p, c)] {
                            coefs.push((v, 1.0));
                        }
                        if let Some(v) = self.f_chi[self.ix_chi(d, mi, 1, p, c)] {
                            coefs.push((v, 1.0));
                        }
                    }
                    for p in self.combos.get(c).active_patterns() {
                        coefs.push((self.f_alpha[self.ix_alpha(d, i, c, p)].expect("alpha"), -1.0));
                    }
                    m.add_row(
                        Provenance::Eq34,
                        self.name(Provenance::Eq34, format_args!("d{d}_i{i}_c{c}")),
                        coefs,
                        RowSense::Eq,
                        0.0,
                    );
                }
            }

            for p in 0..np {
                for j in 0..nd {
                    if self.is_dest_stop(j, d) {
                        continue;
                    }
                    let mut coefs = Vec::new();
                    for c in 0..nc {
                        if let Some(v) = self.f_alpha[self.ix_alpha(d, j, c, p)] {
                            coefs.push((v, 1.0));
                        }
                    }
                    for i in 0..j {
                        if let Some(v) = self.f_lambda[self.ix_lambda(d, p, i, j)] {
                            coefs.push((v, 1.0));
                        }
                    }
                    for k in (j + 1)..nd {
                        if let Some(v) = self.f_lambda[self.ix_lambda(d, p, j, k)] {
                            coefs.push((v, -1.0));
                        }
                    }
                    for c in 0..nc {
                        for side in 0..2 {
                            if let Some(v) = self.f_chi[self.ix_chi(d, j, side, p, c)] {
                                coefs.push((v, -1.0));
                            }
                        }
                    }
                    m.add_row(
                        Provenance::Eq35,
                        self.name(Provenance::Eq35, format_args!("d{d}_j{j}_p{p}")),
                        coefs,
                        RowSense::Eq,
                        0.0,
                    );
                }
                for j in self.route.dir_stops_of(d) {
                    let mut coefs: Vec<_> = (0..j)
                        .filter_map(|i| self.f_lambda[self.ix_lambda(d, p, i, j)])
                        .map(|v| (v, 1.0))
                        .collect();
                    coefs.push((self.f_beta[j * np + p], -1.0));
                    m.add_row(
                        Provenance::Eq36,
                        self.name(Provenance::Eq36, format_args!("d{d}_j{j}_p{p}")),
                        coefs,
                        RowSense::Eq,
                        0.0,
                    );
                }
            }
        }
    }
}
