//! Problem instance: periods, routes, demand, fleet limits and option flags.
//!
//! Every route is a linear line of `n` physical stops operated as a closed
//! loop of `2n` direction-stops. Outbound stops keep their physical index
//! `0..n`; the inbound copy of physical stop `k` sits at `2n - 1 - k`, so the
//! inbound half is numbered in inbound travel order and increasing index
//! always means moving forward around the loop.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// Headways, run times and transfer times are all expressed in minutes.
pub type Minutes = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Outbound,
    Inbound,
}

/// Index of a direction-stop inside a route's loop.
pub type DirStop = usize;

/// Index of the mirrored direction-stop: `n_dir - i - 1`.
pub fn mirror_stop(i: DirStop, n_dir: usize) -> Result<DirStop, ScenarioError> {
    if i >= n_dir {
        return Err(ScenarioError::StopOutOfRange { stop: i, n_dir });
    }
    Ok(n_dir - i - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodSpec {
    pub id: usize,
    pub duration_hours: f64,
}

impl PeriodSpec {
    pub fn duration_minutes(&self) -> Minutes {
        self.duration_hours * 60.0
    }
}

/// Riders per period travelling from physical stop `o` to physical stop `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandEntry {
    pub t: usize,
    pub o: usize,
    pub d: usize,
    pub riders: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSpec {
    #[serde(default)]
    pub name: String,
    /// Physical stop names in outbound travel order.
    pub stops: Vec<String>,
    /// `[outbound, inbound]` run times between adjacent stops, each listed in
    /// that direction's travel order (`n - 1` entries per direction).
    pub link_run_times: [Vec<Minutes>; 2],
    #[serde(default)]
    pub dwell_saving: Minutes,
    #[serde(default)]
    pub turnback_time: Minutes,
    /// Square `2n x 2n` mask of arcs the infrastructure permits; absent means
    /// every arc between distinct direction-stops is allowed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_arcs: Option<Vec<Vec<bool>>>,
    pub capacity: f64,
    pub n_patterns: usize,
    /// One ascending headway menu per period.
    pub headway_menus: Vec<Vec<Minutes>>,
    pub demand: Vec<DemandEntry>,
}

impl RouteSpec {
    pub fn n_physical(&self) -> usize {
        self.stops.len()
    }

    pub fn n_dir(&self) -> usize {
        2 * self.stops.len()
    }

    pub fn mirror(&self, i: DirStop) -> DirStop {
        self.n_dir() - i - 1
    }

    pub fn physical(&self, i: DirStop) -> usize {
        let n = self.n_physical();
        if i < n {
            i
        } else {
            2 * n - 1 - i
        }
    }

    pub fn direction(&self, i: DirStop) -> Direction {
        if i < self.n_physical() {
            Direction::Outbound
        } else {
            Direction::Inbound
        }
    }

    pub fn dir_stop(&self, physical: usize, direction: Direction) -> DirStop {
        match direction {
            Direction::Outbound => physical,
            Direction::Inbound => 2 * self.n_physical() - 1 - physical,
        }
    }

    /// Both direction-stops of a physical stop, outbound first.
    pub fn dir_stops_of(&self, physical: usize) -> [DirStop; 2] {
        [physical, 2 * self.n_physical() - 1 - physical]
    }

    pub fn is_arc_allowed(&self, i: DirStop, j: DirStop) -> bool {
        if i == j || i >= self.n_dir() || j >= self.n_dir() {
            return false;
        }
        match &self.allowed_arcs {
            Some(mask) => mask
                .get(i)
                .and_then(|row| row.get(j))
                .copied()
                .unwrap_or(false),
            None => true,
        }
    }

    pub fn menu(&self, t: usize) -> &[Minutes] {
        &self.headway_menus[t]
    }

    /// Human-readable direction-stop label such as `Howard>` or `<Howard`.
    pub fn stop_label(&self, i: DirStop) -> String {
        let name = &self.stops[self.physical(i)];
        match self.direction(i) {
            Direction::Outbound => format!("{name}>"),
            Direction::Inbound => format!("<{name}"),
        }
    }

    fn outbound_run(&self, from: usize, to: usize) -> Minutes {
        self.link_run_times[0][from..to].iter().sum()
    }

    // Inbound travel goes from high to low physical index; link k joins
    // physical n-1-k and n-2-k.
    fn inbound_run(&self, from: usize, to: usize) -> Minutes {
        let n = self.n_physical();
        self.link_run_times[1][(n - 1 - from)..(n - 1 - to)]
            .iter()
            .sum()
    }
}

/// Travel time of a vehicle running from direction-stop `i` straight to `j`.
///
/// The vehicle follows the loop forward; where the arc changes direction it
/// reverses at the furthest physical stop the arc has to reach (the terminal
/// for a full run, an intermediate stop for a short-turn). Each reversal costs
/// `turnback_time` and every direction-stop passed without stopping saves
/// `dwell_saving`.
pub fn arc_travel_time(route: &RouteSpec, i: DirStop, j: DirStop) -> Result<Minutes, ScenarioError> {
    let n_dir = route.n_dir();
    if i >= n_dir {
        return Err(ScenarioError::StopOutOfRange { stop: i, n_dir });
    }
    if j >= n_dir {
        return Err(ScenarioError::StopOutOfRange { stop: j, n_dir });
    }
    if i == j {
        return Err(ScenarioError::SelfArc { stop: i });
    }
    let (a, b) = (route.physical(i), route.physical(j));
    let tb = route.turnback_time;
    let (run, reversals, passed) = match (route.direction(i), route.direction(j)) {
        (Direction::Outbound, Direction::Outbound) if b > a => (route.outbound_run(a, b), 0, b - a - 1),
        (Direction::Inbound, Direction::Inbound) if b < a => (route.inbound_run(a, b), 0, a - b - 1),
        (Direction::Outbound, Direction::Inbound) => {
            let turn = a.max(b);
            let run = route.outbound_run(a, turn) + route.inbound_run(turn, b);
            (run, 1, 2 * turn - a - b)
        }
        (Direction::Inbound, Direction::Outbound) => {
            let turn = a.min(b);
            let run = route.inbound_run(a, turn) + route.outbound_run(turn, b);
            (run, 1, a + b - 2 * turn)
        }
        // Backwards within one direction: reverse at `a`, run the other way
        // past `b`, reverse again.
        (Direction::Outbound, Direction::Outbound) => (route.inbound_run(a, b), 2, a - b + 1),
        (Direction::Inbound, Direction::Inbound) => (route.outbound_run(a, b), 2, b - a + 1),
    };
    Ok(run + reversals as f64 * tb - route.dwell_saving * passed as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptionFlags {
    pub allow_transfers: bool,
    pub enforce_symmetry: bool,
    pub enforce_capacity: bool,
    pub require_full_pattern: bool,
    pub integer_fleet: bool,
}

impl Default for OptionFlags {
    fn default() -> Self {
        Self {
            allow_transfers: true,
            enforce_symmetry: false,
            enforce_capacity: false,
            require_full_pattern: false,
            integer_fleet: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub periods: Vec<PeriodSpec>,
    pub routes: Vec<RouteSpec>,
    pub fleet_cap: f64,
    pub vehicle_hours_cap: f64,
    pub gamma_wait: f64,
    pub gamma_transfer: f64,
    pub transfer_time: Minutes,
    #[serde(default)]
    pub options: OptionFlags,
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|err| {
            ScenarioError::Parse {
                path: err.path().to_string(),
                message: err.inner().to_string(),
            }
        })?;
        scenario.check_times()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Demand of route `r` in period `t` from physical `o` to physical `d`,
    /// summing duplicate entries.
    pub fn demand(&self, r: usize, t: usize, o: usize, d: usize) -> f64 {
        self.routes[r]
            .demand
            .iter()
            .filter(|e| e.t == t && e.o == o && e.d == d)
            .map(|e| e.riders)
            .sum()
    }

    /// Dense `[o][d]` demand table of route `r` in period `t`.
    pub fn demand_table(&self, r: usize, t: usize) -> Vec<Vec<f64>> {
        let n = self.routes[r].n_physical();
        let mut table = vec![vec![0.0; n]; n];
        for e in self.routes[r].demand.iter().filter(|e| e.t == t) {
            if e.o < n && e.d < n {
                table[e.o][e.d] += e.riders;
            }
        }
        table
    }

    pub fn total_riders(&self) -> f64 {
        self.routes
            .iter()
            .flat_map(|r| r.demand.iter())
            .map(|e| e.riders)
            .sum()
    }

    fn check_times(&self) -> Result<(), ScenarioError> {
        let negative = |path: String, value: f64| {
            if value < 0.0 || !value.is_finite() {
                Err(ScenarioError::Parse {
                    path,
                    message: format!("time must be a non-negative number, got {value}"),
                })
            } else {
                Ok(())
            }
        };
        negative("transfer_time".into(), self.transfer_time)?;
        for (r, route) in self.routes.iter().enumerate() {
            for (dir, links) in route.link_run_times.iter().enumerate() {
                for (k, &v) in links.iter().enumerate() {
                    negative(format!("routes[{r}].link_run_times[{dir}][{k}]"), v)?;
                }
            }
            negative(format!("routes[{r}].dwell_saving"), route.dwell_saving)?;
            negative(format!("routes[{r}].turnback_time"), route.turnback_time)?;
            for (t, menu) in route.headway_menus.iter().enumerate() {
                for (k, &v) in menu.iter().enumerate() {
                    negative(format!("routes[{r}].headway_menus[{t}][{k}]"), v)?;
                }
            }
        }
        Ok(())
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json_str(&text)
}

/// One broken rule, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |field: String, rule: &str| {
        out.push(Violation {
            field,
            rule: rule.to_string(),
        })
    };

    if s.periods.is_empty() {
        push("periods".into(), "at least one period is required");
    }
    for (k, p) in s.periods.iter().enumerate() {
        if p.id != k {
            push(format!("periods[{k}].id"), "period ids must be unique and contiguous from 0");
        }
        if !(p.duration_hours > 0.0) {
            push(format!("periods[{k}].duration_hours"), "duration must be positive");
        }
    }
    if s.routes.is_empty() {
        push("routes".into(), "at least one route is required");
    }
    if !(s.fleet_cap > 0.0) {
        push("fleet_cap".into(), "fleet cap must be positive");
    }
    if !(s.vehicle_hours_cap > 0.0) {
        push("vehicle_hours_cap".into(), "vehicle-hours cap must be positive");
    }
    if !(s.gamma_wait > 0.0) {
        push("gamma_wait".into(), "waiting weight must be positive");
    }
    if !(s.gamma_transfer > 0.0) {
        push("gamma_transfer".into(), "transfer weight must be positive");
    }
    if !(s.transfer_time >= 0.0) {
        push("transfer_time".into(), "transfer time must be non-negative");
    }

    for (r, route) in s.routes.iter().enumerate() {
        let at = |field: &str| format!("routes[{r}].{field}");
        let n = route.n_physical();
        if n < 2 {
            push(at("stops"), "a route needs at least two physical stops");
        }
        for (dir, links) in route.link_run_times.iter().enumerate() {
            if links.len() + 1 != n.max(1) {
                push(
                    format!("routes[{r}].link_run_times[{dir}]"),
                    "one run time per adjacent stop pair is required",
                );
            } else if links.iter().any(|&v| !(v > 0.0)) {
                push(format!("routes[{r}].link_run_times[{dir}]"), "run times must be positive");
            }
        }
        if !(route.dwell_saving >= 0.0) {
            push(at("dwell_saving"), "dwell saving must be non-negative");
        }
        if !(route.turnback_time >= 0.0) {
            push(at("turnback_time"), "turnback time must be non-negative");
        }
        if !(route.capacity > 0.0) {
            push(at("capacity"), "vehicle capacity must be positive");
        }
        if route.n_patterns == 0 {
            push(at("n_patterns"), "at least one pattern is required");
        }
        if let Some(mask) = &route.allowed_arcs {
            let n_dir = route.n_dir();
            if mask.len() != n_dir || mask.iter().any(|row| row.len() != n_dir) {
                push(at("allowed_arcs"), "mask must be a square matrix over direction-stops");
            } else if (0..n_dir).any(|i| mask[i][i]) {
                push(at("allowed_arcs"), "self-loops are not allowed");
            }
        }
        if route.headway_menus.len() != s.periods.len() {
            push(at("headway_menus"), "one headway menu per period is required");
        }
        for (t, menu) in route.headway_menus.iter().enumerate() {
            let field = format!("routes[{r}].headway_menus[{t}]");
            if menu.is_empty() {
                push(field, "headway menu must not be empty");
            } else if menu.iter().any(|&h| !(h > 0.0)) {
                push(field, "headway values must be positive");
            } else if menu.windows(2).any(|w| w[0] >= w[1]) {
                push(field, "headway values must be strictly ascending");
            }
        }
        for (k, e) in route.demand.iter().enumerate() {
            let field = format!("routes[{r}].demand[{k}]");
            if e.o == e.d {
                push(field, "diagonal demand (origin equals destination) is not allowed");
            } else if e.o >= n || e.d >= n {
                push(field, "origin and destination must be physical stops of the route");
            } else if e.t >= s.periods.len() {
                push(field, "period index out of range");
            } else if !(e.riders >= 0.0) || !e.riders.is_finite() {
                push(field, "riders must be a non-negative number");
            }
        }
        // Arc times can turn negative when dwell savings exceed run times.
        if n >= 2 && route.link_run_times.iter().all(|l| l.len() + 1 == n) {
            let negative = (0..route.n_dir()).any(|i| {
                (0..route.n_dir()).any(|j| {
                    route.is_arc_allowed(i, j)
                        && arc_travel_time(route, i, j).map_or(false, |v| v < 0.0)
                })
            });
            if negative {
                push(at("dwell_saving"), "dwell saving makes an arc travel time negative");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn route(n: usize, out: Vec<f64>, inb: Vec<f64>) -> RouteSpec {
        RouteSpec {
            name: "test".into(),
            stops: (0..n).map(|k| format!("S{k}")).collect(),
            link_run_times: [out, inb],
            dwell_saving: 0.0,
            turnback_time: 0.0,
            allowed_arcs: None,
            capacity: 100.0,
            n_patterns: 1,
            headway_menus: vec![vec![5.0, 7.0]],
            demand: vec![],
        }
    }

    fn toy() -> Scenario {
        let mut r = route(5, vec![2.0, 3.0, 4.0, 5.0], vec![5.0, 4.0, 3.0, 2.0]);
        r.demand = vec![DemandEntry { t: 0, o: 0, d: 4, riders: 10.0 }];
        Scenario {
            periods: vec![PeriodSpec { id: 0, duration_hours: 1.0 }],
            routes: vec![r],
            fleet_cap: 40.0,
            vehicle_hours_cap: 40.0,
            gamma_wait: 1.5,
            gamma_transfer: 2.0,
            transfer_time: 3.0,
            options: OptionFlags::default(),
        }
    }

    #[test]
    fn mirror_examples() {
        assert_eq!(mirror_stop(0, 10).unwrap(), 9);
        assert_eq!(mirror_stop(9, 10).unwrap(), 0);
        assert_eq!(mirror_stop(4, 86).unwrap(), 81);
        assert!(mirror_stop(10, 10).is_err());
    }

    #[test]
    fn mirror_maps_outbound_onto_inbound() {
        for n in 2..8 {
            let mut seen: Vec<_> = (0..n).map(|i| mirror_stop(i, 2 * n).unwrap()).collect();
            seen.sort();
            assert_eq!(seen, (n..2 * n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn arc_time_examples() {
        let r = route(3, vec![3.0, 4.0], vec![4.0, 3.0]);
        assert_abs_diff_eq!(arc_travel_time(&r, 0, 1).unwrap(), 3.0);

        let mut skip = route(3, vec![3.0, 4.0], vec![4.0, 3.0]);
        skip.dwell_saving = 0.5;
        assert_abs_diff_eq!(arc_travel_time(&skip, 0, 2).unwrap(), 6.5);

        let mut closure = route(3, vec![3.0, 4.0], vec![4.0, 3.0]);
        closure.turnback_time = 2.0;
        assert_abs_diff_eq!(arc_travel_time(&closure, 5, 0).unwrap(), 2.0);

        assert!(matches!(arc_travel_time(&r, 2, 2), Err(ScenarioError::SelfArc { .. })));
    }

    #[test]
    fn short_turn_reverses_at_the_turning_stop() {
        let mut r = route(4, vec![2.0, 3.0, 4.0], vec![4.0, 3.0, 2.0]);
        r.turnback_time = 1.5;
        // outbound physical 1 straight onto inbound physical 1
        assert_abs_diff_eq!(arc_travel_time(&r, 1, r.mirror(1)).unwrap(), 1.5);
        // outbound 0 -> inbound 0 turning at physical 0
        assert_abs_diff_eq!(arc_travel_time(&r, 0, 7).unwrap(), 1.5);
        // outbound 1 -> inbound 0: turn at 1 then run 1 -> 0 inbound (2.0)
        assert_abs_diff_eq!(arc_travel_time(&r, 1, 7).unwrap(), 3.5);
        // terminal run from outbound 3 onto inbound 3
        assert_abs_diff_eq!(arc_travel_time(&r, 3, 4).unwrap(), 1.5);
    }

    #[test]
    fn full_loop_cycle_is_links_plus_two_turnbacks() {
        let mut r = route(4, vec![2.0, 3.0, 4.0], vec![4.5, 3.5, 2.5]);
        r.turnback_time = 1.0;
        let n_dir = r.n_dir();
        let cycle: f64 = (0..n_dir)
            .map(|i| arc_travel_time(&r, i, (i + 1) % n_dir).unwrap())
            .sum();
        assert_abs_diff_eq!(cycle, 9.0 + 10.5 + 2.0, epsilon = 1e-12);
        // any decomposition into fewer arcs keeps the total when dwell saving is 0
        let coarse = [0usize, 2, 3, 5, 7];
        let total: f64 = coarse
            .iter()
            .zip(coarse.iter().cycle().skip(1))
            .map(|(&i, &j)| arc_travel_time(&r, i, j).unwrap())
            .sum();
        assert_abs_diff_eq!(total, cycle, epsilon = 1e-12);
    }

    #[test]
    fn validate_clean_toy() {
        assert!(validate_scenario(&toy()).is_empty());
    }

    #[test]
    fn validate_descending_menu() {
        let mut s = toy();
        s.routes[0].headway_menus = vec![vec![7.0, 5.0]];
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("ascending"), "{v:?}");
    }

    #[test]
    fn validate_diagonal_demand() {
        let mut s = toy();
        s.routes[0].demand.push(DemandEntry { t: 0, o: 2, d: 2, riders: 3.0 });
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("diagonal"), "{v:?}");
    }

    #[test]
    fn validate_self_loop_mask() {
        let mut s = toy();
        let mut mask = vec![vec![true; 10]; 10];
        mask[3][3] = true;
        s.routes[0].allowed_arcs = Some(mask);
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.rule.contains("self-loops")));
    }

    #[test]
    fn load_reports_path_of_missing_demand() {
        let mut json: serde_json::Value = serde_json::from_str(&toy().to_json_string()).unwrap();
        json["routes"][0].as_object_mut().unwrap().remove("demand");
        let err = Scenario::from_json_str(&json.to_string()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("routes[0]") && msg.contains("demand"), "{msg}");
    }

    #[test]
    fn load_rejects_negative_times() {
        let mut json: serde_json::Value = serde_json::from_str(&toy().to_json_string()).unwrap();
        json["routes"][0]["link_run_times"][1][2] = serde_json::json!(-1.0);
        let msg = Scenario::from_json_str(&json.to_string()).unwrap_err().to_string();
        assert!(msg.contains("routes[0].link_run_times[1][2]"), "{msg}");
    }

    #[test]
    fn load_applies_defaults() {
        let mut json: serde_json::Value = serde_json::from_str(&toy().to_json_string()).unwrap();
        let route = json["routes"][0].as_object_mut().unwrap();
        route.remove("dwell_saving");
        route.remove("turnback_time");
        json.as_object_mut().unwrap().remove("options");
        let s = Scenario::from_json_str(&json.to_string()).unwrap();
        assert_eq!(s.routes[0].dwell_saving, 0.0);
        assert_eq!(s.routes[0].turnback_time, 0.0);
        assert_eq!(s.options, OptionFlags::default());
    }
}
