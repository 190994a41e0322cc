//! Decoded service design: stop sequence and headway of every pattern plus the
//! fleet assigned to each route and period.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::network::{arc_travel_time, DirStop, Minutes, RouteSpec, Scenario};

/// Served direction-stops of one pattern in loop order; `headway` is `None`
/// when the pattern is out of service, in which case `stops` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternPlan {
    pub route: usize,
    pub period: usize,
    pub pattern: usize,
    pub stops: Vec<DirStop>,
    pub headway: Option<Minutes>,
}

impl PatternPlan {
    pub fn off(route: usize, period: usize, pattern: usize) -> Self {
        Self {
            route,
            period,
            pattern,
            stops: Vec::new(),
            headway: None,
        }
    }

    pub fn in_service(&self) -> bool {
        self.headway.is_some()
    }

    /// Consecutive served stops plus the closing arc back to the first one.
    pub fn arcs(&self) -> Vec<(DirStop, DirStop)> {
        loop_arcs(&self.stops)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleetEntry {
    pub route: usize,
    pub period: usize,
    pub vehicles: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ServicePlan {
    pub patterns: Vec<PatternPlan>,
    #[serde(default)]
    pub fleet: Vec<FleetEntry>,
}

pub fn loop_arcs(stops: &[DirStop]) -> Vec<(DirStop, DirStop)> {
    if stops.len() < 2 {
        return Vec::new();
    }
    let mut arcs: Vec<_> = stops.windows(2).map(|w| (w[0], w[1])).collect();
    arcs.push((stops[stops.len() - 1], stops[0]));
    arcs
}

/// Vehicle minutes for one trip around the loop through `stops`.
pub fn cycle_time(route: &RouteSpec, stops: &[DirStop]) -> Minutes {
    loop_arcs(stops)
        .into_iter()
        .map(|(i, j)| arc_travel_time(route, i, j).expect("plan stops are valid"))
        .sum()
}

impl ServicePlan {
    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }

    pub fn pattern(&self, route: usize, period: usize, pattern: usize) -> Option<&PatternPlan> {
        self.patterns
            .iter()
            .find(|p| p.route == route && p.period == period && p.pattern == pattern)
    }

    pub fn fleet(&self, route: usize, period: usize) -> Option<f64> {
        self.fleet
            .iter()
            .find(|f| f.route == route && f.period == period)
            .map(|f| f.vehicles)
    }

    /// Menu position (1-based) of a pattern's headway, `0` when out of service.
    pub fn headway_index(&self, s: &Scenario, route: usize, period: usize, pattern: usize) -> Result<usize, PlanError> {
        let pp = self
            .pattern(route, period, pattern)
            .ok_or(PlanError::MissingPattern { route, period, pattern })?;
        match pp.headway {
            None => Ok(0),
            Some(h) => s.routes[route]
                .menu(period)
                .iter()
                .position(|&m| (m - h).abs() <= 1e-9 * m.max(1.0))
                .map(|k| k + 1)
                .ok_or(PlanError::HeadwayNotInMenu {
                    route,
                    period,
                    pattern,
                    headway: h,
                }),
        }
    }

    /// Headway index per pattern of one (route, period).
    pub fn headway_indices(&self, s: &Scenario, route: usize, period: usize) -> Result<Vec<usize>, PlanError> {
        (0..s.routes[route].n_patterns)
            .map(|p| self.headway_index(s, route, period, p))
            .collect()
    }

    /// Structural check against a scenario: complete, well-formed loops on
    /// allowed arcs, headways from the menu, and the option-driven shape rules.
    pub fn check(&self, s: &Scenario) -> Result<(), PlanError> {
        for pp in &self.patterns {
            let known = pp.route < s.routes.len()
                && pp.period < s.periods.len()
                && pp.pattern < s.routes[pp.route].n_patterns;
            if !known {
                return Err(PlanError::UnknownPattern {
                    route: pp.route,
                    period: pp.period,
                    pattern: pp.pattern,
                });
            }
        }
        let mut seen = BTreeSet::new();
        for pp in &self.patterns {
            if !seen.insert((pp.route, pp.period, pp.pattern)) {
                return Err(malformed(pp, "listed more than once"));
            }
        }
        for (r, route) in s.routes.iter().enumerate() {
            for t in 0..s.periods.len() {
                for p in 0..route.n_patterns {
                    let pp = self
                        .pattern(r, t, p)
                        .ok_or(PlanError::MissingPattern { route: r, period: t, pattern: p })?;
                    check_pattern(s, route, pp)?;
                    self.headway_index(s, r, t, p)?;
                }
                if s.options.require_full_pattern {
                    let full: Vec<_> = (0..route.n_dir()).collect();
                    let p0 = self.pattern(r, t, 0).expect("checked above");
                    if p0.stops != full || !p0.in_service() {
                        return Err(PlanError::FullPatternRequired { route: r, period: t });
                    }
                }
            }
        }
        Ok(())
    }

    /// Stable text key used for ordering and deduplicating plans.
    pub fn encoding(&self) -> String {
        let mut patterns: Vec<_> = self.patterns.iter().collect();
        patterns.sort_by_key(|p| (p.route, p.period, p.pattern));
        let mut out = String::new();
        for p in patterns {
            let _ = write!(out, "r{}t{}p{}:", p.route, p.period, p.pattern);
            match p.headway {
                Some(h) => {
                    let _ = write!(out, "h{h}[");
                    for (k, s) in p.stops.iter().enumerate() {
                        if k > 0 {
                            out.push(',');
                        }
                        let _ = write!(out, "{s}");
                    }
                    out.push_str("];");
                }
                None => out.push_str("off;"),
            }
        }
        out
    }
}

fn malformed(pp: &PatternPlan, message: &str) -> PlanError {
    PlanError::MalformedPattern {
        route: pp.route,
        period: pp.period,
        pattern: pp.pattern,
        message: message.to_string(),
    }
}

fn check_pattern(s: &Scenario, route: &RouteSpec, pp: &PatternPlan) -> Result<(), PlanError> {
    if pp.headway.is_none() {
        if !pp.stops.is_empty() {
            return Err(malformed(pp, "out-of-service pattern must not list stops"));
        }
        return Ok(());
    }
    if pp.stops.len() < 2 {
        return Err(malformed(pp, "a pattern in service must serve at least two direction-stops"));
    }
    if pp.stops.iter().any(|&i| i >= route.n_dir()) {
        return Err(malformed(pp, "stop index outside the route"));
    }
    if pp.stops.windows(2).any(|w| w[0] >= w[1]) {
        return Err(malformed(pp, "stops must be listed once each in loop order"));
    }
    for (i, j) in pp.arcs() {
        if !route.is_arc_allowed(i, j) {
            return Err(PlanError::ArcNotAllowed {
                route: pp.route,
                period: pp.period,
                pattern: pp.pattern,
                from: i,
                to: j,
            });
        }
    }
    if s.options.enforce_symmetry {
        let served: BTreeSet<_> = pp.stops.iter().copied().collect();
        if pp.stops.iter().any(|&i| !served.contains(&route.mirror(i))) {
            return Err(PlanError::NotSymmetric {
                route: pp.route,
                period: pp.period,
                pattern: pp.pattern,
            });
        }
        if pp.stops.len() < 4 {
            return Err(malformed(pp, "a mirror-symmetric pattern must serve at least two physical stops"));
        }
    }
    Ok(())
}
