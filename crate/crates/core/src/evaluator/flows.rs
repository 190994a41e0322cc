use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::network::{DirStop, Scenario};

/// Riders entering at direction-stop `i` bound for physical stop `d`, waiting
/// for combination `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryFlow {
    pub route: usize,
    pub period: usize,
    pub d: usize,
    pub i: DirStop,
    pub c: usize,
    pub riders: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoardingFlow {
    pub route: usize,
    pub period: usize,
    pub d: usize,
    pub i: DirStop,
    pub c: usize,
    pub p: usize,
    pub riders: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RideFlow {
    pub route: usize,
    pub period: usize,
    pub d: usize,
    pub p: usize,
    pub i: DirStop,
    pub j: DirStop,
    pub riders: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitFlow {
    pub route: usize,
    pub period: usize,
    pub j: DirStop,
    pub p: usize,
    pub riders: f64,
}

/// Riders leaving pattern `p` at `i` and joining combination `c` at `j`
/// (`i` itself or its mirror).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferFlow {
    pub route: usize,
    pub period: usize,
    pub d: usize,
    pub i: DirStop,
    pub j: DirStop,
    pub p: usize,
    pub c: usize,
    pub riders: f64,
}

/// Combination used at (`i`, `d`); recorded wherever riders board there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboChoice {
    pub route: usize,
    pub period: usize,
    pub i: DirStop,
    pub d: usize,
    pub c: usize,
}

/// Sparse flows; zero entries are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowAssignment {
    pub entry: Vec<EntryFlow>,
    pub boarding: Vec<BoardingFlow>,
    pub inter_stop: Vec<RideFlow>,
    pub exit: Vec<ExitFlow>,
    pub transfer: Vec<TransferFlow>,
    pub combo_choice: Vec<ComboChoice>,
}

/// Combination-node flow below this is treated as no boarding when choices
/// are recorded.
pub const CHOICE_TOLERANCE: f64 = 1e-9;

impl FlowAssignment {
    pub fn total_entry(&self) -> f64 {
        self.entry.iter().map(|f| f.riders).sum()
    }

    pub fn total_transfers(&self) -> f64 {
        self.transfer.iter().map(|f| f.riders).sum()
    }

    /// Derive `combo_choice` from boarding flows.
    pub(crate) fn record_choices(&mut self) {
        let mut node: HashMap<(usize, usize, usize, usize, usize), f64> = HashMap::new();
        for b in &self.boarding {
            *node.entry((b.route, b.period, b.i, b.d, b.c)).or_insert(0.0) += b.riders;
        }
        let mut choices: Vec<_> = node
            .into_iter()
            .filter(|&(_, v)| v > CHOICE_TOLERANCE)
            .map(|((route, period, i, d, c), _)| ComboChoice { route, period, i, d, c })
            .collect();
        choices.sort_by_key(|c| (c.route, c.period, c.d, c.i, c.c));
        self.combo_choice = choices;
    }
}

/// Largest absolute residual of the demand and conservation equations
/// (entries, exits, combination nodes, pattern nodes, destination nodes).
/// Combination indices refer to each (route, period)'s lexicographic set.
pub fn conservation_residual(fa: &FlowAssignment, s: &Scenario) -> f64 {
    type Key = (usize, usize, usize, usize);
    let mut worst: f64 = 0.0;

    // demand per (r, t, o, d)
    let mut entered: HashMap<Key, f64> = HashMap::new();
    for e in &fa.entry {
        let o = s.routes[e.route].physical(e.i);
        *entered.entry((e.route, e.period, o, e.d)).or_insert(0.0) += e.riders;
    }
    let mut exited: HashMap<(usize, usize, usize), f64> = HashMap::new();
    for x in &fa.exit {
        let d = s.routes[x.route].physical(x.j);
        *exited.entry((x.route, x.period, d)).or_insert(0.0) += x.riders;
    }
    for (r, route) in s.routes.iter().enumerate() {
        for t in 0..s.periods.len() {
            let table = s.demand_table(r, t);
            for d in 0..route.n_physical() {
                let mut into_d = 0.0;
                for o in 0..route.n_physical() {
                    into_d += table[o][d];
                    if o != d {
                        let got = entered.get(&(r, t, o, d)).copied().unwrap_or(0.0);
                        worst = worst.max((got - table[o][d]).abs());
                    }
                }
                let got = exited.get(&(r, t, d)).copied().unwrap_or(0.0);
                worst = worst.max((got - into_d).abs());
            }
        }
    }

    // combination nodes: entry + transfers in = boarding
    let mut node: HashMap<(usize, usize, usize, usize, usize), f64> = HashMap::new();
    for e in &fa.entry {
        *node.entry((e.route, e.period, e.d, e.i, e.c)).or_insert(0.0) += e.riders;
    }
    for x in &fa.transfer {
        *node.entry((x.route, x.period, x.d, x.j, x.c)).or_insert(0.0) += x.riders;
    }
    for b in &fa.boarding {
        *node.entry((b.route, b.period, b.d, b.i, b.c)).or_insert(0.0) -= b.riders;
    }
    worst = node.values().fold(worst, |w, v| w.max(v.abs()));

    // pattern nodes: boarding + rides in - rides out - transfers out = 0
    // away from the destination; rides in = exits at it
    let mut pattern: HashMap<(usize, usize, usize, usize, usize), f64> = HashMap::new();
    for b in &fa.boarding {
        *pattern.entry((b.route, b.period, b.d, b.i, b.p)).or_insert(0.0) += b.riders;
    }
    for l in &fa.inter_stop {
        *pattern.entry((l.route, l.period, l.d, l.j, l.p)).or_insert(0.0) += l.riders;
        *pattern.entry((l.route, l.period, l.d, l.i, l.p)).or_insert(0.0) -= l.riders;
    }
    for x in &fa.transfer {
        *pattern.entry((x.route, x.period, x.d, x.i, x.p)).or_insert(0.0) -= x.riders;
    }
    for x in &fa.exit {
        let d = s.routes[x.route].physical(x.j);
        *pattern.entry((x.route, x.period, d, x.j, x.p)).or_insert(0.0) -= x.riders;
    }
    worst = pattern.values().fold(worst, |w, v| w.max(v.abs()));

    let negative = fa
        .entry
        .iter()
        .map(|f| f.riders)
        .chain(fa.boarding.iter().map(|f| f.riders))
        .chain(fa.inter_stop.iter().map(|f| f.riders))
        .chain(fa.exit.iter().map(|f| f.riders))
        .chain(fa.transfer.iter().map(|f| f.riders))
        .fold(0.0_f64, |w, v| w.max(-v));
    worst.max(negative)
}
