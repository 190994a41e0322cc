mod support;

use std::collections::BTreeMap;

use support::{demand, route, scenario};
use transit_design::milp::{build_model, Provenance, RowSense, VarKind};
use transit_design::network::Scenario;
use transit_design::BuildError;

/// Variable counts per family derived directly from the index domains.
fn domain_counts(s: &Scenario) -> BTreeMap<&'static str, usize> {
    let mut c = BTreeMap::new();
    for route in &s.routes {
        let n = route.n_physical();
        let nd = route.n_dir();
        let np = route.n_patterns;
        for t in 0..s.periods.len() {
            let k = route.menu(t).len();
            let n_combos = (k + 1).pow(np as u32) - 1;
            // active patterns summed over all combinations
            let active_total = np * k * (k + 1).pow(np as u32 - 1);
            let arcs = (0..nd)
                .flat_map(|i| (0..nd).map(move |j| (i, j)))
                .filter(|&(i, j)| route.is_arc_allowed(i, j))
                .count();
            let off_dest = |d: usize| (0..nd).filter(move |&i| route.physical(i) != d);
            let mut lambda = 0;
            for d in 0..n {
                for i in off_dest(d) {
                    lambda += (i + 1..nd).filter(|&j| route.is_arc_allowed(i, j)).count() * np;
                }
            }
            let nodes = n * (nd - 2);
            *c.entry("x").or_default() += np * arcs;
            *c.entry("x_eta").or_default() += np * arcs * k;
            *c.entry("y").or_default() += np * (k + 1);
            *c.entry("z").or_default() += nodes * n_combos;
            *c.entry("f_omega").or_default() += nodes * n_combos;
            *c.entry("f_alpha").or_default() += nodes * active_total;
            *c.entry("f_lambda").or_default() += lambda;
            *c.entry("f_beta").or_default() += nd * np;
            *c.entry("f_chi").or_default() +=
                if s.options.allow_transfers { nodes * 2 * np * n_combos } else { 0 };
            *c.entry("n_fleet").or_default() += 1;
        }
    }
    c
}

fn toy() -> Scenario {
    let mut r = route(3, 4.0, 2.0, 2, &[5.0, 7.0]);
    r.demand = vec![demand(0, 2, 10.0), demand(2, 1, 5.0)];
    scenario(vec![r])
}

#[test]
fn three_stop_toy_closed_form() {
    let m = build_model(&toy()).unwrap();
    let stats = m.stats();
    let fam = &stats.variables_by_family;
    assert_eq!(fam["x"], 60);
    assert_eq!(fam["y"], 6);
    assert_eq!(fam["x_eta"], 120);
    assert_eq!(fam["z"], 96);
    assert_eq!(fam["f_omega"], 96);
    assert_eq!(fam["f_alpha"], 144);
    assert_eq!(fam["f_beta"], 12);
    assert_eq!(fam["f_chi"], 384);
    assert_eq!(fam["n_fleet"], 1);
    assert_eq!(stats.binary_variables, 60 + 6 + 120 + 96);
    assert_eq!(stats.integer_variables, 0);
}

#[test]
fn family_counts_match_index_domains() {
    let mut variants = Vec::new();
    variants.push(toy());
    let mut s = toy();
    s.options.allow_transfers = false;
    variants.push(s);
    let mut s = toy();
    let nd = 6;
    let mut mask = vec![vec![true; nd]; nd];
    for (i, row) in mask.iter_mut().enumerate() {
        row[i] = false;
    }
    mask[0][3] = false;
    mask[4][1] = false;
    s.routes[0].allowed_arcs = Some(mask);
    variants.push(s);
    let mut two = toy();
    let mut r2 = route(4, 3.0, 1.0, 1, &[6.0]);
    r2.demand = vec![demand(3, 0, 8.0)];
    two.routes.push(r2);
    variants.push(two);

    for s in &variants {
        let m = build_model(s).unwrap();
        let stats = m.stats();
        for (family, expected) in domain_counts(s) {
            assert_eq!(stats.variables_by_family[family], expected, "{family}");
        }
    }
}

#[test]
fn row_counts_per_equation() {
    let m = build_model(&toy()).unwrap();
    let by_eq = m.stats().constraints_by_equation;
    // n = 3, N = 6 direction-stops, P = 2, K = 2, C = 8, 12 (i, d) nodes
    let expected = [
        ("eq15", 12),
        ("eq16", 12 + 2),
        ("eq19", 2),
        ("eq20", 2),
        ("eq21", 120),
        ("eq22", 60 + 2),
        ("eq24", 1),
        ("eq26", 1),
        ("eq27", 1),
        ("eq28", 12),
        ("eq29", 144),
        ("eq30", 144),
        ("eq31", 2 * 12 * 4),
        ("eq32", 6),
        ("eq33", 3),
        ("eq34", 96),
        ("eq35", 2 * 3 * 4),
        ("eq36", 2 * 3 * 2),
    ];
    for (eq, n) in expected {
        assert_eq!(by_eq[eq], n, "{eq}");
    }
    assert_eq!(by_eq["eq17"], m.stats().variables_by_family["f_lambda"]);
    assert!(!by_eq.contains_key("eq18"));
    assert!(!by_eq.contains_key("eq23"));
}

#[test]
fn optional_rows_follow_flags() {
    let mut s = toy();
    s.options.enforce_symmetry = true;
    s.options.enforce_capacity = true;
    s.options.integer_fleet = true;
    let m = build_model(&s).unwrap();
    let stats = m.stats();
    // one row per mirror orbit of size two: 30 arcs, none self-mirrored except i -> mirror(i)
    let self_mirrored = 6;
    assert_eq!(stats.constraints_by_equation["eq18"], 2 * (30 - self_mirrored) / 2);
    // forward arcs per pattern
    assert_eq!(stats.constraints_by_equation["eq23"], 2 * 15);
    assert_eq!(stats.integer_variables, 1);
}

#[test]
fn objective_coefficients() {
    let s = toy();
    let m = build_model(&s).unwrap();
    let cost: BTreeMap<usize, f64> = m.objective.iter().copied().collect();
    for v in &m.variables {
        let c = cost.get(&v.id).copied().unwrap_or(0.0);
        match v.tag.family().as_str() {
            "f_lambda" | "f_omega" | "f_chi" => assert!(c > 0.0, "{}", v.tag),
            _ => assert_eq!(c, 0.0, "{}", v.tag),
        }
    }
    // waiting for the joint 5/7 combination: 1.5 * (35/12) / 2
    let combo = transit_design::enumerate_combinations(2, &[5.0, 7.0]).unwrap().position(&[1, 2]).unwrap();
    let tag = transit_design::milp::VarTag::FOmega { r: 0, t: 0, d: 2, i: 0, c: combo as u32 };
    let id = m.var(&tag).unwrap();
    assert!((cost[&id] - 1.5 * 35.0 / 24.0).abs() < 1e-12);
}

#[test]
fn big_m_rows_use_destination_demand() {
    let s = toy();
    let m = build_model(&s).unwrap();
    for row in m.rows.iter().filter(|r| r.provenance == Provenance::Eq30) {
        let z = row.coefs.iter().find(|(v, _)| m.variables[*v].kind == VarKind::Binary).unwrap();
        let d = match m.variables[z.0].tag {
            transit_design::milp::VarTag::Z { d, .. } => d as usize,
            _ => unreachable!(),
        };
        assert_eq!(-z.1, transit_design::milp::big_m_flow(&s, 0, 0, d));
        assert_eq!(row.sense, RowSense::Le);
    }
}

#[test]
fn invalid_scenario_is_rejected() {
    let mut s = toy();
    s.routes[0].headway_menus = vec![vec![7.0, 5.0]];
    assert!(matches!(build_model(&s), Err(BuildError::InvalidScenario(v)) if v.len() == 1));
}

#[test]
fn full_pattern_needs_its_arcs() {
    let mut s = toy();
    s.options.require_full_pattern = true;
    let mut mask = vec![vec![true; 6]; 6];
    for (i, row) in mask.iter_mut().enumerate() {
        row[i] = false;
    }
    mask[2][3] = false;
    s.routes[0].allowed_arcs = Some(mask);
    assert!(matches!(build_model(&s), Err(BuildError::Structural { .. })));
}
