use std::fmt::Write as _;

use crate::milp::{MilpModel, RowSense, VarKind};

const TERMS_PER_LINE: usize = 8;

/// CPLEX LP text for `m`. Rows appear grouped by constraint family in
/// builder order, every variable gets an explicit bound line, and numbers
/// use the shortest round-trip decimal form, so identical models give
/// identical bytes.
pub fn export_model(m: &MilpModel) -> String {
    let mut out = String::new();
    let names: Vec<String> = m.variables.iter().map(|v| v.tag.to_string()).collect();
    let stats = m.stats();
    let _ = writeln!(
        out,
        "\\ variables {} (binary {}, integer {}, continuous {}), constraints {}",
        stats.variables,
        stats.binary_variables,
        stats.integer_variables,
        stats.continuous_variables,
        stats.constraints
    );
    out.push_str("Minimize\n obj:");
    let mut objective = m.objective.clone();
    if objective.is_empty() && !names.is_empty() {
        objective.push((0, 0.0));
    }
    write_terms(&mut out, &objective, &names);
    out.push('\n');

    out.push_str("Subject To\n");
    let mut order: Vec<usize> = (0..m.rows.len()).collect();
    order.sort_by_key(|&k| m.rows[k].provenance);
    for k in order {
        let row = &m.rows[k];
        let _ = write!(out, " {}:", row.name);
        if row.coefs.is_empty() {
            // the format needs at least one term
            write_terms(&mut out, &[(0, 0.0)], &names);
        } else {
            write_terms(&mut out, &row.coefs, &names);
        }
        let sense = match row.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {sense} {}", row.rhs);
    }

    out.push_str("Bounds\n");
    for (v, name) in m.variables.iter().zip(&names) {
        if v.hi.is_finite() {
            if v.lo == v.hi {
                let _ = writeln!(out, " {name} = {}", v.lo);
            } else {
                let _ = writeln!(out, " {} <= {name} <= {}", v.lo, v.hi);
            }
        } else {
            let _ = writeln!(out, " {name} >= {}", v.lo);
        }
    }

    for (kind, header) in [(VarKind::Binary, "Binaries"), (VarKind::Integer, "Generals")] {
        let listed: Vec<&String> = m
            .variables
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.kind == kind)
            .map(|(_, n)| n)
            .collect();
        if listed.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header}");
        for chunk in listed.chunks(TERMS_PER_LINE) {
            out.push(' ');
            out.push_str(&chunk.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for (k, &(v, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        if a < 0.0 {
            let _ = write!(out, " - {} {}", -a, names[v]);
        } else {
            let _ = write!(out, " + {} {}", a, names[v]);
        }
    }
}
