use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use transit_design::evaluator::Metrics;
use transit_design::network::OptionFlags;
use transit_design::solver::SolverConfig;
use transit_design::{Scenario, ServicePlan};

/// Writes artifacts under one directory and remembers their checksums.
pub struct ArtifactWriter {
    dir: PathBuf,
    pub checksums: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            checksums: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.checksums.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(name, &text)
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario_path: String,
    pub scenario_sha256: Option<String>,
    pub options: OptionFlags,
    pub overrides: Vec<String>,
    pub solver: SolverConfig,
    pub output_dir: String,
    pub started_at: String,
    pub finished_at: String,
    pub status: String,
    pub objective: Option<f64>,
    pub solve_time_s: Option<f64>,
    pub artifacts: BTreeMap<String, String>,
}

pub fn metrics_csv(m: &Metrics) -> String {
    let mut out = String::from("metric,value\n");
    let rows = [
        ("objective", m.objective),
        ("riding_minutes_total", m.riding_minutes_total),
        ("waiting_weighted_total", m.waiting_weighted_total),
        ("waiting_minutes_total", m.waiting_minutes_total),
        ("transfer_weighted_total", m.transfer_weighted_total),
        ("transfer_minutes_total", m.transfer_minutes_total),
        ("transfers_count", m.transfers_count),
        ("total_riders", m.total_riders),
        ("avg_riding_min", m.avg_riding_min),
        ("avg_waiting_min", m.avg_waiting_min),
        ("avg_journey_min", m.avg_journey_min),
        ("avg_objective_per_rider", m.avg_objective_per_rider),
    ];
    for (name, value) in rows {
        let _ = writeln!(out, "{name},{value}");
    }
    for f in &m.fleet_by_route_period {
        let _ = writeln!(out, "fleet_r{}_t{},{}", f.route, f.period, f.vehicles);
    }
    out
}

/// One line per pattern: served stops marked `●`, skipped `─`, outbound
/// then inbound, with the headway at the end.
pub fn render_patterns(s: &Scenario, plan: &ServicePlan) -> String {
    let mut out = String::new();
    for (r, route) in s.routes.iter().enumerate() {
        for t in 0..s.periods.len() {
            for p in 0..route.n_patterns {
                let _ = write!(out, "{} | period {} | pattern {} |", route.name, s.periods[t].id, p);
                let Some(pp) = plan.pattern(r, t, p) else {
                    out.push_str(" missing\n");
                    continue;
                };
                let Some(h) = pp.headway else {
                    out.push_str(" out of service\n");
                    continue;
                };
                for i in 0..route.n_dir() {
                    if i == route.n_physical() {
                        out.push_str(" /");
                    }
                    let mark = if pp.stops.contains(&i) { '●' } else { '─' };
                    let _ = write!(out, " {mark}{}", route.stops[route.physical(i)]);
                }
                let _ = writeln!(out, " | every {h} min");
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub baseline: f64,
    pub optimized: f64,
    /// `None` when the baseline value is zero
    pub delta_pct: Option<f64>,
}

pub fn compare_metrics(baseline: &Metrics, optimized: &Metrics) -> Vec<ComparisonRow> {
    let mut rows = vec![
        ("objective", baseline.objective, optimized.objective),
        ("avg_riding_min", baseline.avg_riding_min, optimized.avg_riding_min),
        ("avg_waiting_min", baseline.avg_waiting_min, optimized.avg_waiting_min),
        ("avg_journey_min", baseline.avg_journey_min, optimized.avg_journey_min),
        ("transfers_count", baseline.transfers_count, optimized.transfers_count),
    ]
    .into_iter()
    .map(|(m, b, o)| (m.to_string(), b, o))
    .collect::<Vec<_>>();
    for (b, o) in baseline.fleet_by_route_period.iter().zip(&optimized.fleet_by_route_period) {
        rows.push((format!("fleet_r{}_t{}", b.route, b.period), b.vehicles, o.vehicles));
    }
    rows.into_iter()
        .map(|(metric, baseline, optimized)| ComparisonRow {
            metric,
            baseline,
            optimized,
            delta_pct: (baseline != 0.0).then(|| (optimized - baseline) / baseline.abs() * 100.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use transit_design::plan::FleetEntry;

    fn metrics(objective: f64, transfers: f64) -> Metrics {
        Metrics {
            objective,
            riding_minutes_total: 0.0,
            waiting_weighted_total: 0.0,
            waiting_minutes_total: 0.0,
            transfer_weighted_total: 0.0,
            transfer_minutes_total: 0.0,
            transfers_count: transfers,
            total_riders: 10.0,
            avg_riding_min: 0.0,
            avg_waiting_min: 0.0,
            avg_journey_min: 0.0,
            avg_objective_per_rider: objective / 10.0,
            fleet_by_route_period: vec![FleetEntry { route: 0, period: 0, vehicles: 4.0 }],
        }
    }

    #[test]
    fn comparison_deltas() {
        let rows = compare_metrics(&metrics(200.0, 0.0), &metrics(150.0, 3.0));
        let objective = rows.iter().find(|r| r.metric == "objective").unwrap();
        assert_eq!(objective.delta_pct, Some(-25.0));
        let transfers = rows.iter().find(|r| r.metric == "transfers_count").unwrap();
        assert_eq!(transfers.delta_pct, None);
        assert!(rows.iter().any(|r| r.metric == "fleet_r0_t0" && r.delta_pct == Some(0.0)));
    }

    #[test]
    fn csv_lists_fleet_last() {
        let csv = metrics_csv(&metrics(200.0, 0.0));
        assert!(csv.starts_with("metric,value\nobjective,200\n"));
        assert!(csv.ends_with("fleet_r0_t0,4\n"));
    }

    #[test]
    fn checksum_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
