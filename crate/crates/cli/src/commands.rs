use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use transit_design::evaluator::{assign_flows, compute_metrics, Metrics};
use transit_design::milp::{build_model, MilpModel};
use transit_design::oracle::{certify, Verdict};
use transit_design::solver::{decode_plan, export_model, solve as run_solver, SolveResult, SolverConfig};
use transit_design::{
    load_scenario, validate_scenario, EvalError, OracleError, Scenario, ScenarioError, ServicePlan,
};

use crate::report::{compare_metrics, metrics_csv, render_patterns, sha256_hex, ArtifactWriter, RunManifest};
use crate::Common;

/// Exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Validation = 1,
    Io = 2,
    Infeasible = 3,
    OracleMismatch = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

impl Failure {
    fn new(kind: FailureKind, error: impl Into<anyhow::Error>) -> Self {
        Self { kind, error: error.into() }
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(e: impl Into<anyhow::Error>) -> Failure {
    Failure::new(FailureKind::Io, e)
}

/// Run context shared by all commands.
struct Session<'a> {
    common: &'a Common,
    command: &'static str,
    started_at: String,
    scenario_sha256: Option<String>,
    scenario: Option<Scenario>,
    overrides: Vec<String>,
}

impl<'a> Session<'a> {
    fn open(common: &'a Common, command: &'static str) -> Result<Self, Failure> {
        let started_at = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
        let bytes = std::fs::read(&common.scenario)
            .with_context(|| format!("cannot read scenario {}", common.scenario.display()))
            .map_err(io_failure)?;
        let mut session = Self {
            common,
            command,
            started_at,
            scenario_sha256: Some(sha256_hex(&bytes)),
            scenario: None,
            overrides: Vec::new(),
        };
        let mut scenario = load_scenario(&common.scenario).map_err(|e| match e {
            ScenarioError::Io { .. } => io_failure(e),
            other => Failure::new(FailureKind::Validation, other),
        })?;
        let flags = &mut scenario.options;
        let mut overrides = Vec::new();
        if common.no_transfers {
            flags.allow_transfers = false;
            overrides.push("no-transfers".to_string());
        }
        if common.symmetry {
            flags.enforce_symmetry = true;
            overrides.push("symmetry".to_string());
        }
        if common.capacity {
            flags.enforce_capacity = true;
            overrides.push("capacity".to_string());
        }
        if common.full_pattern {
            flags.require_full_pattern = true;
            overrides.push("full-pattern".to_string());
        }
        if common.integer_fleet {
            flags.integer_fleet = true;
            overrides.push("integer-fleet".to_string());
        }
        session.overrides = overrides;
        session.scenario = Some(scenario);
        Ok(session)
    }

    fn scenario(&self) -> &Scenario {
        self.scenario.as_ref().expect("opened")
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            time_limit_s: self.common.time_limit,
            rel_gap: self.common.gap,
            threads: 1,
            backend: self.common.backend.clone(),
            seed: self.common.seed,
        }
    }

    fn require_valid(&self) -> Outcome {
        let violations = validate_scenario(self.scenario());
        if violations.is_empty() {
            return Ok(());
        }
        for v in &violations {
            println!("{v}");
        }
        Err(Failure::new(
            FailureKind::Validation,
            anyhow!("scenario has {} violation(s)", violations.len()),
        ))
    }

    fn writer(&self) -> Result<ArtifactWriter, Failure> {
        ArtifactWriter::new(&self.common.out)
            .with_context(|| format!("cannot create output directory {}", self.common.out.display()))
            .map_err(io_failure)
    }

    fn finish(
        &self,
        writer: &mut ArtifactWriter,
        status: &str,
        objective: Option<f64>,
        solve_time_s: Option<f64>,
    ) -> Outcome {
        let manifest = RunManifest {
            command: self.command.to_string(),
            scenario_path: self.common.scenario.display().to_string(),
            scenario_sha256: self.scenario_sha256.clone(),
            options: self.scenario().options.clone(),
            overrides: self.overrides.clone(),
            solver: self.solver_config(),
            output_dir: self.common.out.display().to_string(),
            started_at: self.started_at.clone(),
            finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            status: status.to_string(),
            objective,
            solve_time_s,
            artifacts: writer.checksums.clone(),
        };
        writer.write_json("manifest.json", &manifest).map_err(io_failure)
    }
}

struct Solved {
    model: MilpModel,
    result: SolveResult,
}

fn build_and_solve(session: &Session<'_>) -> Result<Solved, Failure> {
    let s = session.scenario();
    let built = Instant::now();
    let model = build_model(s).map_err(|e| Failure::new(FailureKind::Validation, e))?;
    let stats = model.stats();
    eprintln!(
        "model: {} variables ({} binary), {} constraints, built in {:.2}s",
        stats.variables,
        stats.binary_variables,
        stats.constraints,
        built.elapsed().as_secs_f64()
    );
    let result = run_solver(&model, &session.solver_config()).map_err(|e| match e {
        transit_design::SolverError::BackendUnavailable(_) | transit_design::SolverError::Config(_) => {
            Failure::new(FailureKind::Validation, e)
        }
        transit_design::SolverError::Io(_) => io_failure(e),
        other => Failure::new(FailureKind::Infeasible, other),
    })?;
    eprintln!("solver: {} in {:.2}s", result.status, result.wall_time_s);
    Ok(Solved { model, result })
}

/// Decoded plan and its metrics, or the exit code when no solution exists.
fn decode(session: &Session<'_>, solved: &Solved) -> Result<(ServicePlan, Metrics), Failure> {
    let s = session.scenario();
    let (plan, flows) = decode_plan(&solved.model, &solved.result, s)
        .map_err(|e| Failure::new(FailureKind::Infeasible, e))?;
    let metrics = compute_metrics(&flows, s, &plan);
    Ok((plan, metrics))
}

fn write_solution(writer: &mut ArtifactWriter, s: &Scenario, plan: &ServicePlan, metrics: &Metrics) -> Outcome {
    let mut plan_json = plan.to_json_string();
    plan_json.push('\n');
    writer.write("plan.json", &plan_json).map_err(io_failure)?;
    writer.write_json("metrics.json", metrics).map_err(io_failure)?;
    writer.write("metrics.csv", &metrics_csv(metrics)).map_err(io_failure)?;
    writer.write("patterns.txt", &render_patterns(s, plan)).map_err(io_failure)
}

fn infeasible(session: &Session<'_>, writer: &mut ArtifactWriter, solved: &Solved) -> Failure {
    let status = solved.result.status.to_string();
    if let Err(e) = session.finish(writer, &status, None, Some(solved.result.wall_time_s)) {
        return e;
    }
    Failure::new(FailureKind::Infeasible, anyhow!("no solution: {status}"))
}

pub fn validate(common: &Common) -> Outcome {
    let session = Session::open(common, "validate")?;
    session.require_valid()
}

pub fn solve(common: &Common) -> Outcome {
    let session = Session::open(common, "solve")?;
    session.require_valid()?;
    let s = session.scenario();
    let mut writer = session.writer()?;
    let solved = build_and_solve(&session)?;
    writer.write("model.lp", &export_model(&solved.model)).map_err(io_failure)?;
    writer.write_json("model_stats.json", &solved.model.stats()).map_err(io_failure)?;
    if !solved.result.status.has_solution() {
        return Err(infeasible(&session, &mut writer, &solved));
    }
    let (plan, metrics) = decode(&session, &solved)?;
    write_solution(&mut writer, s, &plan, &metrics)?;
    print!("{}", render_patterns(s, &plan));
    println!("objective {}", solved.result.objective);
    session.finish(
        &mut writer,
        &solved.result.status.to_string(),
        Some(solved.result.objective),
        Some(solved.result.wall_time_s),
    )
}

fn read_plan(path: &Path) -> Result<ServicePlan, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read plan {}", path.display()))
        .map_err(io_failure)?;
    ServicePlan::from_json_str(&text)
        .with_context(|| format!("cannot parse plan {}", path.display()))
        .map_err(|e| Failure::new(FailureKind::Validation, e))
}

fn evaluate_plan(s: &Scenario, plan: &ServicePlan) -> Result<Metrics, Failure> {
    let flows = assign_flows(s, plan).map_err(|e| match e {
        EvalError::Plan(_) => Failure::new(FailureKind::Validation, e),
        other => Failure::new(FailureKind::Infeasible, other),
    })?;
    Ok(compute_metrics(&flows, s, plan))
}

pub fn evaluate(common: &Common, plan_path: &Path) -> Outcome {
    let session = Session::open(common, "evaluate")?;
    session.require_valid()?;
    let s = session.scenario();
    let plan = read_plan(plan_path)?;
    let metrics = evaluate_plan(s, &plan)?;
    let mut writer = session.writer()?;
    writer.write_json("metrics.json", &metrics).map_err(io_failure)?;
    writer.write("metrics.csv", &metrics_csv(&metrics)).map_err(io_failure)?;
    writer.write("patterns.txt", &render_patterns(s, &plan)).map_err(io_failure)?;
    println!("objective {}", metrics.objective);
    session.finish(&mut writer, "evaluated", Some(metrics.objective), None)
}

#[derive(Serialize)]
struct Comparison {
    baseline_plan: String,
    rows: Vec<crate::report::ComparisonRow>,
}

pub fn compare(common: &Common, baseline_path: &Path) -> Outcome {
    let session = Session::open(common, "compare")?;
    session.require_valid()?;
    let s = session.scenario();
    let baseline = read_plan(baseline_path)?;
    let baseline_metrics = evaluate_plan(s, &baseline)?;
    let mut writer = session.writer()?;
    let solved = build_and_solve(&session)?;
    if !solved.result.status.has_solution() {
        return Err(infeasible(&session, &mut writer, &solved));
    }
    let (plan, metrics) = decode(&session, &solved)?;
    write_solution(&mut writer, s, &plan, &metrics)?;
    let comparison = Comparison {
        baseline_plan: baseline_path.display().to_string(),
        rows: compare_metrics(&baseline_metrics, &metrics),
    };
    writer.write_json("comparison.json", &comparison).map_err(io_failure)?;
    for row in &comparison.rows {
        match row.delta_pct {
            Some(d) => println!("{:<24} {:>14.4} {:>14.4} {:>+9.3}%", row.metric, row.baseline, row.optimized, d),
            None => println!("{:<24} {:>14.4} {:>14.4}", row.metric, row.baseline, row.optimized),
        }
    }
    session.finish(
        &mut writer,
        &solved.result.status.to_string(),
        Some(solved.result.objective),
        Some(solved.result.wall_time_s),
    )
}

pub fn oracle(common: &Common) -> Outcome {
    let session = Session::open(common, "oracle")?;
    session.require_valid()?;
    let s = session.scenario();
    let mut writer = session.writer()?;
    let solved = build_and_solve(&session)?;
    let report = certify(s, &solved.result).map_err(|e| match e {
        OracleError::TooLarge(_) | OracleError::Plan(_) | OracleError::Build(_) => {
            Failure::new(FailureKind::Validation, e)
        }
        other => Failure::new(FailureKind::OracleMismatch, other),
    })?;
    writer.write_json("oracle_report.json", &report).map_err(io_failure)?;
    println!(
        "enumerated {} plans ({} feasible); oracle {:?}, milp {:?}",
        report.enumerated_count, report.feasible_count, report.best_objective, report.milp_objective
    );
    let status = match report.verdict {
        Verdict::Match => "match".to_string(),
        Verdict::Mismatch { delta } => format!("mismatch (delta {delta})"),
    };
    session.finish(&mut writer, &status, solved.result.status.has_solution().then_some(solved.result.objective), Some(solved.result.wall_time_s))?;
    match report.verdict {
        Verdict::Match => Ok(()),
        Verdict::Mismatch { delta } => Err(Failure::new(
            FailureKind::OracleMismatch,
            anyhow!("MILP objective differs from the enumerated optimum by {delta}"),
        )),
    }
}

pub fn export(common: &Common) -> Outcome {
    let session = Session::open(common, "export")?;
    session.require_valid()?;
    let model = build_model(session.scenario()).map_err(|e| Failure::new(FailureKind::Validation, e))?;
    let mut writer = session.writer()?;
    writer.write("model.lp", &export_model(&model)).map_err(io_failure)?;
    writer.write_json("model_stats.json", &model.stats()).map_err(io_failure)?;
    session.finish(&mut writer, "exported", None, None)
}
