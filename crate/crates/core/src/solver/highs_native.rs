use std::time::Instant;

use highs::{ColProblem, HighsModelStatus, HighsSolutionStatus, Model, Sense};

use crate::error::SolverError;
use crate::milp::{MilpModel, RowSense, VarKind};
use crate::solver::{MilpBackend, SolveResult, SolveStatus, SolverConfig};

/// In-memory HiGHS adapter: the model is handed over column-wise without
/// going through a file.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

impl MilpBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, m: &MilpModel, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
        cfg.check()?;
        let start = Instant::now();
        let mut problem = ColProblem::default();
        let rows: Vec<_> = m
            .rows
            .iter()
            .map(|row| match row.sense {
                RowSense::Le => problem.add_row(..=row.rhs),
                RowSense::Ge => problem.add_row(row.rhs..),
                RowSense::Eq => problem.add_row(row.rhs..=row.rhs),
            })
            .collect();
        let mut columns: Vec<Vec<(highs::Row, f64)>> = vec![Vec::new(); m.n_vars()];
        for (row, handle) in m.rows.iter().zip(&rows) {
            for &(v, a) in &row.coefs {
                columns[v].push((*handle, a));
            }
        }
        let mut cost = vec![0.0; m.n_vars()];
        for &(v, c) in &m.objective {
            cost[v] += c;
        }
        for (v, factors) in m.variables.iter().zip(columns) {
            let integral = !matches!(v.kind, VarKind::Continuous);
            if v.hi.is_finite() {
                problem.add_column_with_integrality(cost[v.id], v.lo..=v.hi, factors, integral);
            } else {
                problem.add_column_with_integrality(cost[v.id], v.lo.., factors, integral);
            }
        }

        let mut model = Model::try_new(problem)
            .map_err(|status| SolverError::Backend(format!("model rejected: {status:?}")))?;
        model.set_sense(Sense::Minimise);
        set_option(&mut model, "time_limit", cfg.time_limit_s)?;
        set_option(&mut model, "mip_rel_gap", cfg.rel_gap)?;
        set_option(&mut model, "random_seed", (cfg.seed % i32::MAX as u64) as i32)?;
        let solved = model
            .try_solve()
            .map_err(|status| SolverError::Backend(format!("solve failed: {status:?}")))?;

        let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let gap = solved.mip_gap();
        let status = map_status(solved.status(), has_primal, gap);
        let (objective, assignment) = if status.has_solution() {
            (solved.objective_value(), solved.get_solution().columns().to_vec())
        } else {
            (f64::NAN, Vec::new())
        };
        Ok(SolveResult {
            status,
            objective,
            assignment,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

fn set_option<V: highs::HighsOptionValue>(model: &mut Model, name: &str, value: V) -> Result<(), SolverError> {
    model
        .try_set_option(name, value)
        .map_err(|_| SolverError::Config(format!("HiGHS rejected option {name}")))
}

/// Shared by both HiGHS adapters. A reported optimum whose gap exceeds the
/// rounding noise level is surfaced as a feasible solution with that gap.
pub(crate) fn map_status(status: HighsModelStatus, has_primal: bool, gap: f64) -> SolveStatus {
    match status {
        HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {
            if gap.is_finite() && gap > 1e-9 {
                SolveStatus::Feasible { gap }
            } else {
                SolveStatus::Optimal
            }
        }
        HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Infeasible,
        HighsModelStatus::ReachedTimeLimit
        | HighsModelStatus::ReachedIterationLimit
        | HighsModelStatus::ReachedInterrupt
        | HighsModelStatus::ReachedSolutionLimit => {
            if has_primal {
                SolveStatus::Feasible { gap }
            } else {
                SolveStatus::Timeout
            }
        }
        other => SolveStatus::Error {
            message: format!("HiGHS status {other:?}"),
        },
    }
}
