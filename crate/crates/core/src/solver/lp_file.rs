use std::collections::HashMap;
use std::ffi::{c_void, CStr, CString};
use std::os::raw::c_char;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus};
use highs_sys::HighsInt;

use crate::error::SolverError;
use crate::milp::MilpModel;
use crate::solver::highs_native::map_status;
use crate::solver::{export_model, MilpBackend, SolveResult, SolverConfig};

/// Writes the exported LP text to a scratch file and lets HiGHS parse it
/// back, mapping columns to model variables by name. Exercises the export
/// path end to end.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpFileBackend;

static SCRATCH_COUNTER: AtomicUsize = AtomicUsize::new(0);

struct Handle(*mut c_void);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { highs_sys::Highs_destroy(self.0) }
    }
}

struct ScratchFile(PathBuf);

impl Drop for ScratchFile {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn check(status: HighsInt, what: &str) -> Result<(), SolverError> {
    if status == highs_sys::STATUS_ERROR {
        Err(SolverError::Backend(format!("{what} failed")))
    } else {
        Ok(())
    }
}

fn cstr(s: &str) -> CString {
    CString::new(s).expect("option names contain no NUL")
}

impl MilpBackend for LpFileBackend {
    fn name(&self) -> &'static str {
        "highs-lp"
    }

    fn solve(&self, m: &MilpModel, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
        cfg.check()?;
        let start = Instant::now();
        let path = std::env::temp_dir().join(format!(
            "transit-design-{}-{}.lp",
            std::process::id(),
            SCRATCH_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::write(&path, export_model(m))?;
        let scratch = ScratchFile(path);
        let c_path = CString::new(scratch.0.to_string_lossy().as_bytes())
            .map_err(|_| SolverError::Config("scratch path contains NUL".into()))?;

        let h = Handle(unsafe { highs_sys::Highs_create() });
        unsafe {
            check(highs_sys::Highs_setBoolOptionValue(h.0, cstr("output_flag").as_ptr(), 0), "output_flag")?;
            check(highs_sys::Highs_readModel(h.0, c_path.as_ptr()), "reading the exported model")?;
            check(
                highs_sys::Highs_setDoubleOptionValue(h.0, cstr("time_limit").as_ptr(), cfg.time_limit_s),
                "time_limit",
            )?;
            check(
                highs_sys::Highs_setDoubleOptionValue(h.0, cstr("mip_rel_gap").as_ptr(), cfg.rel_gap),
                "mip_rel_gap",
            )?;
            check(
                highs_sys::Highs_setIntOptionValue(
                    h.0,
                    cstr("random_seed").as_ptr(),
                    (cfg.seed % i32::MAX as u64) as HighsInt,
                ),
                "random_seed",
            )?;
            check(highs_sys::Highs_run(h.0), "solve")?;
        }

        let model_status = HighsModelStatus::try_from(unsafe { highs_sys::Highs_getModelStatus(h.0) })
            .map_err(|_| SolverError::Backend("unknown model status".into()))?;
        let mut primal: HighsInt = 0;
        let mut gap = f64::INFINITY;
        unsafe {
            highs_sys::Highs_getIntInfoValue(h.0, cstr("primal_solution_status").as_ptr(), &mut primal);
            highs_sys::Highs_getDoubleInfoValue(h.0, cstr("mip_gap").as_ptr(), &mut gap);
        }
        let has_primal = HighsSolutionStatus::try_from(primal).ok() == Some(HighsSolutionStatus::Feasible);
        let status = map_status(model_status, has_primal, gap);
        if !status.has_solution() {
            return Ok(SolveResult {
                status,
                objective: f64::NAN,
                assignment: Vec::new(),
                wall_time_s: start.elapsed().as_secs_f64(),
            });
        }

        let n_cols = unsafe { highs_sys::Highs_getNumCol(h.0) } as usize;
        let n_rows = unsafe { highs_sys::Highs_getNumRow(h.0) } as usize;
        let mut col_value = vec![0.0; n_cols];
        let mut col_dual = vec![0.0; n_cols];
        let mut row_value = vec![0.0; n_rows];
        let mut row_dual = vec![0.0; n_rows];
        unsafe {
            highs_sys::Highs_getSolution(
                h.0,
                col_value.as_mut_ptr(),
                col_dual.as_mut_ptr(),
                row_value.as_mut_ptr(),
                row_dual.as_mut_ptr(),
            );
        }
        let ids: HashMap<String, usize> = m.variables.iter().map(|v| (v.tag.to_string(), v.id)).collect();
        let mut assignment = vec![f64::NAN; m.n_vars()];
        let mut buf = vec![0 as c_char; 1024];
        for (col, &value) in col_value.iter().enumerate() {
            check(
                unsafe { highs_sys::Highs_getColName(h.0, col as HighsInt, buf.as_mut_ptr()) },
                "column name lookup",
            )?;
            let name = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
            let id = *ids
                .get(&name)
                .ok_or_else(|| SolverError::Backend(format!("re-imported model has unknown column {name}")))?;
            assignment[id] = value;
        }
        if let Some(v) = assignment.iter().position(|x| x.is_nan()) {
            return Err(SolverError::Backend(format!(
                "column {} was lost in the LP round trip",
                m.variables[v].tag
            )));
        }
        let objective = unsafe { highs_sys::Highs_getObjectiveValue(h.0) };
        Ok(SolveResult {
            status,
            objective,
            assignment,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}
