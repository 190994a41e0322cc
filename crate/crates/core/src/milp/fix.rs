use crate::error::PlanError;
use crate::milp::model::{MilpModel, VarTag};
use crate::plan::ServicePlan;
use crate::network::Scenario;

/// Copy of `m` with every design binary (pattern arcs, headways and their
/// products) fixed to the values implied by `plan`. Combination choices and
/// flows stay free, so solving the result prices the plan.
pub fn fix_baseline(m: &MilpModel, plan: &ServicePlan, s: &Scenario) -> Result<MilpModel, PlanError> {
    plan.check(s)?;
    let mut fixed = m.clone();
    for r in 0..s.routes.len() {
        for t in 0..s.periods.len() {
            let indices = plan.headway_indices(s, r, t)?;
            for (p, &h_on) in indices.iter().enumerate() {
                let pp = plan.pattern(r, t, p).expect("checked plan is complete");
                let arcs = pp.arcs();
                let tag = |p: usize| (r as u32, t as u32, p as u32);
                for v in fixed.variables.iter_mut() {
                    let value = match v.tag {
                        VarTag::X { r: vr, t: vt, p: vp, i, j } if (vr, vt, vp) == tag(p) => {
                            arcs.contains(&(i as usize, j as usize))
                        }
                        VarTag::XEta { r: vr, t: vt, p: vp, i, j, h } if (vr, vt, vp) == tag(p) => {
                            h as usize == h_on && arcs.contains(&(i as usize, j as usize))
                        }
                        VarTag::Y { r: vr, t: vt, p: vp, h } if (vr, vt, vp) == tag(p) => h as usize == h_on,
                        _ => continue,
                    };
                    let value = if value { 1.0 } else { 0.0 };
                    if value < v.lo || value > v.hi {
                        // only reachable when a full-pattern fix disagrees with the plan
                        return Err(PlanError::FullPatternRequired { route: r, period: t });
                    }
                    v.lo = value;
                    v.hi = value;
                }
            }
        }
    }
    Ok(fixed)
}
