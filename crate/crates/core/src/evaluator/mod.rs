//! Fixed-plan passenger assignment and reporting, independent of the MILP.

mod assign;
mod flows;
mod metrics;

pub use assign::assign_flows;
pub use flows::{
    conservation_residual, BoardingFlow, ComboChoice, EntryFlow, ExitFlow, FlowAssignment, RideFlow, TransferFlow,
    CHOICE_TOLERANCE,
};
pub use metrics::{compute_metrics, fleet_requirement, share_residual, Metrics};
