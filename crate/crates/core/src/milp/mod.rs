mod builder;
mod fix;
mod model;

pub use builder::{big_m_flow, big_m_share, build_model};
pub use fix::fix_baseline;
pub use model::{
    MilpModel, ModelStats, Provenance, Row, RowSense, VarFamily, VarId, VarKind, VarTag, VariableRef,
};

pub fn model_stats(m: &MilpModel) -> ModelStats {
    m.stats()
}
