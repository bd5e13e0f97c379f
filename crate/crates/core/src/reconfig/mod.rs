//! Configuration search: enumerate parameter assignments, score each
//! against all SLOs, rank them, and adapt when a window violates an SLO.

mod adapt;
mod report;
mod score;

pub use adapt::{adapt, Adaptation, BlanketObservation, Explanation};
pub use report::{ranking_csv, ranking_json, ranking_table};
pub use score::{
    infer_best_config, parameter_space, score_config, ConfigScore, DeviceConfig, Provenance,
    Ranking, Scorer, SloScore, RANK_RESOLUTION,
};
