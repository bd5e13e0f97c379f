//! Workload simulator: a ground-truth network over the telemetry schema,
//! parameter sweeps, ancestral sampling to raw telemetry, and replay of
//! configurations against SLOs.

mod ground_truth;
mod random;
mod sample;
mod scenario;
mod schedule;

pub use ground_truth::{
    ground_truth, ground_truth_map, GroundTruth, BITRATE, CONFIG, CONFIGS, CONSUMPTION, CPU, DELAY,
    DISTANCE, EDGES, FLOOR, FPS, FPS_LEVELS, GPU, JITTER, LINES, MEMORY, PIXEL, PIXELS, TRANSFORMED,
};
pub use random::{random_dag, random_network, randomize_cpts};
pub use sample::{sample_clamped, sample_discrete, sample_telemetry, Sampler};
pub use scenario::{config_from_pairs, random_configs, replay, translate, Scenario, REPLAY_ROWS};
pub use schedule::{Dwell, SweepSchedule};
