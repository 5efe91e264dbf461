//! Beam-aware handover simulation.
//!
//! A multi-cell deployment where every base station has wide access beams
//! and narrow link beams. Two handover policies are provided: the classic
//! access-beam rule with hysteresis and time-to-trigger, and a centralised
//! contextual-bandit agent that learns which station gives the best
//! link-beam RSRP for a given access-beam measurement report.
//!
//! Module map:
//! - [`radio`]: geometry, beam patterns, path loss, RSRP and measurements
//! - [`mobility`]: training random walk and evaluation walk
//! - [`baseline`]: access-beam handover state machine
//! - [`cmab`]: Q-table, nearest-context lookup and the bandit agent
//! - [`harness`]: training, evaluation episodes, comparisons, CSV output
//! - [`scenario`]: scenario documents and the built-in environments

pub mod baseline;
pub mod cmab;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mobility;
pub mod radio;
pub mod scenario;
pub mod seed;

pub use baseline::{baseline_decide, BaselineConfig, TttState};
pub use cmab::{
    cmab_decide, quantize, AgentConfig, CmabAgent, Context, QTable, QuantizedContext, Trainer,
};
pub use error::{Error, Result};
pub use geometry::{Bounds, Point};
pub use harness::{
    compare, compare_policies, run_episode, run_episodes, train, BaselinePolicy, ComparisonResult,
    EpisodeMetrics, EpisodeRun, EvalConfig, GeniePolicy, HandoverPolicy, Histogram, RandomPolicy,
    TrainingConfig,
};
pub use mobility::{MobilityModel, MobilityVariant, UeState};
pub use radio::{beam_gain, BaseStation, Beam, BeamKind, Deployment, MeasurementReport, PropagationModel};
pub use scenario::{load_scenario, parse_scenario, resolve_scenario, scenario_source, ScenarioBundle};
