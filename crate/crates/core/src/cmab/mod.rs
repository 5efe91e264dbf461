//! Centralised contextual-bandit handover agent.
//!
//! The context is the UE's measurement report (serving station plus the
//! strongest access-beam RSRP of every station), each station is an arm, and
//! the reward of an arm is the best link-beam RSRP the UE sees after being
//! handed to that station. Training records running-average rewards per
//! quantised context and arm under ε-greedy exploration; the active phase
//! looks up the closest stored context and picks the arm with the highest
//! recorded average.

mod agent;
mod index;
mod table;

pub use agent::{cmab_decide, greedy_action, CmabAgent, Trainer};
pub use index::ContextIndex;
pub use table::{ActionStats, QTable, TableMetadata, QTABLE_SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::MeasurementReport;

/// Bandit context: a measurement report.
pub type Context = MeasurementReport;

/// Context with every RSRP entry replaced by its bin index.
///
/// Ordering is lexicographic on `(serving_bs, bins)`, which is also the
/// tie-break order of nearest-context lookups.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuantizedContext {
    pub serving_bs: usize,
    pub bins: Vec<i32>,
}

impl QuantizedContext {
    /// RSRP at the centre of each bin.
    pub fn centers(&self, bin_width_db: f64) -> Vec<f64> {
        self.bins
            .iter()
            .map(|&b| (f64::from(b) + 0.5) * bin_width_db)
            .collect()
    }
}

/// Map each RSRP entry to `floor(rsrp / bin_width_db)`.
pub fn quantize(ctx: &Context, bin_width_db: f64) -> QuantizedContext {
    debug_assert!(bin_width_db > 0.0);
    QuantizedContext {
        serving_bs: ctx.serving_bs,
        bins: ctx
            .access_rsrp_dbm
            .iter()
            .map(|&r| (r / bin_width_db).floor() as i32)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Probability of a uniformly random action.
    pub epsilon: f64,
    pub bin_width_db: f64,
    /// Training budget in steps.
    pub max_steps: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            bin_width_db: 1.0,
            max_steps: 1_000_000,
        }
    }
}

impl AgentConfig {
    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.bin_width_db > 0.0 && self.bin_width_db.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bin_width_db must be > 0, got {}",
                self.bin_width_db
            )));
        }
        Ok(())
    }
}
