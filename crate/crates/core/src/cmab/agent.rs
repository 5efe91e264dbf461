use std::collections::BTreeMap;

use rand::Rng;

use super::{quantize, ActionStats, AgentConfig, Context, ContextIndex, QTable, QuantizedContext};
use crate::error::{Error, Result};
use crate::mobility::UeState;
use crate::radio::{Deployment, MeasurementReport};

/// Action with the highest mean reward; ties go to `serving`, then to the
/// lowest station id. Returns `None` for an empty action set.
pub fn greedy_action(actions: &BTreeMap<usize, ActionStats>, serving: usize) -> Option<usize> {
    let best = actions
        .values()
        .map(|s| s.mean_reward)
        .fold(f64::NEG_INFINITY, f64::max);
    if actions.get(&serving).is_some_and(|s| s.mean_reward == best) {
        return Some(serving);
    }
    actions
        .iter()
        .find(|(_, s)| s.mean_reward == best)
        .map(|(&a, _)| a)
}

/// ε-greedy learner that owns the table during the offline phase.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub config: AgentConfig,
    pub table: QTable,
}

impl Trainer {
    pub fn new(config: AgentConfig, num_actions: usize) -> Result<Self> {
        config.check()?;
        Ok(Self {
            config,
            table: QTable::new(num_actions, config.bin_width_db),
        })
    }

    /// One exploration step for a UE: measure, act, observe the link-beam
    /// reward of the chosen station, record it and hand the UE over.
    pub fn explore_step<R: Rng + ?Sized>(
        &mut self,
        deployment: &Deployment,
        ue: &mut UeState,
        rng: &mut R,
    ) -> Result<(usize, f64)> {
        let report = deployment.measure(&ue.position, ue.serving_bs)?;
        let state = quantize(&report, self.config.bin_width_db);
        let n = deployment.num_stations();
        let g: f64 = rng.random();
        let action = if g < self.config.epsilon {
            rng.random_range(0..n)
        } else {
            match self
                .table
                .actions(&state)
                .and_then(|a| greedy_action(a, ue.serving_bs))
            {
                Some(a) => a,
                // unseen state: nothing to exploit yet
                None => rng.random_range(0..n),
            }
        };
        let reward = deployment.best_link_rsrp(action, &ue.position);
        self.table.update(&state, action, reward)?;
        ue.serving_bs = action;
        Ok((action, reward))
    }

    pub fn into_table(self) -> QTable {
        self.table
    }
}

/// Frozen table plus its nearest-context index, used in the active phase.
#[derive(Debug, Clone)]
pub struct CmabAgent {
    table: QTable,
    index: ContextIndex,
}

impl CmabAgent {
    pub fn new(table: QTable) -> Self {
        let index = ContextIndex::build(&table);
        Self { table, index }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    /// Stored context closest to `probe` (after quantisation) and the
    /// squared distance between their bin-centre vectors in dB².
    pub fn nearest_context(&self, probe: &Context) -> Result<(&QuantizedContext, f64)> {
        let q = quantize(probe, self.table.bin_width_db());
        let w = self.table.bin_width_db();
        self.index
            .nearest(&q)
            .map(|(k, d)| (k, d as f64 * w * w))
            .ok_or(Error::UntrainedAgent)
    }

    /// Greedy handover target for a measurement report.
    pub fn decide(&self, report: &MeasurementReport) -> Result<usize> {
        if self.table.is_empty() {
            return Err(Error::UntrainedAgent);
        }
        let n = self.table.num_actions();
        if report.access_rsrp_dbm.len() != n {
            return Err(Error::ReportLength {
                expected: n,
                got: report.access_rsrp_dbm.len(),
            });
        }
        let (ctx, _) = self.nearest_context(report)?;
        let actions = self.table.actions(ctx).ok_or(Error::EmptyContext)?;
        greedy_action(actions, report.serving_bs).ok_or(Error::EmptyContext)
    }
}

/// Greedy decision of `agent` for `report`.
pub fn cmab_decide(agent: &CmabAgent, report: &MeasurementReport) -> Result<usize> {
    agent.decide(report)
}
