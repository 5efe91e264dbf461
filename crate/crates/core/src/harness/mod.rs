//! Training and evaluation campaigns.
//!
//! Training drives a random-walking UE through the deployment while the
//! bandit explores. Evaluation replays the semi-deterministic walk under a
//! handover policy and records the link-beam RSRP the UE actually receives.
//! Comparisons run the reference and candidate policies on identical
//! trajectories (same walk stream per episode), so the per-episode gain only
//! reflects the handover decisions.

mod metrics;
pub mod output;

pub use metrics::{ComparisonResult, EpisodeMetrics, Histogram};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{baseline_decide, BaselineConfig, TttState};
use crate::cmab::{AgentConfig, CmabAgent, QTable, TableMetadata, Trainer};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mobility::{MobilityModel, UeState};
use crate::radio::{argmax_first, Deployment, MeasurementReport};
use crate::seed::{stream, stream_rng, SimRng};

/// What a policy sees at each measurement period.
pub struct StepInput<'a> {
    pub deployment: &'a Deployment,
    pub report: &'a MeasurementReport,
    pub position: Point,
}

/// A handover decision rule consulted once per measurement report.
pub trait HandoverPolicy: Sync {
    fn label(&self) -> &str;

    /// Station that should serve the UE after this report.
    fn decide(&self, input: &StepInput<'_>, ttt: &mut TttState, rng: &mut SimRng) -> Result<usize>;
}

/// Access-beam handover with hysteresis and time-to-trigger.
#[derive(Debug, Clone, Copy)]
pub struct BaselinePolicy(pub BaselineConfig);

impl HandoverPolicy for BaselinePolicy {
    fn label(&self) -> &str {
        "baseline"
    }

    fn decide(&self, input: &StepInput<'_>, ttt: &mut TttState, _rng: &mut SimRng) -> Result<usize> {
        let (target, next) = baseline_decide(&self.0, input.report, *ttt, input.deployment.num_stations())?;
        *ttt = next;
        Ok(target)
    }
}

impl HandoverPolicy for CmabAgent {
    fn label(&self) -> &str {
        "cmab"
    }

    fn decide(&self, input: &StepInput<'_>, _ttt: &mut TttState, _rng: &mut SimRng) -> Result<usize> {
        CmabAgent::decide(self, input.report)
    }
}

/// Always serves from the station with the strongest link beam at the UE.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeniePolicy;

impl HandoverPolicy for GeniePolicy {
    fn label(&self) -> &str {
        "genie"
    }

    fn decide(&self, input: &StepInput<'_>, _ttt: &mut TttState, _rng: &mut SimRng) -> Result<usize> {
        Ok(input.deployment.best_link_station(&input.position))
    }
}

/// Hands over to a uniformly random station at every report.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl HandoverPolicy for RandomPolicy {
    fn label(&self) -> &str {
        "random"
    }

    fn decide(&self, input: &StepInput<'_>, _ttt: &mut TttState, rng: &mut SimRng) -> Result<usize> {
        Ok(rng.random_range(0..input.deployment.num_stations()))
    }
}

/// Offline training parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub agent: AgentConfig,
    pub mobility: MobilityModel,
    /// Independent UEs sharing the step budget.
    #[serde(default = "one")]
    pub ues: usize,
}

fn one() -> usize {
    1
}

/// Evaluation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub mobility: MobilityModel,
    pub episodes: usize,
    pub episode_steps: usize,
    pub histogram_bin_db: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mobility: MobilityModel::semi_deterministic(1.0),
            episodes: 10,
            episode_steps: 10_000,
            histogram_bin_db: 0.5,
        }
    }
}

/// Build a Q-table by ε-greedy exploration along random walks.
///
/// The `steps` budget is split evenly across `cfg.ues` independent UEs
/// (the first UEs take the remainder). UE `k` draws its walk and its
/// exploration from streams indexed by `k`.
pub fn train(deployment: &Deployment, cfg: &TrainingConfig, seed: u64, steps: u64) -> Result<QTable> {
    if steps == 0 {
        return Err(Error::InvalidConfig("training needs at least one step".into()));
    }
    if cfg.ues == 0 {
        return Err(Error::InvalidConfig("training needs at least one UE".into()));
    }
    cfg.mobility.check()?;
    let mut trainer = Trainer::new(cfg.agent, deployment.num_stations())?;
    trainer.table.metadata = TableMetadata {
        scenario_hash: deployment.fingerprint(),
        training_seed: seed,
    };
    let ues = cfg.ues as u64;
    for k in 0..ues {
        let budget = steps / ues + u64::from(k < steps % ues);
        let mut walk = stream_rng(seed, stream::TRAINING_WALK, k);
        let mut explore = stream_rng(seed, stream::AGENT_EXPLORATION, k);
        let start = cfg.mobility.initial_position(&deployment.bounds, &mut walk);
        let serving = initial_serving(deployment, &start);
        let mut ue = UeState::new(start, serving, k);
        for _ in 0..budget {
            trainer.explore_step(deployment, &mut ue, &mut explore)?;
            ue.position = cfg.mobility.step(ue.position, &deployment.bounds, &mut walk);
        }
    }
    log::debug!(
        "trained {} contexts / {} records over {steps} steps",
        trainer.table.len(),
        trainer.table.num_records()
    );
    Ok(trainer.into_table())
}

/// Station a UE attaches to when it appears at `pos`.
pub fn initial_serving(deployment: &Deployment, pos: &Point) -> usize {
    let access: Vec<f64> = (0..deployment.num_stations())
        .map(|bs| deployment.best_access_rsrp(bs, pos))
        .collect();
    argmax_first(&access)
}

/// One row of an episode trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub position: Point,
    pub serving_bs: usize,
    pub p_l_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRun {
    pub metrics: EpisodeMetrics,
    pub trace: Option<Vec<TraceRow>>,
}

/// Trajectory of episode `episode` under run seed `seed`; independent of
/// any policy.
pub fn episode_walk(deployment: &Deployment, eval: &EvalConfig, seed: u64, episode: usize) -> Vec<Point> {
    let mut rng = stream_rng(seed, stream::EVAL_WALK, episode as u64);
    let mut pos = eval.mobility.initial_position(&deployment.bounds, &mut rng);
    let mut out = Vec::with_capacity(eval.episode_steps);
    for _ in 0..eval.episode_steps {
        out.push(pos);
        pos = eval.mobility.step(pos, &deployment.bounds, &mut rng);
    }
    out
}

/// Run one evaluation episode.
///
/// Each step: measure, ask the policy, hand over if it picked another
/// station, then record the serving station's best link-beam RSRP.
pub fn run_episode(
    deployment: &Deployment,
    policy: &dyn HandoverPolicy,
    eval: &EvalConfig,
    seed: u64,
    episode: usize,
    keep_trace: bool,
) -> Result<EpisodeRun> {
    eval.mobility.check()?;
    let mut walk = stream_rng(seed, stream::EVAL_WALK, episode as u64);
    let mut policy_rng = stream_rng(seed, stream::POLICY, episode as u64);
    let mut pos = eval.mobility.initial_position(&deployment.bounds, &mut walk);
    let mut ue = UeState::new(pos, initial_serving(deployment, &pos), episode as u64);

    let mut hist = Histogram::new(deployment.noise_floor_dbm, 0.0, eval.histogram_bin_db);
    let mut sum = 0.0;
    let mut handovers = 0;
    let mut trace = keep_trace.then(|| Vec::with_capacity(eval.episode_steps));

    for step in 0..eval.episode_steps {
        ue.position = pos;
        let report = deployment.measure(&pos, ue.serving_bs)?;
        let input = StepInput {
            deployment,
            report: &report,
            position: pos,
        };
        let target = policy.decide(&input, &mut ue.ttt, &mut policy_rng)?;
        if target != ue.serving_bs {
            deployment.station(target)?;
            handovers += 1;
            ue.serving_bs = target;
        }
        let p_l = deployment.best_link_rsrp(ue.serving_bs, &pos);
        sum += p_l;
        hist.add(p_l);
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                step,
                position: pos,
                serving_bs: ue.serving_bs,
                p_l_dbm: p_l,
            });
        }
        pos = eval.mobility.step(pos, &deployment.bounds, &mut walk);
    }

    Ok(EpisodeRun {
        metrics: EpisodeMetrics {
            episode_index: episode,
            policy_label: policy.label().to_string(),
            steps: eval.episode_steps,
            mean_link_rsrp_dbm: sum / eval.episode_steps as f64,
            histogram: hist,
            handover_count: handovers,
        },
        trace,
    })
}

/// Run `eval.episodes` episodes of one policy in parallel on the current
/// rayon pool. Results come back in episode order.
pub fn run_episodes(
    deployment: &Deployment,
    policy: &dyn HandoverPolicy,
    eval: &EvalConfig,
    seed: u64,
    keep_trace: bool,
) -> Result<Vec<EpisodeRun>> {
    check_eval(eval)?;
    (0..eval.episodes)
        .into_par_iter()
        .map(|e| run_episode(deployment, policy, eval, seed, e, keep_trace))
        .collect()
}

fn check_eval(eval: &EvalConfig) -> Result<()> {
    if eval.episodes == 0 || eval.episode_steps == 0 {
        return Err(Error::InvalidConfig("need at least one episode of at least one step".into()));
    }
    Ok(())
}

/// Run `eval.episodes` paired episodes of two policies and compute the
/// per-episode gain of `candidate` over `reference`.
///
/// Episodes run in parallel on the current rayon pool; results are
/// collected in episode order.
pub fn compare_policies(
    deployment: &Deployment,
    reference: &dyn HandoverPolicy,
    candidate: &dyn HandoverPolicy,
    eval: &EvalConfig,
    seed: u64,
) -> Result<ComparisonResult> {
    check_eval(eval)?;
    let pairs: Vec<(EpisodeMetrics, EpisodeMetrics)> = (0..eval.episodes)
        .into_par_iter()
        .map(|e| {
            let r = run_episode(deployment, reference, eval, seed, e, false)?;
            let c = run_episode(deployment, candidate, eval, seed, e, false)?;
            Ok((r.metrics, c.metrics))
        })
        .collect::<Result<_>>()?;
    let (reference, candidate) = pairs.into_iter().unzip();
    Ok(ComparisonResult::new(reference, candidate))
}

/// Bandit agent against the access-beam baseline.
pub fn compare(
    deployment: &Deployment,
    agent: &CmabAgent,
    baseline: &BaselineConfig,
    eval: &EvalConfig,
    seed: u64,
) -> Result<ComparisonResult> {
    compare_policies(deployment, &BaselinePolicy(*baseline), agent, eval, seed)
}
