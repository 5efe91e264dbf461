//! Fixtures and oracles shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use beamho_core::cmab::{quantize, QuantizedContext};
use beamho_core::harness::episode_walk;
use beamho_core::mobility::MobilityVariant;
use beamho_core::seed::stream_rng;
use beamho_core::{
    baseline_decide, train, AgentConfig, BaseStation, BaselineConfig, Beam, BeamKind, Bounds, CmabAgent, Deployment,
    EvalConfig, MeasurementReport, MobilityModel, Point, PropagationModel, QTable, TrainingConfig, TttState,
};
use rand::Rng;

pub type Check = Result<String, String>;

fn station(id: usize, x: f64, y: f64, access: &[f64], link_offset: f64) -> BaseStation {
    BaseStation {
        id,
        position: Point::new(x, y),
        boresight_deg: access[0],
        tx_power_dbm: 30.0,
        access_beams: access.iter().map(|&a| Beam::new(BeamKind::Access, a, 65.0, 8.0)).collect(),
        link_beams: (0..8)
            .map(|k| Beam::new(BeamKind::Link, (link_offset + 45.0 * k as f64) % 360.0, 10.0, 24.0))
            .collect(),
    }
}

/// Lattice pitch and extent of the grid world.
pub const GRID_STEP_M: f64 = 10.0;
pub const GRID_BIN_DB: f64 = 1e-3;

/// Two stations, σ = 0, UE confined to a 5 × 5 lattice.
pub fn grid_world() -> Deployment {
    Deployment::new(
        vec![
            station(0, 0.0, 0.0, &[0.0, 120.0, 240.0], 0.0),
            station(1, 170.0, 95.0, &[30.0, 150.0, 270.0], 20.0),
        ],
        PropagationModel::log_distance(3.1, 43.3),
        Bounds::new(Point::new(40.0, 20.0), Point::new(80.0, 60.0)),
        -140.0,
    )
    .expect("grid world is well formed")
}

pub fn grid_points(d: &Deployment) -> Vec<Point> {
    let nx = (d.bounds.width() / GRID_STEP_M).round() as usize;
    let ny = (d.bounds.height() / GRID_STEP_M).round() as usize;
    let mut v = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            v.push(d.bounds.min.offset(i as f64 * GRID_STEP_M, j as f64 * GRID_STEP_M));
        }
    }
    v
}

pub fn grid_training() -> TrainingConfig {
    TrainingConfig {
        agent: AgentConfig {
            epsilon: 1.0,
            bin_width_db: GRID_BIN_DB,
            max_steps: 10_000,
        },
        mobility: MobilityModel::new(MobilityVariant::GridWalk, GRID_STEP_M).unwrap(),
        ues: 1,
    }
}

/// Greedy choice by exhaustive enumeration of the true rewards, with the
/// agent's tie-break (serving first, then lowest id).
pub fn enumerate_best(d: &Deployment, pos: &Point, serving: usize) -> usize {
    let rewards: Vec<f64> = (0..d.num_stations()).map(|a| d.best_link_rsrp(a, pos)).collect();
    let best = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if rewards[serving] == best {
        return serving;
    }
    rewards.iter().position(|&r| r == best).unwrap()
}

/// Trained means equal the deterministic rewards exactly and the greedy
/// decision equals exhaustive enumeration at every lattice point.
pub fn convergence_oracle(seed: u64) -> Check {
    let d = grid_world();
    let points = grid_points(&d);
    let n = d.num_stations();

    // every lattice point must map to its own context
    let mut position_of: BTreeMap<QuantizedContext, Point> = BTreeMap::new();
    for p in &points {
        for s in 0..n {
            let q = quantize(&d.measure(p, s).unwrap(), GRID_BIN_DB);
            if position_of.insert(q, *p).is_some() {
                return Err(format!("two lattice points share a context near {p:?}"));
            }
        }
    }

    let cfg = grid_training();
    let table = train(&d, &cfg, seed, cfg.agent.max_steps).map_err(|e| e.to_string())?;
    if table.len() != position_of.len() {
        return Err(format!("{} contexts stored, {} reachable", table.len(), position_of.len()));
    }
    for (ctx, actions) in table.iter() {
        let pos = position_of
            .get(ctx)
            .ok_or_else(|| format!("stored context {ctx:?} matches no lattice point"))?;
        if actions.len() != n {
            return Err(format!("context at {pos:?} has {} of {n} actions", actions.len()));
        }
        for (&a, stats) in actions {
            let exact = d.best_link_rsrp(a, pos);
            if stats.mean_reward != exact {
                return Err(format!("Q at {pos:?}, action {a}: {} != {exact}", stats.mean_reward));
            }
        }
    }

    let agent = CmabAgent::new(table);
    for p in &points {
        for s in 0..n {
            let got = agent.decide(&d.measure(p, s).unwrap()).map_err(|e| e.to_string())?;
            let want = enumerate_best(&d, p, s);
            if got != want {
                return Err(format!("at {p:?} serving {s}: agent {got}, enumeration {want}"));
            }
        }
    }
    Ok(format!("{} contexts x {n} actions exact", position_of.len()))
}

pub fn random_report<R: Rng>(rng: &mut R, n: usize) -> MeasurementReport {
    MeasurementReport {
        serving_bs: rng.random_range(0..n),
        access_rsrp_dbm: (0..n).map(|_| rng.random_range(-130.0..-50.0)).collect(),
    }
}

/// O(N) nearest-context scan: same serving partition if present, squared
/// distance on bin indices, lexicographic tie-break.
pub fn brute_nearest(table: &QTable, probe: &MeasurementReport) -> (QuantizedContext, u64) {
    let q = quantize(probe, table.bin_width_db());
    let same = table.iter().any(|(c, _)| c.serving_bs == q.serving_bs);
    let mut best: Option<(u64, QuantizedContext)> = None;
    for (c, _) in table.iter() {
        if same && c.serving_bs != q.serving_bs {
            continue;
        }
        let d: u64 = c
            .bins
            .iter()
            .zip(&q.bins)
            .map(|(a, b)| (i64::from(*a) - i64::from(*b)).pow(2) as u64)
            .sum();
        let better = match &best {
            None => true,
            Some((bd, bc)) => d < *bd || (d == *bd && c < bc),
        };
        if better {
            best = Some((d, c.clone()));
        }
    }
    let (d, c) = best.expect("non-empty table");
    (c, d)
}

/// Random table with small integer bins so that ties and shared
/// partitions are common.
pub fn random_table<R: Rng>(rng: &mut R, n: usize, entries: usize, w: f64) -> QTable {
    let mut t = QTable::new(n, w);
    for _ in 0..entries {
        let ctx = QuantizedContext {
            serving_bs: rng.random_range(0..n),
            bins: (0..n).map(|_| rng.random_range(-6..6)).collect(),
        };
        t.update(&ctx, rng.random_range(0..n), rng.random_range(-100.0..-50.0)).unwrap();
    }
    t
}

pub fn nearest_matches_scan(seed: u64, probes: usize) -> Check {
    let mut rng = stream_rng(seed, "nearest-oracle", 0);
    let mut checked = 0;
    for round in 0..10 {
        let n = 2 + round % 5;
        let w = [0.5, 1.0, 3.0][round % 3];
        let table = random_table(&mut rng, n, 50 + 40 * round, w);
        let agent = CmabAgent::new(table.clone());
        for _ in 0..probes / 10 {
            let mut probe = random_report(&mut rng, n);
            // keep probes near the populated bins
            for v in probe.access_rsrp_dbm.iter_mut() {
                *v = rng.random_range(-7.0..7.0) * w;
            }
            let (got, dist) = agent.nearest_context(&probe).map_err(|e| e.to_string())?;
            let (want, want_d) = brute_nearest(&table, &probe);
            let want_d = want_d as f64 * w * w;
            if *got != want || (dist - want_d).abs() > 1e-9 * want_d.max(1.0) {
                return Err(format!("probe {probe:?}: index {got:?} ({dist}), scan {want:?} ({want_d})"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} probes"))
}

/// Baseline with Δ = Γ = 0 against the plain access-RSRP argmax.
pub fn baseline_is_argmax(seed: u64, reports: usize) -> Check {
    let mut rng = stream_rng(seed, "baseline-oracle", 0);
    let cfg = BaselineConfig::new(0.0, 0).unwrap();
    for i in 0..reports {
        let n = 2 + i % 20;
        let r = random_report(&mut rng, n);
        let (target, _) = baseline_decide(&cfg, &r, TttState::default(), n).map_err(|e| e.to_string())?;
        if target != r.strongest() {
            return Err(format!("report {r:?}: baseline {target}, argmax {}", r.strongest()));
        }
    }
    Ok(format!("{reports} reports"))
}

/// Neighbour margins over the serving station, one per report, with
/// Δ = 2 dB: the entry condition holds at reports 1–3, breaks at 4 and
/// holds again from 5 on.
pub const TTT_MARGINS: [f64; 10] = [1.0, 2.0, 3.0, 2.5, 1.0, 4.0, 4.0, 4.0, 4.0, 4.0];

/// Report index of the first handover for each time-to-trigger, worked
/// out by hand: the (Γ+1)-th consecutive report meeting the condition
/// triggers.
pub const TTT_EXPECTED: [(u32, Option<usize>); 5] = [(0, Some(1)), (1, Some(2)), (2, Some(3)), (3, Some(8)), (5, None)];

pub fn first_handover(ttt_steps: u32) -> Result<Option<usize>, String> {
    let cfg = BaselineConfig::new(2.0, ttt_steps).unwrap();
    let mut ttt = TttState::default();
    for (k, m) in TTT_MARGINS.iter().enumerate() {
        let report = MeasurementReport {
            serving_bs: 0,
            access_rsrp_dbm: vec![-80.0, -80.0 + m],
        };
        let (t, next) = baseline_decide(&cfg, &report, ttt, 2).map_err(|e| e.to_string())?;
        if t != 0 {
            return Ok(Some(k));
        }
        ttt = next;
    }
    Ok(None)
}

pub fn ttt_tables() -> Check {
    for (g, want) in TTT_EXPECTED {
        let got = first_handover(g)?;
        if got != want {
            return Err(format!("Γ={g}: handover at {got:?}, expected {want:?}"));
        }
    }
    Ok(format!("{} time-to-trigger settings", TTT_EXPECTED.len()))
}

/// A table whose greedy choice reproduces the Δ = Γ = 0 baseline on the
/// episodes of `eval`: every report the baseline sees is stored with a
/// tiny bin width, the baseline's target scored highest.
pub fn mimic_baseline_table(d: &Deployment, eval: &EvalConfig, seed: u64) -> QTable {
    let w = 1e-6;
    let n = d.num_stations();
    let mut t = QTable::new(n, w);
    let cfg = BaselineConfig::new(0.0, 0).unwrap();
    for e in 0..eval.episodes {
        let walk = episode_walk(d, eval, seed, e);
        let mut serving = beamho_core::harness::initial_serving(d, &walk[0]);
        let mut ttt = TttState::default();
        for p in &walk {
            let r = d.measure(p, serving).unwrap();
            let (target, next) = baseline_decide(&cfg, &r, ttt, n).unwrap();
            ttt = next;
            let q = quantize(&r, w);
            for a in 0..n {
                t.update(&q, a, if a == target { 0.0 } else { -1.0 }).unwrap();
            }
            serving = target;
        }
    }
    t
}
