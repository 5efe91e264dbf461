//! Access-beam handover: the serving station hands the UE over once the
//! strongest neighbour beats the serving access RSRP by the hysteresis for
//! the time-to-trigger.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::MeasurementReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Hysteresis in dB.
    pub hysteresis_db: f64,
    /// Time-to-trigger in measurement periods.
    pub ttt_steps: u32,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            hysteresis_db: 0.0,
            ttt_steps: 0,
        }
    }
}

impl BaselineConfig {
    pub fn new(hysteresis_db: f64, ttt_steps: u32) -> Result<Self> {
        if !(hysteresis_db >= 0.0 && hysteresis_db.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "hysteresis_db must be >= 0, got {hysteresis_db}"
            )));
        }
        Ok(Self {
            hysteresis_db,
            ttt_steps,
        })
    }
}

/// Time-to-trigger timer. `running == false` implies `elapsed_steps == 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TttState {
    pub running: bool,
    pub elapsed_steps: u32,
    pub candidate: usize,
}

impl TttState {
    fn reset() -> Self {
        Self::default()
    }
}

/// One step of the access-beam handover state machine.
///
/// Returns the station the UE should be served by after this report and the
/// updated timer. A neighbour exactly `hysteresis_db` above the serving
/// station counts as satisfying the entry condition. The timer restarts when
/// the strongest neighbour changes identity.
pub fn baseline_decide(
    cfg: &BaselineConfig,
    report: &MeasurementReport,
    ttt: TttState,
    num_stations: usize,
) -> Result<(usize, TttState)> {
    let rsrp = &report.access_rsrp_dbm;
    if rsrp.len() != num_stations {
        return Err(Error::ReportLength {
            expected: num_stations,
            got: rsrp.len(),
        });
    }
    let serving = report.serving_bs;
    if serving >= num_stations {
        return Err(Error::IndexOutOfRange {
            what: "serving station",
            index: serving,
            len: num_stations,
        });
    }

    let Some((best_nbr, best_rsrp)) = rsrp
        .iter()
        .copied()
        .enumerate()
        .filter(|&(i, _)| i != serving)
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        })
    else {
        return Ok((serving, TttState::reset()));
    };

    if best_rsrp < rsrp[serving] + cfg.hysteresis_db {
        return Ok((serving, TttState::reset()));
    }

    let mut timer = if ttt.running && ttt.candidate == best_nbr {
        ttt
    } else {
        TttState {
            running: false,
            elapsed_steps: 0,
            candidate: best_nbr,
        }
    };
    if timer.elapsed_steps < cfg.ttt_steps {
        timer.running = true;
        timer.elapsed_steps += 1;
        Ok((serving, timer))
    } else {
        Ok((best_nbr, TttState::reset()))
    }
}
