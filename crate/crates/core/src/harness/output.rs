//! CSV result tables. Floats are written with 6 significant digits.

use std::fs::File;
use std::path::Path;

use super::{ComparisonResult, EpisodeMetrics, Histogram, TraceRow};
use crate::error::{Error, Result};

/// Format like C's `%.6g`.
pub fn fmt_g6(x: f64) -> String {
    const PRECISION: i32 = 6;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PRECISION {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

/// `step,x,y,policy,serving_bs,p_l_dbm`
pub fn write_trace(path: &Path, policy: &str, rows: &[TraceRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "x", "y", "policy", "serving_bs", "p_l_dbm"])?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            fmt_g6(r.position.x),
            fmt_g6(r.position.y),
            policy.to_string(),
            r.serving_bs.to_string(),
            fmt_g6(r.p_l_dbm),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `episode,policy,mean_pl_dbm,handovers`
pub fn write_episodes<'a>(path: &Path, episodes: impl IntoIterator<Item = &'a EpisodeMetrics>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["episode", "policy", "mean_pl_dbm", "handovers"])?;
    for e in episodes {
        w.write_record([
            e.episode_index.to_string(),
            e.policy_label.clone(),
            fmt_g6(e.mean_link_rsrp_dbm),
            e.handover_count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `episode,gain_db`
pub fn write_gains(path: &Path, result: &ComparisonResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["episode", "gain_db"])?;
    for (i, g) in result.gains_db.iter().enumerate() {
        w.write_record([i.to_string(), fmt_g6(*g)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `bin_left_dbm,count,policy`, one block per policy. Empty bins are kept
/// so every policy lists the same bin edges.
pub fn write_histograms<'a>(path: &Path, hists: impl IntoIterator<Item = (&'a str, &'a Histogram)>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bin_left_dbm", "count", "policy"])?;
    for (policy, h) in hists {
        for (i, c) in h.counts.iter().enumerate() {
            w.write_record([fmt_g6(h.bin_left(i)), c.to_string(), policy.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
