use serde::{Deserialize, Serialize};

/// Fixed-width histogram over `[lo_dbm, hi_dbm)`; out-of-range samples are
/// counted in the first or last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo_dbm: f64,
    pub bin_width_db: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo_dbm: f64, hi_dbm: f64, bin_width_db: f64) -> Self {
        let bins = ((hi_dbm - lo_dbm) / bin_width_db).ceil().max(1.0) as usize;
        Self {
            lo_dbm,
            bin_width_db,
            counts: vec![0; bins],
        }
    }

    pub fn bin_of(&self, v: f64) -> usize {
        let raw = ((v - self.lo_dbm) / self.bin_width_db).floor();
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.counts.len() - 1)
        }
    }

    pub fn add(&mut self, v: f64) {
        let b = self.bin_of(v);
        self.counts[b] += 1;
    }

    pub fn bin_left(&self, bin: usize) -> f64 {
        self.lo_dbm + bin as f64 * self.bin_width_db
    }

    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Mean estimated from bin centres.
    pub fn mean(&self) -> f64 {
        let total = self.mass();
        if total == 0 {
            return f64::NAN;
        }
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * (self.bin_left(i) + 0.5 * self.bin_width_db))
            .sum::<f64>()
            / total as f64
    }

    /// Normalised density per dB.
    pub fn density(&self) -> Vec<f64> {
        let total = self.mass() as f64;
        self.counts
            .iter()
            .map(|&c| c as f64 / (total * self.bin_width_db))
            .collect()
    }

    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.counts.len(), other.counts.len(), "histogram layouts differ");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

/// Link-beam statistics of one evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode_index: usize,
    pub policy_label: String,
    pub steps: usize,
    /// Average link-beam RSRP over the episode, in dBm.
    pub mean_link_rsrp_dbm: f64,
    pub histogram: Histogram,
    pub handover_count: u64,
}

/// Paired episodes of a reference and a candidate policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub reference: Vec<EpisodeMetrics>,
    pub candidate: Vec<EpisodeMetrics>,
    /// Per-episode gain `E(P_l)_candidate - E(P_l)_reference` in dB.
    pub gains_db: Vec<f64>,
}

impl ComparisonResult {
    /// Pair up episodes by position; gains are `candidate - reference`.
    pub fn new(reference: Vec<EpisodeMetrics>, candidate: Vec<EpisodeMetrics>) -> Self {
        assert_eq!(reference.len(), candidate.len(), "unpaired episodes");
        let gains_db = reference
            .iter()
            .zip(&candidate)
            .map(|(r, c)| c.mean_link_rsrp_dbm - r.mean_link_rsrp_dbm)
            .collect();
        Self {
            reference,
            candidate,
            gains_db,
        }
    }

    pub fn mean_gain(&self) -> f64 {
        self.gains_db.iter().sum::<f64>() / self.gains_db.len() as f64
    }

    pub fn min_gain(&self) -> f64 {
        self.gains_db.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_gain(&self) -> f64 {
        self.gains_db.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Distribution of the per-episode gains.
    pub fn gain_histogram(&self, bin_width_db: f64) -> Histogram {
        let lo = (self.min_gain() / bin_width_db).floor() * bin_width_db;
        let hi = (self.max_gain() / bin_width_db).floor() * bin_width_db + bin_width_db;
        let mut h = Histogram::new(lo, hi, bin_width_db);
        for g in &self.gains_db {
            h.add(*g);
        }
        h
    }

    /// Link-RSRP histogram pooled over all episodes of one side.
    pub fn pooled_histogram(episodes: &[EpisodeMetrics]) -> Option<Histogram> {
        let mut it = episodes.iter();
        let mut h = it.next()?.histogram.clone();
        for e in it {
            h.merge(&e.histogram);
        }
        Some(h)
    }
}
