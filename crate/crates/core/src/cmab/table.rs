use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::QuantizedContext;
use crate::error::{Error, Result};

pub const QTABLE_SCHEMA_VERSION: u32 = 1;

/// Running average of the rewards seen for one (context, action) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub mean_reward: f64,
    pub visit_count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub scenario_hash: String,
    pub training_seed: u64,
}

/// Quantised context → per-action running-average reward.
///
/// Only visited pairs are stored, so every record has `visit_count >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_actions: usize,
    bin_width_db: f64,
    pub metadata: TableMetadata,
    entries: BTreeMap<QuantizedContext, BTreeMap<usize, ActionStats>>,
}

impl QTable {
    pub fn new(num_actions: usize, bin_width_db: f64) -> Self {
        Self {
            num_actions,
            bin_width_db,
            metadata: TableMetadata::default(),
            entries: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: TableMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn bin_width_db(&self) -> f64 {
        self.bin_width_db
    }

    /// Number of stored contexts.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of stored (context, action) records.
    pub fn num_records(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn total_visits(&self) -> u64 {
        self.entries
            .values()
            .flat_map(|a| a.values())
            .map(|s| s.visit_count)
            .sum()
    }

    pub fn actions(&self, ctx: &QuantizedContext) -> Option<&BTreeMap<usize, ActionStats>> {
        self.entries.get(ctx)
    }

    pub fn get(&self, ctx: &QuantizedContext, action: usize) -> Option<&ActionStats> {
        self.entries.get(ctx).and_then(|a| a.get(&action))
    }

    /// Contexts in ascending `(serving_bs, bins)` order with their actions.
    pub fn iter(&self) -> impl Iterator<Item = (&QuantizedContext, &BTreeMap<usize, ActionStats>)> {
        self.entries.iter()
    }

    /// Fold reward `r` into the running mean of `(ctx, action)`.
    pub fn update(&mut self, ctx: &QuantizedContext, action: usize, reward: f64) -> Result<()> {
        if action >= self.num_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: action,
                len: self.num_actions,
            });
        }
        if ctx.bins.len() != self.num_actions {
            return Err(Error::ReportLength {
                expected: self.num_actions,
                got: ctx.bins.len(),
            });
        }
        let actions = match self.entries.get_mut(ctx) {
            Some(a) => a,
            None => self.entries.entry(ctx.clone()).or_default(),
        };
        actions
            .entry(action)
            .and_modify(|s| {
                s.visit_count += 1;
                s.mean_reward += (reward - s.mean_reward) / s.visit_count as f64;
            })
            .or_insert(ActionStats {
                mean_reward: reward,
                visit_count: 1,
            });
        Ok(())
    }

    /// Add `delta` to every stored mean.
    pub fn shift_rewards(&mut self, delta: f64) {
        for stats in self.entries.values_mut().flat_map(|a| a.values_mut()) {
            stats.mean_reward += delta;
        }
    }

    /// Serialise to the on-disk JSON form. Entries are sorted, so equal
    /// tables produce identical bytes.
    pub fn to_json(&self) -> Result<String> {
        let doc = QTableFile {
            schema_version: QTABLE_SCHEMA_VERSION,
            scenario_hash: self.metadata.scenario_hash.clone(),
            training_seed: self.metadata.training_seed,
            bin_width_db: self.bin_width_db,
            num_actions: self.num_actions,
            entries: self
                .entries
                .iter()
                .map(|(ctx, actions)| EntryRecord {
                    serving: ctx.serving_bs,
                    bins: ctx.bins.clone(),
                    actions: actions
                        .iter()
                        .map(|(&bs, s)| ActionRecord {
                            bs,
                            mean: s.mean_reward,
                            count: s.visit_count,
                        })
                        .collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let version: VersionProbe = serde_json::from_str(text)?;
        if version.schema_version != QTABLE_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: version.schema_version,
                supported: QTABLE_SCHEMA_VERSION,
            });
        }
        let doc: QTableFile = serde_json::from_str(text)?;
        if !(doc.bin_width_db > 0.0) {
            return Err(Error::InvalidConfig("Q-table bin_width_db must be > 0".into()));
        }
        let mut entries = BTreeMap::new();
        for e in doc.entries {
            if e.bins.len() != doc.num_actions || e.serving >= doc.num_actions {
                return Err(Error::InvalidConfig(format!(
                    "Q-table entry does not match num_actions {}",
                    doc.num_actions
                )));
            }
            let mut actions = BTreeMap::new();
            for a in e.actions {
                if a.bs >= doc.num_actions || a.count == 0 {
                    return Err(Error::InvalidConfig(format!(
                        "Q-table action record bs={} count={} is invalid",
                        a.bs, a.count
                    )));
                }
                actions.insert(
                    a.bs,
                    ActionStats {
                        mean_reward: a.mean,
                        visit_count: a.count,
                    },
                );
            }
            let key = QuantizedContext {
                serving_bs: e.serving,
                bins: e.bins,
            };
            if actions.is_empty() || entries.insert(key, actions).is_some() {
                return Err(Error::InvalidConfig("Q-table has an empty or duplicate context".into()));
            }
        }
        Ok(Self {
            num_actions: doc.num_actions,
            bin_width_db: doc.bin_width_db,
            metadata: TableMetadata {
                scenario_hash: doc.scenario_hash,
                training_seed: doc.training_seed,
            },
            entries,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = self.to_json()?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Load a table and check it against the current scenario.
    ///
    /// A scenario hash mismatch is an error when `strict`, otherwise a
    /// warning is logged and reported through the returned flag.
    pub fn load(path: impl AsRef<Path>, expected_hash: Option<&str>, strict: bool) -> Result<(Self, bool)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let table = Self::from_json(&text)?;
        let mismatch = match expected_hash {
            Some(h) if h != table.metadata.scenario_hash => {
                if strict {
                    return Err(Error::ScenarioHashMismatch {
                        expected: h.to_string(),
                        found: table.metadata.scenario_hash,
                    });
                }
                log::warn!(
                    "{}: trained on scenario {}, current scenario is {h}",
                    path.display(),
                    table.metadata.scenario_hash
                );
                true
            }
            _ => false,
        };
        Ok((table, mismatch))
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

#[derive(Serialize, Deserialize)]
struct QTableFile {
    schema_version: u32,
    scenario_hash: String,
    training_seed: u64,
    bin_width_db: f64,
    num_actions: usize,
    entries: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    serving: usize,
    bins: Vec<i32>,
    actions: Vec<ActionRecord>,
}

#[derive(Serialize, Deserialize)]
struct ActionRecord {
    bs: usize,
    mean: f64,
    count: u64,
}
