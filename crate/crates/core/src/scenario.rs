//! Scenario documents and the shipped environments.
//!
//! A scenario file is a JSON document (`"schema_version": 1`) describing the
//! deployment, the training and evaluation set-up and the baseline
//! parameters. Deployments are given either as an explicit station list or
//! as a hexagonal site layout that is expanded at load time. Parameters not
//! taken from the reference results are tagged in the file's `provenance`
//! map.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineConfig;
use crate::error::{Error, Result};
use crate::geometry::{wrap_360, Bounds, Point};
use crate::harness::{EvalConfig, TrainingConfig};
use crate::radio::{BaseStation, Beam, BeamKind, Deployment, PropagationModel};
use crate::seed::{derive_seed, stream};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Names of the scenarios compiled into the crate.
pub const BUILTIN_SCENARIOS: [&str; 4] = ["env1", "env2", "env3", "fig4"];

/// Marker that `fig4` must define: the position where access and link
/// rankings disagree.
pub const FIG4_MARKER: &str = "x2";

fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "env1" => Some(include_str!("../../../scenarios/env1.json")),
        "env2" => Some(include_str!("../../../scenarios/env2.json")),
        "env3" => Some(include_str!("../../../scenarios/env3.json")),
        "fig4" => Some(include_str!("../../../scenarios/fig4.json")),
        _ => None,
    }
}

/// Beams spread evenly over `span_deg`, centred on the station boresight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPlan {
    pub count: usize,
    pub span_deg: f64,
    pub beamwidth_deg: f64,
    pub max_gain_dbi: f64,
}

impl BeamPlan {
    fn expand(&self, kind: BeamKind, boresight_deg: f64) -> Vec<Beam> {
        (0..self.count)
            .map(|k| {
                let offset = -self.span_deg / 2.0 + self.span_deg * (k as f64 + 0.5) / self.count as f64;
                Beam::new(kind, wrap_360(boresight_deg + offset), self.beamwidth_deg, self.max_gain_dbi)
            })
            .collect()
    }
}

/// Hexagonal sites (centre site plus an optional first ring), each carrying
/// one station per entry of `station_azimuths_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HexLayout {
    pub sites: usize,
    pub isd_m: f64,
    #[serde(default = "origin")]
    pub center: Point,
    pub station_azimuths_deg: Vec<f64>,
    /// Extra rotation of the link-beam grid per site, cycled over sites.
    #[serde(default)]
    pub site_link_rotation_deg: Vec<f64>,
    pub tx_power_dbm: f64,
    pub access: BeamPlan,
    pub link: BeamPlan,
}

fn origin() -> Point {
    Point::new(0.0, 0.0)
}

impl HexLayout {
    fn site_positions(&self) -> Result<Vec<Point>> {
        match self.sites {
            1 => Ok(vec![self.center]),
            7 => {
                let mut v = vec![self.center];
                for k in 0..6 {
                    let a = (30.0 + 60.0 * k as f64).to_radians();
                    v.push(self.center.offset(self.isd_m * a.cos(), self.isd_m * a.sin()));
                }
                Ok(v)
            }
            n => Err(Error::InvalidConfig(format!("hexagonal layout supports 1 or 7 sites, got {n}"))),
        }
    }

    fn expand(&self) -> Result<Vec<BaseStation>> {
        let mut out = Vec::new();
        for (s, pos) in self.site_positions()?.into_iter().enumerate() {
            let rot = if self.site_link_rotation_deg.is_empty() {
                0.0
            } else {
                self.site_link_rotation_deg[s % self.site_link_rotation_deg.len()]
            };
            for &az in &self.station_azimuths_deg {
                let boresight = wrap_360(az);
                out.push(BaseStation {
                    id: out.len(),
                    position: pos,
                    boresight_deg: boresight,
                    tx_power_dbm: self.tx_power_dbm,
                    access_beams: self.access.expand(BeamKind::Access, boresight),
                    link_beams: self.link.expand(BeamKind::Link, boresight + rot),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Layout {
    Explicit { stations: Vec<BaseStation> },
    Hexagonal(HexLayout),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentConfig {
    pub bounds: Bounds,
    pub noise_floor_dbm: f64,
    pub propagation: PropagationModel,
    pub layout: Layout,
}

/// Acceptance thresholds recorded alongside a scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpectedResults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_episode_gain_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_gain_range_db: Option<[f64; 2]>,
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Seed of the environment realisation (shadowing).
    pub seed: u64,
    pub deployment: DeploymentConfig,
    pub training: TrainingConfig,
    pub evaluation: EvalConfig,
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub markers: BTreeMap<String, Point>,
    #[serde(default)]
    pub expected: ExpectedResults,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioBundle {
    pub name: String,
    pub description: String,
    pub seed: u64,
    pub deployment: Deployment,
    pub training: TrainingConfig,
    pub evaluation: EvalConfig,
    pub baseline: BaselineConfig,
    pub markers: BTreeMap<String, Point>,
    pub expected: ExpectedResults,
    pub provenance: BTreeMap<String, String>,
}

impl ScenarioBundle {
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        if file.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: file.schema_version,
                supported: SCENARIO_SCHEMA_VERSION,
            });
        }
        let cfg = file.deployment;
        let stations = match cfg.layout {
            Layout::Explicit { stations } => stations,
            Layout::Hexagonal(hex) => hex.expand()?,
        };
        let mut propagation = cfg.propagation;
        propagation.shadowing_seed = derive_seed(file.seed, stream::SHADOWING, 0);
        let deployment = Deployment::new(stations, propagation, cfg.bounds, cfg.noise_floor_dbm)?;

        let issues = deployment.validate();
        if !issues.is_empty() {
            let shown: Vec<String> = issues.iter().take(5).map(ToString::to_string).collect();
            return Err(Error::InvalidConfig(format!(
                "scenario '{}' failed validation ({} issues): {}",
                file.name,
                issues.len(),
                shown.join("; ")
            )));
        }
        file.training.agent.check()?;
        file.training.mobility.check()?;
        file.evaluation.mobility.check()?;
        if file.training.ues == 0 || file.evaluation.episodes == 0 || file.evaluation.episode_steps == 0 {
            return Err(Error::InvalidConfig("ues, episodes and episode_steps must be >= 1".into()));
        }
        if !(file.evaluation.histogram_bin_db > 0.0) {
            return Err(Error::InvalidConfig("histogram_bin_db must be > 0".into()));
        }
        BaselineConfig::new(file.baseline.hysteresis_db, file.baseline.ttt_steps)?;
        for (name, p) in &file.markers {
            if !deployment.bounds.contains(p) {
                return Err(Error::InvalidConfig(format!("marker '{name}' lies outside the world")));
            }
        }

        let bundle = Self {
            name: file.name,
            description: file.description,
            seed: file.seed,
            deployment,
            training: file.training,
            evaluation: file.evaluation,
            baseline: file.baseline,
            markers: file.markers,
            expected: file.expected,
            provenance: file.provenance,
        };
        if bundle.name == "fig4" {
            bundle.check_fig4()?;
        }
        Ok(bundle)
    }

    /// At the `x2` marker the access layer prefers station 1 while the link
    /// layer prefers station 0.
    fn check_fig4(&self) -> Result<()> {
        let x2 = self.marker(FIG4_MARKER)?;
        let d = &self.deployment;
        let access_ok = d.best_access_rsrp(1, &x2) > d.best_access_rsrp(0, &x2);
        let link_ok = d.best_link_rsrp(0, &x2) > d.best_link_rsrp(1, &x2);
        if access_ok && link_ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "fig4: at x2 the access layer must favour station 1 (ok: {access_ok}) \
                 and the link layer station 0 (ok: {link_ok})"
            )))
        }
    }

    pub fn marker(&self, name: &str) -> Result<Point> {
        self.markers
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("scenario '{}' has no marker '{name}'", self.name)))
    }

    /// Pretty JSON of the resolved scenario.
    pub fn resolved_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioBundle> {
    let probe: serde_json::Value = serde_json::from_str(text)?;
    let version = probe.get("schema_version").and_then(serde_json::Value::as_u64);
    match version {
        Some(v) if v == u64::from(SCENARIO_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::SchemaVersion {
                found: v as u32,
                supported: SCENARIO_SCHEMA_VERSION,
            })
        }
        None => return Err(Error::InvalidConfig("scenario lacks schema_version".into())),
    }
    ScenarioBundle::from_file(serde_json::from_value(probe)?)
}

/// Load one of the built-in scenarios by name.
pub fn load_scenario(name: &str) -> Result<ScenarioBundle> {
    let text = builtin_source(name).ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    parse_scenario(text)
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioBundle> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

/// Built-in name, or a path to a scenario file.
pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioBundle> {
    parse_scenario(&scenario_source(name_or_path)?)
}

/// Raw text of a built-in scenario or of a scenario file.
pub fn scenario_source(name_or_path: &str) -> Result<String> {
    if let Some(text) = builtin_source(name_or_path) {
        return Ok(text.to_string());
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        fs::read_to_string(path).map_err(|e| Error::io(path, e))
    } else {
        Err(Error::UnknownScenario(name_or_path.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_plan_spreads_evenly() {
        let plan = BeamPlan {
            count: 8,
            span_deg: 120.0,
            beamwidth_deg: 10.0,
            max_gain_dbi: 24.0,
        };
        let az: Vec<f64> = plan.expand(BeamKind::Link, 30.0).iter().map(|b| b.azimuth_deg).collect();
        assert_eq!(az, vec![337.5, 352.5, 7.5, 22.5, 37.5, 52.5, 67.5, 82.5]);
        let plan = BeamPlan {
            count: 3,
            span_deg: 360.0,
            beamwidth_deg: 65.0,
            max_gain_dbi: 8.0,
        };
        let az: Vec<f64> = plan.expand(BeamKind::Access, 0.0).iter().map(|b| b.azimuth_deg).collect();
        assert_eq!(az, vec![240.0, 0.0, 120.0]);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(load_scenario("env9"), Err(Error::UnknownScenario(_))));
        assert!(matches!(resolve_scenario("no/such/file.json"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn schema_version_is_enforced() {
        let text = builtin_source("fig4").unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        assert!(matches!(parse_scenario(&text), Err(Error::SchemaVersion { found: 2, .. })));
    }
}
