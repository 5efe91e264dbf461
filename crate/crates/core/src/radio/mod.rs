//! Deployment geometry, beam patterns and RSRP computation.
//!
//! Every base station carries two beam layers: a few wide access beams used
//! for cell acquisition and handover measurements, and several narrow link
//! beams carrying user data. A UE measures the strongest access beam of every
//! station; the strongest link beam of its serving station is what it
//! actually gets to use.

mod propagation;

pub use propagation::{PathLossLaw, PropagationModel, MIN_DISTANCE_M};

use propagation::ShadowLattice;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_180, Bounds, Point};

/// Attenuation cap of the beam pattern, in dB below peak.
pub const FRONT_BACK_LIMIT_DB: f64 = 30.0;

/// Grid resolution used when sampling a deployment's coverage.
pub const COVERAGE_SAMPLES_PER_AXIS: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamKind {
    Access,
    Link,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub azimuth_deg: f64,
    pub beamwidth_deg: f64,
    pub max_gain_dbi: f64,
    pub kind: BeamKind,
}

impl Beam {
    pub fn new(kind: BeamKind, azimuth_deg: f64, beamwidth_deg: f64, max_gain_dbi: f64) -> Self {
        Self {
            azimuth_deg,
            beamwidth_deg,
            max_gain_dbi,
            kind,
        }
    }

    /// Gain towards a point seen from the station at azimuth `azimuth_deg`.
    #[inline]
    pub fn gain_towards(&self, azimuth_deg: f64) -> f64 {
        beam_gain(self, wrap_180(azimuth_deg - self.azimuth_deg))
    }
}

/// Parabolic-in-dB main lobe: `max_gain - min(12 (θ/θ3dB)², 30)`.
///
/// Half the 3 dB beamwidth off boresight gives exactly 3 dB below peak.
#[inline]
pub fn beam_gain(beam: &Beam, angle_off_boresight_deg: f64) -> f64 {
    let r = angle_off_boresight_deg / beam.beamwidth_deg;
    beam.max_gain_dbi - (12.0 * r * r).min(FRONT_BACK_LIMIT_DB)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: usize,
    pub position: Point,
    /// Nominal orientation of the station; beam azimuths are absolute.
    pub boresight_deg: f64,
    pub tx_power_dbm: f64,
    pub access_beams: Vec<Beam>,
    pub link_beams: Vec<Beam>,
}

impl BaseStation {
    pub fn beams(&self, kind: BeamKind) -> &[Beam] {
        match kind {
            BeamKind::Access => &self.access_beams,
            BeamKind::Link => &self.link_beams,
        }
    }
}

/// Per-step UE observation: the serving station and, for every station in
/// id order, its strongest access-beam RSRP at the UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub serving_bs: usize,
    pub access_rsrp_dbm: Vec<f64>,
}

impl MeasurementReport {
    pub fn serving_rsrp(&self) -> f64 {
        self.access_rsrp_dbm[self.serving_bs]
    }

    /// Strongest access RSRP over all stations; ties go to the lowest id.
    pub fn strongest(&self) -> usize {
        argmax_first(&self.access_rsrp_dbm)
    }
}

/// Index of the largest value, lowest index on ties. Panics on empty input.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Validation findings that do not prevent constructing a deployment but
/// make it unfit as a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    AccessNarrowerThanLink {
        bs: usize,
    },
    CoverageHole {
        position: Point,
    },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::AccessNarrowerThanLink { bs } => write!(
                f,
                "station {bs}: an access beam is narrower than one of its link beams"
            ),
            ValidationIssue::CoverageHole { position } => write!(
                f,
                "no access beam above the noise floor at ({}, {})",
                position.x, position.y
            ),
        }
    }
}

/// Immutable radio scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub stations: Vec<BaseStation>,
    pub propagation: PropagationModel,
    pub bounds: Bounds,
    pub noise_floor_dbm: f64,
    #[serde(skip)]
    shadow: ShadowLattice,
}

impl Deployment {
    /// Check structural invariants and build the deployment.
    pub fn new(
        stations: Vec<BaseStation>,
        propagation: PropagationModel,
        bounds: Bounds,
        noise_floor_dbm: f64,
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidConfig(m));
        if stations.len() < 2 {
            return invalid(format!("need at least 2 stations, got {}", stations.len()));
        }
        if !bounds.has_positive_area() {
            return invalid("world bounds must have positive area".into());
        }
        if !noise_floor_dbm.is_finite() {
            return invalid("noise_floor_dbm must be finite".into());
        }
        propagation.check().map_err(Error::InvalidConfig)?;
        for (idx, bs) in stations.iter().enumerate() {
            if bs.id != idx {
                return invalid(format!("station at index {idx} has id {}; ids must be 0..n in order", bs.id));
            }
            if bs.access_beams.is_empty() || bs.link_beams.is_empty() {
                return invalid(format!("station {idx} needs at least one access and one link beam"));
            }
            if !bs.tx_power_dbm.is_finite() {
                return invalid(format!("station {idx}: tx_power_dbm must be finite"));
            }
            for kind in [BeamKind::Access, BeamKind::Link] {
                for beam in bs.beams(kind) {
                    if beam.kind != kind {
                        return invalid(format!("station {idx}: beam kind does not match its layer"));
                    }
                    if !(0.0..360.0).contains(&beam.azimuth_deg) {
                        return invalid(format!(
                            "station {idx}: beam azimuth {} outside [0, 360)",
                            beam.azimuth_deg
                        ));
                    }
                    if !(beam.beamwidth_deg > 0.0 && beam.beamwidth_deg.is_finite()) {
                        return invalid(format!("station {idx}: beamwidth must be > 0"));
                    }
                    if !beam.max_gain_dbi.is_finite() {
                        return invalid(format!("station {idx}: max_gain_dbi must be finite"));
                    }
                }
            }
        }
        let shadow = ShadowLattice::build(&propagation, stations.len(), &bounds);
        Ok(Self {
            stations,
            propagation,
            bounds,
            noise_floor_dbm,
            shadow,
        })
    }

    /// Short content hash identifying this deployment, including its
    /// shadowing realisation.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let doc = serde_json::to_string(self).expect("deployment serialises");
        Sha256::digest(doc.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn num_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn station(&self, bs_id: usize) -> Result<&BaseStation> {
        self.stations.get(bs_id).ok_or(Error::IndexOutOfRange {
            what: "base station",
            index: bs_id,
            len: self.stations.len(),
        })
    }

    /// Scenario-level checks: beam width ordering and sampled coverage.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        for bs in &self.stations {
            let narrowest_access = bs
                .access_beams
                .iter()
                .map(|b| b.beamwidth_deg)
                .fold(f64::INFINITY, f64::min);
            let widest_link = bs
                .link_beams
                .iter()
                .map(|b| b.beamwidth_deg)
                .fold(0.0, f64::max);
            if narrowest_access < widest_link {
                issues.push(ValidationIssue::AccessNarrowerThanLink { bs: bs.id });
            }
        }
        let n = COVERAGE_SAMPLES_PER_AXIS;
        for i in 0..n {
            for j in 0..n {
                let pos = Point::new(
                    self.bounds.min.x + self.bounds.width() * i as f64 / (n - 1) as f64,
                    self.bounds.min.y + self.bounds.height() * j as f64 / (n - 1) as f64,
                );
                let covered = (0..self.num_stations())
                    .any(|bs| self.best_rsrp_unclamped(bs, BeamKind::Access, &pos) > self.noise_floor_dbm);
                if !covered {
                    issues.push(ValidationIssue::CoverageHole { position: pos });
                }
            }
        }
        issues
    }

    #[inline]
    fn best_rsrp_unclamped(&self, bs_id: usize, kind: BeamKind, pos: &Point) -> f64 {
        let bs = &self.stations[bs_id];
        let loss = self.propagation.loss_db_with(bs_id, &bs.position, pos, Some(&self.shadow));
        let az = bs.position.azimuth_to(pos);
        bs.beams(kind)
            .iter()
            .map(|b| bs.tx_power_dbm + b.gain_towards(az) - loss)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// RSRP of one beam at `pos`, clamped below at the noise floor.
    pub fn rsrp(&self, bs_id: usize, beam_index: usize, kind: BeamKind, pos: &Point) -> Result<f64> {
        let bs = self.station(bs_id)?;
        let beams = bs.beams(kind);
        let beam = beams.get(beam_index).ok_or(Error::IndexOutOfRange {
            what: match kind {
                BeamKind::Access => "access beam",
                BeamKind::Link => "link beam",
            },
            index: beam_index,
            len: beams.len(),
        })?;
        let loss = self.propagation.loss_db_with(bs_id, &bs.position, pos, Some(&self.shadow));
        let gain = beam.gain_towards(bs.position.azimuth_to(pos));
        Ok((bs.tx_power_dbm + gain - loss).max(self.noise_floor_dbm))
    }

    /// Strongest link-beam RSRP of `bs_id` at `pos`: the reward and the
    /// link power metric.
    #[inline]
    pub fn best_link_rsrp(&self, bs_id: usize, pos: &Point) -> f64 {
        self.best_rsrp_unclamped(bs_id, BeamKind::Link, pos)
            .max(self.noise_floor_dbm)
    }

    /// Strongest access-beam RSRP of `bs_id` at `pos`.
    #[inline]
    pub fn best_access_rsrp(&self, bs_id: usize, pos: &Point) -> f64 {
        self.best_rsrp_unclamped(bs_id, BeamKind::Access, pos)
            .max(self.noise_floor_dbm)
    }

    /// Measurement report of a UE at `pos` served by `serving`.
    pub fn measure(&self, pos: &Point, serving: usize) -> Result<MeasurementReport> {
        self.station(serving)?;
        Ok(MeasurementReport {
            serving_bs: serving,
            access_rsrp_dbm: (0..self.num_stations())
                .map(|bs| self.best_access_rsrp(bs, pos))
                .collect(),
        })
    }

    /// Station whose link layer is strongest at `pos`, lowest id on ties.
    pub fn best_link_station(&self, pos: &Point) -> usize {
        let links: Vec<f64> = (0..self.num_stations())
            .map(|bs| self.best_link_rsrp(bs, pos))
            .collect();
        argmax_first(&links)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam(kind: BeamKind, az: f64, bw: f64, gain: f64) -> Beam {
        Beam::new(kind, az, bw, gain)
    }

    fn station(id: usize, x: f64, y: f64, links: &[f64]) -> BaseStation {
        BaseStation {
            id,
            position: Point::new(x, y),
            boresight_deg: 0.0,
            tx_power_dbm: 30.0,
            access_beams: vec![
                beam(BeamKind::Access, 0.0, 65.0, 8.0),
                beam(BeamKind::Access, 120.0, 65.0, 8.0),
                beam(BeamKind::Access, 240.0, 65.0, 8.0),
            ],
            link_beams: links.iter().map(|&az| beam(BeamKind::Link, az, 10.0, 24.0)).collect(),
        }
    }

    fn two_station(prop: PropagationModel) -> Deployment {
        Deployment::new(
            vec![
                station(0, 0.0, 0.0, &[0.0, 45.0, 90.0, 135.0]),
                station(1, 300.0, 0.0, &[180.0]),
            ],
            prop,
            Bounds::new(Point::new(-100.0, -100.0), Point::new(400.0, 100.0)),
            -140.0,
        )
        .unwrap()
    }

    #[test]
    fn gain_at_boresight_half_beamwidth_and_back() {
        let b = beam(BeamKind::Link, 0.0, 10.0, 24.0);
        assert_eq!(beam_gain(&b, 0.0), 24.0);
        assert!((beam_gain(&b, 5.0) - 21.0).abs() < 1e-12);
        assert!((beam_gain(&b, -5.0) - 21.0).abs() < 1e-12);
        assert_eq!(beam_gain(&b, 180.0), 24.0 - 30.0);
        let direct = 24.0 - (12.0 * (180.0f64 / 10.0).powi(2)).min(30.0);
        assert_eq!(beam_gain(&b, 180.0), direct);
    }

    #[test]
    fn gain_is_monotone_in_offset() {
        let b = beam(BeamKind::Access, 0.0, 65.0, 8.0);
        let mut prev = f64::INFINITY;
        for k in 0..=1800 {
            let g = beam_gain(&b, k as f64 * 0.1);
            assert!(g <= prev);
            prev = g;
        }
    }

    #[test]
    fn rsrp_composes_identity_cases() {
        let d = two_station(PropagationModel::log_distance(3.1, 40.0));
        let at_1m = Point::new(1.0, 0.0);
        let r = d.rsrp(0, 0, BeamKind::Link, &at_1m).unwrap();
        assert_eq!(r, 30.0 + 24.0 - 40.0);
        let r = d.rsrp(0, 0, BeamKind::Access, &at_1m).unwrap();
        assert_eq!(r, 30.0 + 8.0 - 40.0);
    }

    #[test]
    fn memoised_shadowing_matches_direct_evaluation() {
        let prop = PropagationModel::urban_macro(3.5).with_shadowing(6.0, 7.0, 99);
        let mut d = two_station(prop.clone());
        for k in 0..200 {
            // includes points just outside the bounds
            let p = Point::new(-110.0 + 2.6 * k as f64, -105.0 + 1.05 * k as f64);
            for bs in 0..2 {
                let loss = prop.loss_db(bs, &d.stations[bs].position, &p);
                let az = d.stations[bs].position.azimuth_to(&p);
                let direct = d.stations[bs]
                    .access_beams
                    .iter()
                    .map(|b| 30.0 + b.gain_towards(az) - loss)
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(d.best_access_rsrp(bs, &p), direct.max(-140.0));
            }
        }
        // a model edited after construction must not read stale values
        d.propagation.shadowing_seed = 100;
        let p = Point::new(12.0, 34.0);
        let fresh = two_station(d.propagation.clone());
        assert_eq!(d.best_link_rsrp(0, &p), fresh.best_link_rsrp(0, &p));
    }

    #[test]
    fn rsrp_clamps_at_noise_floor() {
        let mut d = two_station(PropagationModel::log_distance(3.1, 40.0));
        d.noise_floor_dbm = -60.0;
        let far = Point::new(-100.0, 100.0);
        let raw = 30.0 + 8.0 - (40.0 + 31.0 * far.distance(&Point::new(300.0, 0.0)).log10());
        assert!(raw < -60.0);
        assert_eq!(d.best_access_rsrp(1, &far), -60.0);
    }

    #[test]
    fn rsrp_rejects_bad_indices() {
        let d = two_station(PropagationModel::log_distance(3.1, 40.0));
        let p = Point::new(10.0, 10.0);
        assert!(matches!(d.rsrp(2, 0, BeamKind::Link, &p), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(d.rsrp(1, 1, BeamKind::Link, &p), Err(Error::IndexOutOfRange { .. })));
        assert!(d.measure(&p, 5).is_err());
    }

    #[test]
    fn best_link_matches_brute_force() {
        let d = two_station(PropagationModel::log_distance(3.1, 40.0).with_shadowing(4.0, 5.0, 11));
        for k in 0..200 {
            let p = Point::new(-90.0 + 2.4 * k as f64, -80.0 + 0.8 * k as f64);
            for bs in 0..2 {
                let n = d.stations[bs].link_beams.len();
                let brute = (0..n)
                    .map(|j| d.rsrp(bs, j, BeamKind::Link, &p).unwrap())
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(d.best_link_rsrp(bs, &p), brute);
            }
            // single-beam station: equals its only beam
            assert_eq!(d.best_link_rsrp(1, &p), d.rsrp(1, 0, BeamKind::Link, &p).unwrap());
        }
    }

    #[test]
    fn adding_a_beam_never_lowers_best_link() {
        let d = two_station(PropagationModel::log_distance(3.1, 40.0));
        let mut more = d.clone();
        more.stations[1].link_beams.push(beam(BeamKind::Link, 90.0, 10.0, 24.0));
        for k in 0..100 {
            let p = Point::new(-100.0 + 5.0 * k as f64, 50.0 - k as f64);
            assert!(more.best_link_rsrp(1, &p) >= d.best_link_rsrp(1, &p));
        }
    }

    #[test]
    fn measure_shape_order_and_values() {
        let d = two_station(PropagationModel::log_distance(3.1, 40.0));
        let p = Point::new(100.0, 30.0);
        let a = d.measure(&p, 0).unwrap();
        let b = d.measure(&p, 1).unwrap();
        assert_eq!(a.access_rsrp_dbm.len(), 2);
        assert_eq!(a.access_rsrp_dbm, b.access_rsrp_dbm);
        assert_eq!((a.serving_bs, b.serving_bs), (0, 1));
        for bs in 0..2 {
            let brute = (0..3)
                .map(|j| d.rsrp(bs, j, BeamKind::Access, &p).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(a.access_rsrp_dbm[bs], brute);
        }
    }

    #[test]
    fn construction_rejects_broken_deployments() {
        let prop = PropagationModel::log_distance(3.1, 40.0);
        let b = Bounds::new(Point::new(0.0, 0.0), Point::new(10.0, 10.0));
        assert!(Deployment::new(vec![station(0, 0.0, 0.0, &[0.0])], prop.clone(), b, -140.0).is_err());
        let dup = vec![station(0, 0.0, 0.0, &[0.0]), station(0, 1.0, 0.0, &[0.0])];
        assert!(Deployment::new(dup, prop.clone(), b, -140.0).is_err());
        let mut bad = station(1, 1.0, 0.0, &[0.0]);
        bad.link_beams[0].azimuth_deg = 360.0;
        assert!(Deployment::new(vec![station(0, 0.0, 0.0, &[0.0]), bad], prop.clone(), b, -140.0).is_err());
        let mut empty = station(1, 1.0, 0.0, &[0.0]);
        empty.link_beams.clear();
        assert!(Deployment::new(vec![station(0, 0.0, 0.0, &[0.0]), empty], prop.clone(), b, -140.0).is_err());
        let flat = Bounds::new(Point::new(0.0, 0.0), Point::new(10.0, 0.0));
        let ok = vec![station(0, 0.0, 0.0, &[0.0]), station(1, 1.0, 0.0, &[0.0])];
        assert!(Deployment::new(ok, prop, flat, -140.0).is_err());
    }

    #[test]
    fn validate_flags_beamwidth_inversion_and_holes() {
        let mut d = two_station(PropagationModel::log_distance(3.1, 40.0));
        assert!(d.validate().is_empty());
        d.stations[0].link_beams[0].beamwidth_deg = 90.0;
        assert!(d.validate().contains(&ValidationIssue::AccessNarrowerThanLink { bs: 0 }));
        d.stations[0].link_beams[0].beamwidth_deg = 10.0;
        d.noise_floor_dbm = 0.0;
        assert!(d.validate().iter().any(|i| matches!(i, ValidationIssue::CoverageHole { .. })));
    }
}
