//! Median path loss plus deterministic, spatially consistent shadowing.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::geometry::{Bounds, Point};
use crate::seed::mix64;

/// Distance below which path loss is evaluated at this reference distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Median path-loss law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum PathLossLaw {
    /// `ref_loss_db + 10 * exponent * log10(d)`.
    LogDistance { exponent: f64, ref_loss_db: f64 },
    /// `13.54 + 39.08 * log10(d) + 20 * log10(f_GHz)`, the NLOS urban-macro shape.
    UrbanMacro { carrier_ghz: f64 },
}

impl PathLossLaw {
    pub const UMA_INTERCEPT_DB: f64 = 13.54;
    pub const UMA_DISTANCE_COEF: f64 = 39.08;
    pub const UMA_FREQUENCY_COEF: f64 = 20.0;

    /// Median loss at distance `d` (already clamped to the reference distance).
    #[inline]
    pub fn median_db(&self, d: f64) -> f64 {
        match *self {
            PathLossLaw::LogDistance {
                exponent,
                ref_loss_db,
            } => ref_loss_db + 10.0 * exponent * d.log10(),
            PathLossLaw::UrbanMacro { carrier_ghz } => {
                Self::UMA_INTERCEPT_DB
                    + Self::UMA_DISTANCE_COEF * d.log10()
                    + Self::UMA_FREQUENCY_COEF * carrier_ghz.log10()
            }
        }
    }

    /// Effective distance exponent of the law.
    pub fn exponent(&self) -> f64 {
        match *self {
            PathLossLaw::LogDistance { exponent, .. } => exponent,
            PathLossLaw::UrbanMacro { .. } => Self::UMA_DISTANCE_COEF / 10.0,
        }
    }
}

/// Path loss model shared by every link in a deployment.
///
/// Shadowing is a lognormal field per base station. Standard-normal values
/// are drawn by hashing `(seed, bs, grid node)` on a square lattice with
/// spacing `shadowing_cell_m`, and interpolated bilinearly in between. The
/// interpolation weights are renormalised so the field keeps unit variance
/// everywhere. No field is stored: every query recomputes the same value
/// (a [`ShadowLattice`] may memoise the lattice values of one area).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationModel {
    #[serde(flatten)]
    pub law: PathLossLaw,
    #[serde(default)]
    pub shadowing_sigma_db: f64,
    #[serde(default = "default_shadowing_cell")]
    pub shadowing_cell_m: f64,
    #[serde(default)]
    pub shadowing_seed: u64,
}

fn default_shadowing_cell() -> f64 {
    5.0
}

impl PropagationModel {
    pub fn log_distance(exponent: f64, ref_loss_db: f64) -> Self {
        Self {
            law: PathLossLaw::LogDistance {
                exponent,
                ref_loss_db,
            },
            shadowing_sigma_db: 0.0,
            shadowing_cell_m: default_shadowing_cell(),
            shadowing_seed: 0,
        }
    }

    pub fn urban_macro(carrier_ghz: f64) -> Self {
        Self {
            law: PathLossLaw::UrbanMacro { carrier_ghz },
            shadowing_sigma_db: 0.0,
            shadowing_cell_m: default_shadowing_cell(),
            shadowing_seed: 0,
        }
    }

    pub fn with_shadowing(mut self, sigma_db: f64, cell_m: f64, seed: u64) -> Self {
        self.shadowing_sigma_db = sigma_db;
        self.shadowing_cell_m = cell_m;
        self.shadowing_seed = seed;
        self
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        match self.law {
            PathLossLaw::LogDistance {
                exponent,
                ref_loss_db,
            } => {
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return Err(format!("path-loss exponent must be > 0, got {exponent}"));
                }
                if !(ref_loss_db >= 0.0 && ref_loss_db.is_finite()) {
                    return Err(format!("ref_loss_db must be >= 0, got {ref_loss_db}"));
                }
            }
            PathLossLaw::UrbanMacro { carrier_ghz } => {
                if !(carrier_ghz > 0.0 && carrier_ghz.is_finite()) {
                    return Err(format!("carrier_ghz must be > 0, got {carrier_ghz}"));
                }
            }
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_sigma_db.is_finite()) {
            return Err(format!(
                "shadowing_sigma_db must be >= 0, got {}",
                self.shadowing_sigma_db
            ));
        }
        if !(self.shadowing_cell_m > 0.0 && self.shadowing_cell_m.is_finite()) {
            return Err(format!(
                "shadowing_cell_m must be > 0, got {}",
                self.shadowing_cell_m
            ));
        }
        Ok(())
    }

    /// Total loss in dB between a station at `from` (id `bs`) and `to`.
    #[inline]
    pub fn loss_db(&self, bs: usize, from: &Point, to: &Point) -> f64 {
        self.loss_db_with(bs, from, to, None)
    }

    #[inline]
    pub(crate) fn loss_db_with(&self, bs: usize, from: &Point, to: &Point, lattice: Option<&ShadowLattice>) -> f64 {
        let d = from.distance(to).max(MIN_DISTANCE_M);
        self.law.median_db(d) + self.shadow_db_with(bs, to, lattice)
    }

    /// Shadowing term in dB for station `bs` at `pos`; zero when disabled.
    pub fn shadow_db(&self, bs: usize, pos: &Point) -> f64 {
        self.shadow_db_with(bs, pos, None)
    }

    fn shadow_db_with(&self, bs: usize, pos: &Point, lattice: Option<&ShadowLattice>) -> f64 {
        if self.shadowing_sigma_db == 0.0 {
            return 0.0;
        }
        let fx = pos.x / self.shadowing_cell_m;
        let fy = pos.y / self.shadowing_cell_m;
        let (i0, j0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - i0, fy - j0);
        let (i0, j0) = (i0 as i64, j0 as i64);
        let corners = [
            ((1.0 - tx) * (1.0 - ty), i0, j0),
            (tx * (1.0 - ty), i0 + 1, j0),
            ((1.0 - tx) * ty, i0, j0 + 1),
            (tx * ty, i0 + 1, j0 + 1),
        ];
        let mut acc = 0.0;
        let mut norm = 0.0;
        for (w, i, j) in corners {
            if w == 0.0 {
                continue;
            }
            let z = lattice
                .and_then(|l| l.get(self, bs, i, j))
                .unwrap_or_else(|| self.node_normal(bs, i, j));
            acc += w * z;
            norm += w * w;
        }
        self.shadowing_sigma_db * acc / norm.sqrt()
    }

    /// Standard-normal draw attached to one lattice node.
    pub fn node_normal(&self, bs: usize, i: i64, j: i64) -> f64 {
        let mut h = mix64(self.shadowing_seed ^ mix64(bs as u64 + 1));
        h = mix64(h ^ i as u64);
        h = mix64(h ^ (j as u64).rotate_left(32));
        // 53 random bits, centred so the value is strictly inside (0, 1)
        let u = ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        standard_normal().inverse_cdf(u)
    }
}

/// Memoised lattice values of a shadowing field over a rectangle.
///
/// Purely a speed-up: lookups outside the tabulated nodes, or against a
/// model with a different seed or cell size, fall back to hashing.
#[derive(Clone, Default)]
pub(crate) struct ShadowLattice {
    seed: u64,
    cell_m: f64,
    stations: usize,
    i0: i64,
    j0: i64,
    ni: usize,
    nj: usize,
    values: Vec<f64>,
}

impl ShadowLattice {
    const MAX_NODES: usize = 1 << 22;

    pub(crate) fn build(model: &PropagationModel, stations: usize, bounds: &Bounds) -> Self {
        if model.shadowing_sigma_db == 0.0 {
            return Self::default();
        }
        let c = model.shadowing_cell_m;
        let (i0, j0) = ((bounds.min.x / c).floor() as i64, (bounds.min.y / c).floor() as i64);
        let (i1, j1) = ((bounds.max.x / c).floor() as i64 + 1, (bounds.max.y / c).floor() as i64 + 1);
        let (ni, nj) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
        if stations.saturating_mul(ni).saturating_mul(nj) > Self::MAX_NODES {
            return Self::default();
        }
        let mut values = Vec::with_capacity(stations * ni * nj);
        for bs in 0..stations {
            for i in i0..=i1 {
                for j in j0..=j1 {
                    values.push(model.node_normal(bs, i, j));
                }
            }
        }
        Self {
            seed: model.shadowing_seed,
            cell_m: c,
            stations,
            i0,
            j0,
            ni,
            nj,
            values,
        }
    }

    #[inline]
    fn get(&self, model: &PropagationModel, bs: usize, i: i64, j: i64) -> Option<f64> {
        if self.values.is_empty() || model.shadowing_seed != self.seed || model.shadowing_cell_m != self.cell_m {
            return None;
        }
        let (di, dj) = (i - self.i0, j - self.j0);
        if bs >= self.stations || di < 0 || dj < 0 || di as usize >= self.ni || dj as usize >= self.nj {
            return None;
        }
        Some(self.values[(bs * self.ni + di as usize) * self.nj + dj as usize])
    }
}

// The memo never changes any value, so it takes no part in comparisons.
impl PartialEq for ShadowLattice {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl std::fmt::Debug for ShadowLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ShadowLattice({} nodes)", self.values.len())
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}
