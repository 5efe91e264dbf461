//! UE trajectories.
//!
//! Training uses a reflecting random walk; evaluation uses the
//! semi-deterministic walk, where the UE climbs vertically at fixed x and is
//! dropped back at the bottom edge at a fresh random x once it leaves the top.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::TttState;
use crate::error::{Error, Result};
use crate::geometry::{Bounds, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobilityVariant {
    /// Fixed-length step in a uniformly random direction, reflecting off edges.
    RandomWalk,
    /// Vertical steps; relocation to a random x at the bottom edge after the top.
    SemiDeterministic,
    /// Random walk on the lattice `bounds.min + k * step_m`, one axis per step.
    GridWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityModel {
    pub variant: MobilityVariant,
    pub step_m: f64,
}

impl MobilityModel {
    pub fn new(variant: MobilityVariant, step_m: f64) -> Result<Self> {
        let m = Self { variant, step_m };
        m.check()?;
        Ok(m)
    }

    pub fn random_walk(step_m: f64) -> Self {
        Self {
            variant: MobilityVariant::RandomWalk,
            step_m,
        }
    }

    pub fn semi_deterministic(step_m: f64) -> Self {
        Self {
            variant: MobilityVariant::SemiDeterministic,
            step_m,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.step_m > 0.0 && self.step_m.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("mobility step_m must be > 0, got {}", self.step_m)))
        }
    }

    /// Advance one measurement period from `pos`.
    pub fn step<R: Rng + ?Sized>(&self, pos: Point, bounds: &Bounds, rng: &mut R) -> Point {
        debug_assert!(bounds.contains(&pos));
        match self.variant {
            MobilityVariant::RandomWalk => {
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let x = reflect(pos.x + self.step_m * theta.cos(), bounds.min.x, bounds.max.x);
                let y = reflect(pos.y + self.step_m * theta.sin(), bounds.min.y, bounds.max.y);
                Point::new(x, y)
            }
            MobilityVariant::SemiDeterministic => {
                let y = pos.y + self.step_m;
                if y > bounds.max.y {
                    Point::new(rng.random_range(bounds.min.x..=bounds.max.x), bounds.min.y)
                } else {
                    Point::new(pos.x, y)
                }
            }
            MobilityVariant::GridWalk => {
                let (dx, dy) = match rng.random_range(0..4u8) {
                    0 => (self.step_m, 0.0),
                    1 => (-self.step_m, 0.0),
                    2 => (0.0, self.step_m),
                    _ => (0.0, -self.step_m),
                };
                let flip = |v: f64, d: f64, lo: f64, hi: f64| {
                    if v + d < lo || v + d > hi {
                        v - d
                    } else {
                        v + d
                    }
                };
                let x = flip(pos.x, dx, bounds.min.x, bounds.max.x);
                let y = flip(pos.y, dy, bounds.min.y, bounds.max.y);
                bounds.clamp(Point::new(x, y))
            }
        }
    }

    /// Starting point of a walk: uniform over the world, snapped to the
    /// lattice for the grid walk.
    pub fn initial_position<R: Rng + ?Sized>(&self, bounds: &Bounds, rng: &mut R) -> Point {
        match self.variant {
            MobilityVariant::GridWalk => {
                let nx = (bounds.width() / self.step_m).floor() as u64;
                let ny = (bounds.height() / self.step_m).floor() as u64;
                let i = rng.random_range(0..=nx) as f64;
                let j = rng.random_range(0..=ny) as f64;
                bounds.min.offset(i * self.step_m, j * self.step_m)
            }
            _ => Point::new(
                rng.random_range(bounds.min.x..=bounds.max.x),
                rng.random_range(bounds.min.y..=bounds.max.y),
            ),
        }
    }
}

/// Mirror `v` back into `[lo, hi]`.
fn reflect(mut v: f64, lo: f64, hi: f64) -> f64 {
    // a step longer than the world could need several bounces
    for _ in 0..8 {
        if v < lo {
            v = 2.0 * lo - v;
        } else if v > hi {
            v = 2.0 * hi - v;
        } else {
            return v;
        }
    }
    v.clamp(lo, hi)
}

/// Per-UE simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub position: Point,
    pub serving_bs: usize,
    pub ttt: TttState,
    /// Index of this UE's random stream.
    pub stream: u64,
}

impl UeState {
    pub fn new(position: Point, serving_bs: usize, stream: u64) -> Self {
        Self {
            position,
            serving_bs,
            ttt: TttState::default(),
            stream,
        }
    }
}
