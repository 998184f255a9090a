//! Log-distance path-loss simulator.
//!
//! A reading of AP `j` at distance `d` is
//! `P1m - 10 * gamma * log10(d) + N(0, shadow^2)`, rounded to whole dBm and
//! clipped at 0 dBm. Readings weaker than `missing_floor` are not heard.
//! Distances below [`MIN_MODEL_DISTANCE`] are clamped to keep the model
//! finite at an AP.
//!
//! A [`TwinRegion`] plants a far-away copy of a patch of the floor: every
//! reference point within `radius` of `target` gets the exact survey scans
//! of the point at the same offset from `source`, and test scans taken
//! inside the target patch follow the radio model of the source patch.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{Trajectory, TrajectoryStep};
use crate::fingerprint::{numbered_aps, FingerprintDatabase, MissingValuePolicy, RssiScan};
use crate::geometry::Point;
use crate::rng::{derive_seed, seeded_rng, SeededRng};

pub const MIN_MODEL_DISTANCE: f64 = 0.1;

const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwinRegion {
    pub source: Point,
    pub target: Point,
    pub radius: f64,
}

impl TwinRegion {
    pub fn separation(&self) -> f64 {
        self.source.distance(&self.target)
    }

    fn offset(&self) -> (f64, f64) {
        (self.target.x - self.source.x, self.target.y - self.source.y)
    }

    fn contains_target(&self, p: &Point) -> bool {
        p.distance(&self.target) <= self.radius + GRID_EPS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub width: f64,
    pub height: f64,
    pub ap_positions: Vec<Point>,
    pub path_loss_exponent: f64,
    /// Mean RSSI at 1 m, dBm.
    pub reference_power: f64,
    /// Standard deviation of per-scan shadowing, dB.
    pub shadowing_std: f64,
    pub grid_spacing: f64,
    /// Survey scans per reference point.
    pub scans_per_rp: usize,
    /// Test scans per trajectory step.
    pub scans_per_step: usize,
    pub trajectory_count: usize,
    pub steps_per_trajectory: usize,
    pub dt: f64,
    /// Upper bound on walking speed, m/s.
    pub max_speed: f64,
    /// Readings below this level are not heard.
    pub missing_floor: f64,
    pub twins: Vec<TwinRegion>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 21.0,
            height: 16.0,
            ap_positions: vec![
                Point::new(3.0, 3.0),
                Point::new(10.5, 2.5),
                Point::new(18.0, 4.5),
                Point::new(4.5, 12.5),
                Point::new(12.0, 13.5),
                Point::new(17.5, 11.0),
            ],
            path_loss_exponent: 3.0,
            reference_power: -40.0,
            shadowing_std: 4.0,
            grid_spacing: 1.0,
            scans_per_rp: 100,
            scans_per_step: 1,
            trajectory_count: 4,
            steps_per_trajectory: 50,
            dt: 1.0,
            max_speed: 1.2,
            missing_floor: -100.0,
            twins: Vec::new(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// The default floor with one planted twin patch 12 m from its source.
    pub fn with_planted_twin(seed: u64) -> Self {
        Self {
            twins: vec![TwinRegion {
                source: Point::new(4.0, 8.0),
                target: Point::new(16.0, 8.0),
                radius: 1.5,
            }],
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let positive = [
            ("width", self.width),
            ("height", self.height),
            ("grid_spacing", self.grid_spacing),
            ("dt", self.dt),
            ("max_speed", self.max_speed),
            ("path_loss_exponent", self.path_loss_exponent),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !(self.shadowing_std.is_finite() && self.shadowing_std >= 0.0) {
            return bad(format!(
                "shadowing_std must be >= 0, got {}",
                self.shadowing_std
            ));
        }
        if !self.reference_power.is_finite() || !self.missing_floor.is_finite() {
            return bad("reference_power and missing_floor must be finite".into());
        }
        if self.ap_positions.is_empty() {
            return bad("at least one AP is required".into());
        }
        if self.ap_positions.iter().any(|p| !p.is_finite()) {
            return bad("AP positions must be finite".into());
        }
        if self.scans_per_rp == 0 || self.scans_per_step == 0 {
            return bad("scans_per_rp and scans_per_step must be >= 1".into());
        }
        if self.trajectory_count > 0 && self.steps_per_trajectory < 2 {
            return bad("trajectories need at least 2 steps".into());
        }
        for (i, t) in self.twins.iter().enumerate() {
            if !(t.radius.is_finite() && t.radius >= 0.0) {
                return bad(format!("twin {i}: radius must be >= 0"));
            }
            if !self.inside(&t.source) || !self.inside(&t.target) {
                return bad(format!("twin {i}: centers must lie on the floor"));
            }
            if t.separation() <= 2.0 * t.radius {
                return bad(format!("twin {i}: source and target patches overlap"));
            }
            let (dx, dy) = t.offset();
            for d in [dx, dy] {
                let cells = d / self.grid_spacing;
                if (cells - cells.round()).abs() > GRID_EPS {
                    return bad(format!(
                        "twin {i}: offset must be a whole number of grid cells"
                    ));
                }
            }
        }
        Ok(())
    }

    fn inside(&self, p: &Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    /// Noise-free model RSSI of one AP at a location, before clipping.
    pub fn mean_rssi(&self, location: &Point, ap: usize) -> f64 {
        let d = location
            .distance(&self.ap_positions[ap])
            .max(MIN_MODEL_DISTANCE);
        self.reference_power - 10.0 * self.path_loss_exponent * d.log10()
    }

    /// Location whose radio model applies at `p`: inside a twin's target
    /// patch this is the matching point of the source patch.
    pub fn radio_location(&self, p: &Point) -> Point {
        match self.twins.iter().find(|t| t.contains_target(p)) {
            Some(t) => {
                let (dx, dy) = t.offset();
                Point::new(p.x - dx, p.y - dy)
            }
            None => *p,
        }
    }

    /// Reference point locations, row by row from the origin.
    pub fn grid_points(&self) -> Vec<Point> {
        let nx = (self.width / self.grid_spacing + GRID_EPS).floor() as usize;
        let ny = (self.height / self.grid_spacing + GRID_EPS).floor() as usize;
        let mut out = Vec::with_capacity((nx + 1) * (ny + 1));
        for iy in 0..=ny {
            for ix in 0..=nx {
                out.push(Point::new(
                    ix as f64 * self.grid_spacing,
                    iy as f64 * self.grid_spacing,
                ));
            }
        }
        out
    }

    fn scan<R: Rng + ?Sized>(
        &self,
        location: &Point,
        noise: &Normal<f64>,
        rng: &mut R,
    ) -> RssiScan {
        let radio = self.radio_location(location);
        let readings = (0..self.ap_positions.len())
            .map(|j| {
                let v = self.mean_rssi(&radio, j) + noise.sample(rng);
                (v >= self.missing_floor).then(|| v.min(0.0).round())
            })
            .collect();
        RssiScan::new(readings)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub database: FingerprintDatabase,
    pub trajectories: Vec<Trajectory>,
}

/// Builds the survey database and the test trajectories. The survey and
/// each trajectory draw from separate streams of `cfg.seed`.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let noise = Normal::new(0.0, cfg.shadowing_std).expect("validated std");
    let grid = cfg.grid_points();

    let mut rng = seeded_rng(derive_seed(cfg.seed, 0));
    let mut surveys: Vec<Vec<RssiScan>> = grid
        .iter()
        .map(|p| {
            (0..cfg.scans_per_rp)
                .map(|_| cfg.scan(p, &noise, &mut rng))
                .collect()
        })
        .collect();
    for twin in &cfg.twins {
        let (dx, dy) = twin.offset();
        for (i, p) in grid.iter().enumerate() {
            if !twin.contains_target(p) {
                continue;
            }
            let src = Point::new(p.x - dx, p.y - dy);
            let j = grid
                .iter()
                .position(|q| q.distance(&src) <= GRID_EPS)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "twin source ({}, {}) is not a grid point",
                        src.x, src.y
                    ))
                })?;
            surveys[i] = surveys[j].clone();
        }
    }

    let database = FingerprintDatabase::from_scans(
        numbered_aps(cfg.ap_positions.len()),
        grid.into_iter().zip(surveys),
        Some(cfg.grid_spacing),
        MissingValuePolicy::Substitute {
            floor: cfg.missing_floor,
        },
    )?;

    let trajectories = (0..cfg.trajectory_count)
        .map(|t| {
            let mut rng = seeded_rng(derive_seed(cfg.seed, 1 + t as u64));
            walk(cfg, &noise, &mut rng)
        })
        .collect();
    Ok(SyntheticData {
        database,
        trajectories,
    })
}

/// Waypoint walk. Half of the waypoints fall inside a twin patch (source
/// or target) when twins are planted, so the walk crosses the ambiguous
/// areas. Speed is drawn once per leg from `[0.4, 1] * max_speed`.
fn walk(cfg: &SynthConfig, noise: &Normal<f64>, rng: &mut SeededRng) -> Trajectory {
    let uniform_point = |rng: &mut SeededRng| {
        Point::new(
            rng.random_range(0.0..=cfg.width),
            rng.random_range(0.0..=cfg.height),
        )
    };
    let waypoint = |rng: &mut SeededRng| {
        if !cfg.twins.is_empty() && rng.random_bool(0.5) {
            let twin = cfg.twins[rng.random_range(0..cfg.twins.len())];
            let center = if rng.random_bool(0.5) {
                twin.source
            } else {
                twin.target
            };
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let r = twin.radius * rng.random::<f64>().sqrt();
            let p = Point::new(center.x + r * angle.cos(), center.y + r * angle.sin());
            Point::new(p.x.clamp(0.0, cfg.width), p.y.clamp(0.0, cfg.height))
        } else {
            uniform_point(rng)
        }
    };

    let mut pos = uniform_point(rng);
    let mut goal = waypoint(rng);
    let mut speed = cfg.max_speed * rng.random_range(0.4..=1.0);
    let mut steps = Vec::with_capacity(cfg.steps_per_trajectory);
    for _ in 0..cfg.steps_per_trajectory {
        let scans = (0..cfg.scans_per_step)
            .map(|_| cfg.scan(&pos, noise, rng))
            .collect();
        steps.push(TrajectoryStep { truth: pos, scans });

        let mut budget = speed * cfg.dt;
        while budget > 0.0 {
            let remaining = pos.distance(&goal);
            if remaining > budget {
                let f = budget / remaining;
                pos = Point::new(pos.x + f * (goal.x - pos.x), pos.y + f * (goal.y - pos.y));
                break;
            }
            budget -= remaining;
            pos = goal;
            goal = waypoint(rng);
            speed = cfg.max_speed * rng.random_range(0.4..=1.0);
            budget = budget.min(speed * cfg.dt);
        }
    }
    Trajectory::new(steps, cfg.dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::database_to_json;

    fn small() -> SynthConfig {
        SynthConfig {
            scans_per_rp: 20,
            trajectory_count: 2,
            steps_per_trajectory: 10,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn default_geometry() {
        let cfg = SynthConfig::default();
        assert_eq!(cfg.grid_points().len(), 22 * 17);
        let data = generate_synthetic(&small()).unwrap();
        assert_eq!(data.database.len(), 22 * 17);
        assert_eq!(data.database.ap_count(), 6);
        assert_eq!(data.database.grid_size(), Some(1.0));
        assert_eq!(data.trajectories.len(), 2);
        assert!(data.trajectories.iter().all(|t| t.len() == 10));
    }

    #[test]
    fn noiseless_single_ap_decreases_with_distance() {
        let cfg = SynthConfig {
            ap_positions: vec![Point::new(0.0, 0.0)],
            shadowing_std: 0.0,
            ..SynthConfig::default()
        };
        let mut last = f64::INFINITY;
        for i in 1..200 {
            let v = cfg.mean_rssi(&Point::new(i as f64 * 0.1, 0.0), 0);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn walk_respects_speed_and_bounds() {
        let cfg = SynthConfig::with_planted_twin(3);
        let data = generate_synthetic(&SynthConfig {
            scans_per_rp: 2,
            ..cfg.clone()
        })
        .unwrap();
        for t in &data.trajectories {
            for w in t.steps.windows(2) {
                assert!(w[0].truth.distance(&w[1].truth) <= cfg.max_speed * cfg.dt + 1e-9);
            }
            for s in &t.steps {
                assert!(cfg.inside(&s.truth));
            }
        }
    }

    #[test]
    fn twins_share_survey() {
        let data = generate_synthetic(&SynthConfig {
            scans_per_rp: 5,
            ..SynthConfig::with_planted_twin(1)
        })
        .unwrap();
        let pts = data.database.points();
        let at = |x: f64, y: f64| {
            pts.iter()
                .find(|rp| rp.location == Point::new(x, y))
                .unwrap()
        };
        assert_eq!(at(16.0, 8.0).fingerprint, at(4.0, 8.0).fingerprint);
        assert_eq!(at(17.0, 9.0).fingerprint, at(5.0, 9.0).fingerprint);
        assert_ne!(at(18.0, 8.0).fingerprint, at(6.0, 8.0).fingerprint);
    }

    #[test]
    fn deterministic() {
        let a = generate_synthetic(&small()).unwrap();
        let b = generate_synthetic(&small()).unwrap();
        assert_eq!(database_to_json(&a.database), database_to_json(&b.database));
        assert_eq!(a.trajectories, b.trajectories);
        let c = generate_synthetic(&SynthConfig { seed: 1, ..small() }).unwrap();
        assert_ne!(a.database, c.database);
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            SynthConfig {
                width: 0.0,
                ..small()
            },
            SynthConfig {
                scans_per_rp: 0,
                ..small()
            },
            SynthConfig {
                ap_positions: vec![],
                ..small()
            },
            SynthConfig {
                shadowing_std: -1.0,
                ..small()
            },
            SynthConfig {
                steps_per_trajectory: 1,
                ..small()
            },
            SynthConfig {
                twins: vec![TwinRegion {
                    source: Point::new(4.0, 8.0),
                    target: Point::new(5.0, 8.0),
                    radius: 1.0,
                }],
                ..small()
            },
            SynthConfig {
                twins: vec![TwinRegion {
                    source: Point::new(4.0, 8.0),
                    target: Point::new(15.5, 8.0),
                    radius: 1.0,
                }],
                ..small()
            },
        ];
        for cfg in bad {
            assert!(matches!(
                generate_synthetic(&cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
    }
}
