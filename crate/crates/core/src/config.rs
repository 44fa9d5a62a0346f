use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::locomotion::LocomotionConfig;
use crate::tracking::TrackingConfig;
use crate::warning::WarningConfig;

/// Everything a run or a live session can be tuned with. Every field has a
/// default, so a config file only needs the values it changes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub tracking: TrackingConfig,
    pub locomotion: LocomotionConfig,
    pub warning: WarningConfig,
    pub sim: SimSettings,
    pub service: ServiceConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSettings {
    /// Radius of the vertical cylinder standing in for the body, m.
    pub collision_radius: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            collision_radius: 0.20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    /// Fixed tick, s.
    pub tick: f64,
    /// Ground speed for a full forward intent, m/s.
    pub max_ground_speed: f64,
    /// Turn rate for a full turn intent, rad/s.
    pub max_turn_rate: f64,
    /// March rate while marching in place, steps/s.
    pub max_march_rate: f64,
    pub march_knee_lift: f64,
    /// Average stride used to derive cadence while walking, m.
    pub walk_step_length: f64,
    pub walk_knee_lift: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            tick: 1.0 / 30.0,
            max_ground_speed: 1.4,
            max_turn_rate: std::f64::consts::FRAC_PI_2,
            max_march_rate: 3.0,
            march_knee_lift: 0.20,
            walk_step_length: 0.75,
            walk_knee_lift: 0.10,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tracking.validate()?;
        self.locomotion.validate()?;
        self.warning.validate()?;
        if !(self.sim.collision_radius > 0.0) {
            return Err(Error::Config("collision radius must be positive".into()));
        }
        let s = &self.service;
        let ok = s.tick > 0.0
            && s.max_ground_speed >= 0.0
            && s.max_turn_rate >= 0.0
            && s.max_march_rate >= 0.0
            && s.march_knee_lift >= 0.0
            && s.walk_step_length > 0.0
            && s.walk_knee_lift >= 0.0
            && s.noise_sigma >= 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid service config {s:?}")));
        }
        Ok(())
    }
}
