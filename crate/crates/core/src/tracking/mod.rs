//! Skeleton stream processing: joint smoothing plus the chest speed and knee
//! steps derived from it.

pub mod kalman;
pub mod steps;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};

pub use kalman::{AxisFilter, JointFilterState};
pub use steps::{is_stepping, Knee, LiftPhase, StepConfig, StepEvent, StepOutput, StepState};

/// One tracker sample. Field names follow the trace file format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFrame {
    pub t: f64,
    pub chest: Vec3,
    pub head: Vec3,
    pub head_yaw: f64,
    #[serde(rename = "knee_l")]
    pub knee_left: Vec3,
    #[serde(rename = "knee_r")]
    pub knee_right: Vec3,
}

impl SkeletonFrame {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.head_yaw.is_finite()
            && self.chest.is_finite()
            && self.head.is_finite()
            && self.knee_left.is_finite()
            && self.knee_right.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingConfig {
    /// Kalman process-noise intensity, (m/s²)².
    pub q: f64,
    /// Kalman measurement variance, m².
    pub r: f64,
    /// Prior velocity variance when a filter starts, (m/s)².
    pub initial_velocity_var: f64,
    /// Chest-speed sliding window, s.
    pub chest_window: f64,
    pub steps: StepConfig,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            r: 0.02 * 0.02,
            initial_velocity_var: 1.0,
            chest_window: 0.5,
            steps: StepConfig::default(),
        }
    }
}

impl TrackingConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.steps;
        let ok = self.q > 0.0
            && self.r > 0.0
            && self.initial_velocity_var >= 0.0
            && self.chest_window > 0.0
            && s.rise > 0.0
            && s.refractory >= 0.0
            && s.pace_window > 0.0
            && s.activity_timeout > 0.0
            && s.baseline_window > 0.0
            && (0.0..=1.0).contains(&s.baseline_percentile);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid tracking config {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionEstimate {
    /// Horizontal chest speed, m/s.
    pub chest_speed_h: f64,
    pub window: f64,
    /// History does not yet span the window; speed is reported as 0.
    pub warming_up: bool,
}

/// Recent smoothed chest ground positions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChestHistory {
    samples: VecDeque<(f64, Vec2)>,
}

impl ChestHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample and drops what is no longer needed for `window`.
    pub fn push(&mut self, t: f64, p: Vec2, window: f64) {
        self.samples.push_back((t, p));
        // keep one sample at or before t - window for interpolation
        while self.samples.len() > 2 && self.samples[1].0 <= t - window {
            self.samples.pop_front();
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn at(&self, t: f64) -> Option<Vec2> {
        let i = self.samples.partition_point(|&(ts, _)| ts < t);
        if i < self.samples.len() && self.samples[i].0 == t {
            return Some(self.samples[i].1);
        }
        if i == 0 || i == self.samples.len() {
            return None;
        }
        let (t0, p0) = self.samples[i - 1];
        let (t1, p1) = self.samples[i];
        let a = (t - t0) / (t1 - t0);
        Some(p0 + (p1 - p0) * a)
    }

    /// Horizontal displacement over `[now - window, now]` divided by `window`.
    pub fn speed(&self, window: f64, now: f64) -> MotionEstimate {
        let warming = MotionEstimate {
            chest_speed_h: 0.0,
            window,
            warming_up: true,
        };
        if !(window > 0.0) {
            return warming;
        }
        match (self.at(now - window), self.at(now)) {
            (Some(a), Some(b)) => MotionEstimate {
                chest_speed_h: b.distance(a) / window,
                window,
                warming_up: false,
            },
            _ => warming,
        }
    }
}

/// Smoothed joints for one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedFrame {
    pub t: f64,
    pub chest: Vec3,
    pub head: Vec3,
    pub knee_left: Vec3,
    pub knee_right: Vec3,
    pub head_yaw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackingOutput {
    pub smoothed: SmoothedFrame,
    pub motion: MotionEstimate,
    pub steps: StepOutput,
    pub stepping: bool,
    /// Time since the previous frame; `None` on the first frame.
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
struct Joints {
    head: JointFilterState,
    chest: JointFilterState,
    knee_left: JointFilterState,
    knee_right: JointFilterState,
}

/// Per-person tracking pipeline. Feed frames in time order from one source.
#[derive(Clone, Debug, PartialEq)]
pub struct Tracker {
    cfg: TrackingConfig,
    joints: Option<Joints>,
    last_t: Option<f64>,
    chest: ChestHistory,
    steps: StepState,
}

impl Tracker {
    pub fn new(cfg: TrackingConfig) -> Result<Self> {
        cfg.validate()?;
        let steps = StepState::new(cfg.steps.clone());
        Ok(Self {
            cfg,
            joints: None,
            last_t: None,
            chest: ChestHistory::new(),
            steps,
        })
    }

    pub fn config(&self) -> &TrackingConfig {
        &self.cfg
    }

    pub fn process(&mut self, frame: &SkeletonFrame) -> Result<TrackingOutput> {
        if !frame.is_finite() {
            return Err(Error::Parse {
                line: 0,
                message: format!("non-finite frame at t={}", frame.t),
            });
        }
        let dt = match self.last_t {
            Some(prev) if frame.t <= prev => {
                return Err(Error::NonPositiveDt(frame.t - prev));
            }
            Some(prev) => Some(frame.t - prev),
            None => None,
        };
        let smoothed = match (&mut self.joints, dt) {
            (Some(j), Some(dt)) => SmoothedFrame {
                t: frame.t,
                head: j.head.update(frame.head, dt)?,
                chest: j.chest.update(frame.chest, dt)?,
                knee_left: j.knee_left.update(frame.knee_left, dt)?,
                knee_right: j.knee_right.update(frame.knee_right, dt)?,
                head_yaw: frame.head_yaw,
            },
            _ => {
                let c = &self.cfg;
                let new = |p| JointFilterState::new(p, c.q, c.r, c.initial_velocity_var);
                self.joints = Some(Joints {
                    head: new(frame.head)?,
                    chest: new(frame.chest)?,
                    knee_left: new(frame.knee_left)?,
                    knee_right: new(frame.knee_right)?,
                });
                SmoothedFrame {
                    t: frame.t,
                    chest: frame.chest,
                    head: frame.head,
                    knee_left: frame.knee_left,
                    knee_right: frame.knee_right,
                    head_yaw: frame.head_yaw,
                }
            }
        };
        self.last_t = Some(frame.t);

        self.chest
            .push(frame.t, smoothed.chest.ground(), self.cfg.chest_window);
        let motion = self.chest.speed(self.cfg.chest_window, frame.t);
        let steps = self
            .steps
            .detect(frame.t, smoothed.knee_left.y, smoothed.knee_right.y);
        let stepping = self.steps.is_stepping(frame.t);
        Ok(TrackingOutput {
            smoothed,
            motion,
            steps,
            stepping,
            dt,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn history(points: &[(f64, Vec2)]) -> ChestHistory {
        let mut h = ChestHistory::new();
        for &(t, p) in points {
            h.push(t, p, 1.0);
        }
        h
    }

    #[test]
    fn stationary_chest_has_zero_speed() {
        let pts: Vec<_> = (0..40)
            .map(|i| (i as f64 / 30.0, Vec2::new(1.0, 2.0)))
            .collect();
        let est = history(&pts).speed(1.0, 39.0 / 30.0);
        assert!(!est.warming_up);
        assert_eq!(est.chest_speed_h, 0.0);
    }

    #[test]
    fn linear_motion_speed() {
        let pts: Vec<_> = (0..=20)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, Vec2::new(0.8 * t, 0.0))
            })
            .collect();
        let est = history(&pts).speed(1.0, 2.0);
        assert_abs_diff_eq!(est.chest_speed_h, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn vertical_bobbing_is_ignored() {
        let mut tracker = Tracker::new(TrackingConfig::default()).unwrap();
        let mut last = None;
        for i in 0..60 {
            let t = i as f64 / 30.0;
            let chest = Vec3::new(1.0, 1.3 + 0.05 * (t * 12.0).sin(), 1.0);
            let knee = Vec3::new(1.0, 0.5, 1.0);
            let f = SkeletonFrame {
                t,
                chest,
                head: chest,
                head_yaw: 0.0,
                knee_left: knee,
                knee_right: knee,
            };
            last = Some(tracker.process(&f).unwrap());
        }
        assert_eq!(last.unwrap().motion.chest_speed_h, 0.0);
    }

    #[test]
    fn short_history_is_warming_up() {
        let pts: Vec<_> = (0..5)
            .map(|i| (i as f64 * 0.1, Vec2::new(i as f64, 0.0)))
            .collect();
        let est = history(&pts).speed(1.0, 0.4);
        assert!(est.warming_up);
        assert_eq!(est.chest_speed_h, 0.0);
    }

    #[test]
    fn tracker_rejects_time_going_backwards() {
        let mut tracker = Tracker::new(TrackingConfig::default()).unwrap();
        let f = SkeletonFrame {
            t: 1.0,
            chest: Vec3::default(),
            head: Vec3::default(),
            head_yaw: 0.0,
            knee_left: Vec3::default(),
            knee_right: Vec3::default(),
        };
        tracker.process(&f).unwrap();
        assert!(tracker.process(&f).is_err());
        assert!(tracker.process(&SkeletonFrame { t: 0.5, ..f }).is_err());
    }

    #[test]
    fn trace_record_field_names() {
        let json = r#"{"t":0.5,"chest":[1,1.3,1],"head":[1,1.7,1],"head_yaw":0.1,"knee_l":[0.9,0.5,1],"knee_r":[1.1,0.5,1]}"#;
        let f: SkeletonFrame = serde_json::from_str(json).unwrap();
        assert_eq!(f.knee_left, Vec3::new(0.9, 0.5, 1.0));
        let back = serde_json::to_string(&f).unwrap();
        assert!(back.contains("\"knee_r\":[1.1,0.5,1.0]"));
    }

    proptest! {
        #[test]
        fn speed_invariant_under_translation_and_time_shift(
            steps in proptest::collection::vec((-0.05..0.05f64, -0.05..0.05f64), 20..60),
            shift in (-50.0..50.0f64, -50.0..50.0f64),
            t0 in -100.0..100.0f64,
        ) {
            let dt = 1.0 / 32.0;
            let mut p = Vec2::ZERO;
            let mut a = ChestHistory::new();
            let mut b = ChestHistory::new();
            let off = Vec2::new(shift.0, shift.1);
            let n = steps.len();
            for (i, (dx, dz)) in steps.into_iter().enumerate() {
                p = p + Vec2::new(dx, dz);
                let t = i as f64 * dt;
                a.push(t, p, 0.5);
                b.push(t + t0, p + off, 0.5);
            }
            let now = (n - 1) as f64 * dt;
            let sa = a.speed(0.5, now);
            let sb = b.speed(0.5, now + t0);
            prop_assert_eq!(sa.warming_up, sb.warming_up);
            prop_assert!((sa.chest_speed_h - sb.chest_speed_h).abs() < 1e-6);
        }
    }
}
