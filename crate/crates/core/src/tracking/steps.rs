//! Step detection from knee heights.
//!
//! Each knee keeps a drifting baseline (a low percentile of its recent
//! height). A lift starts once the knee rises `rise` above the baseline and
//! becomes a step event when it drops back under half that rise.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::calibration::quantile_sorted;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepConfig {
    /// Rise threshold δ above baseline, m.
    pub rise: f64,
    /// Minimum time between two events of the same knee, s.
    pub refractory: f64,
    /// Window over which pace is measured, s.
    pub pace_window: f64,
    /// A person counts as stepping while the last event is this recent, s.
    pub activity_timeout: f64,
    /// History length used for the baseline percentile, s.
    pub baseline_window: f64,
    pub baseline_percentile: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            rise: 0.05,
            refractory: 0.25,
            pace_window: 2.0,
            activity_timeout: 1.0,
            baseline_window: 5.0,
            baseline_percentile: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Knee {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    pub t: f64,
    pub knee: Knee,
    /// Peak height above that knee's baseline, m.
    pub peak_height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftPhase {
    Below,
    Rising,
    Above,
}

#[derive(Clone, Debug, PartialEq)]
struct KneeTracker {
    knee: Knee,
    baseline: Option<f64>,
    phase: LiftPhase,
    peak: f64,
    history: VecDeque<(f64, f64)>,
    last_event: Option<f64>,
}

impl KneeTracker {
    fn new(knee: Knee) -> Self {
        Self {
            knee,
            baseline: None,
            phase: LiftPhase::Below,
            peak: 0.0,
            history: VecDeque::new(),
            last_event: None,
        }
    }

    fn observe(&mut self, t: f64, h: f64, cfg: &StepConfig) -> Option<StepEvent> {
        self.history.push_back((t, h));
        while let Some(&(t0, _)) = self.history.front() {
            if t - t0 > cfg.baseline_window {
                self.history.pop_front();
            } else {
                break;
            }
        }
        // the baseline is frozen for the duration of a lift
        if self.phase == LiftPhase::Below || self.baseline.is_none() {
            let mut hs: Vec<f64> = self.history.iter().map(|&(_, h)| h).collect();
            hs.sort_by(f64::total_cmp);
            self.baseline = Some(quantile_sorted(&hs, cfg.baseline_percentile));
        }
        let rel = h - self.baseline.unwrap_or(h);
        let half = 0.5 * cfg.rise;

        match self.phase {
            LiftPhase::Below | LiftPhase::Rising => {
                if rel >= cfg.rise {
                    self.phase = LiftPhase::Above;
                    self.peak = rel;
                } else if rel >= half {
                    self.phase = LiftPhase::Rising;
                } else {
                    self.phase = LiftPhase::Below;
                }
                None
            }
            LiftPhase::Above => {
                self.peak = self.peak.max(rel);
                if rel >= half {
                    return None;
                }
                self.phase = LiftPhase::Below;
                let refractory_ok = self
                    .last_event
                    .is_none_or(|last| t - last >= cfg.refractory);
                if !refractory_ok {
                    return None;
                }
                self.last_event = Some(t);
                Some(StepEvent {
                    t,
                    knee: self.knee,
                    peak_height: self.peak,
                })
            }
        }
    }
}

/// Result of feeding one pair of knee heights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepOutput {
    pub events: Vec<StepEvent>,
    /// Events per second over the pace window, both knees.
    pub pace: f64,
    /// Largest peak among events in the pace window.
    pub last_peak_height: f64,
}

/// Step-detection bookkeeping for both knees.
#[derive(Clone, Debug, PartialEq)]
pub struct StepState {
    cfg: StepConfig,
    left: KneeTracker,
    right: KneeTracker,
    recent: VecDeque<StepEvent>,
    last_event: Option<f64>,
}

impl StepState {
    pub fn new(cfg: StepConfig) -> Self {
        Self {
            cfg,
            left: KneeTracker::new(Knee::Left),
            right: KneeTracker::new(Knee::Right),
            recent: VecDeque::new(),
            last_event: None,
        }
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn phase(&self, knee: Knee) -> LiftPhase {
        match knee {
            Knee::Left => self.left.phase,
            Knee::Right => self.right.phase,
        }
    }

    pub fn baseline(&self, knee: Knee) -> Option<f64> {
        match knee {
            Knee::Left => self.left.baseline,
            Knee::Right => self.right.baseline,
        }
    }

    pub fn last_event_time(&self) -> Option<f64> {
        self.last_event
    }

    /// Feeds knee heights (m) observed at time `t`.
    pub fn detect(&mut self, t: f64, left_height: f64, right_height: f64) -> StepOutput {
        let mut events = Vec::new();
        events.extend(self.left.observe(t, left_height, &self.cfg));
        events.extend(self.right.observe(t, right_height, &self.cfg));
        for e in &events {
            self.recent.push_back(*e);
            self.last_event = Some(e.t);
        }
        let window = self.cfg.pace_window;
        while let Some(e) = self.recent.front() {
            if t - e.t > window {
                self.recent.pop_front();
            } else {
                break;
            }
        }
        let pace = self.recent.len() as f64 / window;
        let last_peak_height = self
            .recent
            .iter()
            .map(|e| e.peak_height)
            .fold(0.0, f64::max);
        StepOutput {
            events,
            pace,
            last_peak_height,
        }
    }

    pub fn is_stepping(&self, now: f64) -> bool {
        is_stepping(self.last_event, now, self.cfg.activity_timeout)
    }
}

/// True iff a step event happened within `timeout` seconds of `now`.
pub fn is_stepping(last_event: Option<f64>, now: f64, timeout: f64) -> bool {
    last_event.is_some_and(|t| now - t <= timeout)
}
