//! Synthetic skeleton streams standing in for the depth-camera tracker.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::tracking::SkeletonFrame;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitKind {
    Stationary,
    NaturalWalk,
    WalkInPlace,
    MixedScript,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BodyParams {
    pub chest_height: f64,
    pub head_height: f64,
    /// Standing knee height, m.
    pub knee_height: f64,
    /// Lateral offset of each knee from the body axis, m.
    pub knee_spacing: f64,
}

impl Default for BodyParams {
    fn default() -> Self {
        Self {
            chest_height: 1.30,
            head_height: 1.70,
            knee_height: 0.50,
            knee_spacing: 0.10,
        }
    }
}

/// One piece of a mixed script. `duration` is ignored for natural walking,
/// whose length follows from the path and ground speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitSegment {
    pub kind: GaitKind,
    #[serde(default)]
    pub duration: f64,
    /// Waypoints walked from the current position.
    #[serde(default)]
    pub path: Vec<Vec2>,
    /// Heading while standing or marching; keeps the current one if absent.
    #[serde(default)]
    pub yaw: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaitParams {
    pub kind: GaitKind,
    /// Waypoints for natural walking; the first one is the start.
    pub path: Vec<Vec2>,
    pub ground_speed: f64,
    /// Steps per second over both knees.
    pub step_rate: f64,
    pub knee_lift: f64,
    pub noise_sigma: f64,
    pub frame_rate: f64,
    pub seed: u64,
    pub body: BodyParams,
    /// Length of stationary and walk-in-place traces, s.
    pub duration: f64,
    /// Start position when there is no path.
    pub origin: Vec2,
    pub yaw: f64,
    /// Peak horizontal wander while marching in place, m/s (< 0.1).
    pub drift_speed: f64,
    pub script: Vec<GaitSegment>,
    pub start_time: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            kind: GaitKind::Stationary,
            path: Vec::new(),
            ground_speed: 1.0,
            step_rate: 2.0,
            knee_lift: 0.15,
            noise_sigma: 0.02,
            frame_rate: 30.0,
            seed: 0,
            body: BodyParams::default(),
            duration: 10.0,
            origin: Vec2::new(1.5, 1.5),
            yaw: 0.0,
            drift_speed: 0.05,
            script: Vec::new(),
            start_time: 0.0,
        }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Gait(m.to_owned()));
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return bad("frame_rate must be positive");
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be non-negative");
        }
        if !(self.ground_speed >= 0.0 && self.step_rate >= 0.0 && self.knee_lift >= 0.0) {
            return bad("speeds, step rate and knee lift must be non-negative");
        }
        if !(self.duration >= 0.0) {
            return bad("duration must be non-negative");
        }
        if !(0.0..0.1).contains(&self.drift_speed) {
            return bad("drift_speed must lie in [0, 0.1)");
        }
        match self.kind {
            GaitKind::NaturalWalk => {
                if self.path.len() < 2 {
                    return bad("natural_walk needs a path with at least two waypoints");
                }
                if !(self.ground_speed > 0.0) {
                    return bad("natural_walk needs a positive ground speed");
                }
            }
            GaitKind::MixedScript => {
                if self.script.is_empty() {
                    return bad("mixed_script needs at least one segment");
                }
                for (i, s) in self.script.iter().enumerate() {
                    match s.kind {
                        GaitKind::MixedScript => return bad("script segments cannot nest"),
                        GaitKind::NaturalWalk if s.path.is_empty() => {
                            return Err(Error::Gait(format!(
                                "segment {i}: natural_walk with an empty path"
                            )))
                        }
                        GaitKind::NaturalWalk if !(self.ground_speed > 0.0) => {
                            return bad("natural_walk needs a positive ground speed")
                        }
                        _ if !(s.duration >= 0.0) => {
                            return Err(Error::Gait(format!("segment {i}: negative duration")))
                        }
                        _ => {}
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Per-tick motion request for [`GaitSynth`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SynthMotion {
    /// Ground velocity of the body, m/s.
    pub velocity: Vec2,
    pub yaw: f64,
    /// Steps per second over both knees; 0 keeps both knees down.
    pub step_rate: f64,
    pub knee_lift: f64,
}

/// Incremental skeleton synthesizer. Deterministic for a given seed and
/// motion sequence.
#[derive(Clone, Debug)]
pub struct GaitSynth {
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    body: BodyParams,
    position: Vec2,
    yaw: f64,
    knee_phase: f64,
}

const SWAY: f64 = 0.015;
const BOB: f64 = 0.01;

impl GaitSynth {
    pub fn new(seed: u64, noise_sigma: f64, body: BodyParams, position: Vec2, yaw: f64) -> Self {
        let noise =
            (noise_sigma > 0.0).then(|| Normal::new(0.0, noise_sigma).expect("finite sigma"));
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
            body,
            position,
            yaw,
            knee_phase: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        self.position
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn jitter(&mut self, v: Vec3) -> Vec3 {
        match self.noise {
            Some(n) => Vec3::new(
                v.x + n.sample(&mut self.rng),
                v.y + n.sample(&mut self.rng),
                v.z + n.sample(&mut self.rng),
            ),
            None => v,
        }
    }

    /// Moves the body by `motion` over `dt` and samples the frame at `t`.
    pub fn advance(&mut self, t: f64, dt: f64, motion: &SynthMotion) -> SkeletonFrame {
        self.position = self.position + motion.velocity * dt;
        self.yaw = motion.yaw;
        let (lift_l, lift_r, cycle) = if motion.step_rate > 0.0 {
            self.knee_phase = (self.knee_phase + 0.5 * motion.step_rate * dt).fract();
            let a = TAU * self.knee_phase;
            (
                motion.knee_lift * a.sin().max(0.0),
                motion.knee_lift * (a + PI).sin().max(0.0),
                a.sin(),
            )
        } else {
            self.knee_phase = 0.0;
            (0.0, 0.0, 0.0)
        };

        let forward = Vec2::from_yaw(self.yaw);
        let right = Vec2::from_yaw(self.yaw - FRAC_PI_2);
        let b = &self.body;
        let bob = BOB * cycle.abs();
        let chest_g = self.position + right * (SWAY * cycle);
        let chest = Vec3::new(chest_g.x, b.chest_height + bob, chest_g.z);
        let head_g = chest_g + forward * 0.05;
        let head = Vec3::new(head_g.x, b.head_height + bob, head_g.z);
        let knee = |side: f64, lift: f64| {
            let g = self.position + right * (side * b.knee_spacing) + forward * (0.3 * lift);
            Vec3::new(g.x, b.knee_height + lift, g.z)
        };
        let (kl, kr) = (knee(-1.0, lift_l), knee(1.0, lift_r));

        SkeletonFrame {
            t,
            chest: self.jitter(chest),
            head: self.jitter(head),
            head_yaw: self.yaw,
            knee_left: self.jitter(kl),
            knee_right: self.jitter(kr),
        }
    }
}

fn frames_for(duration: f64, rate: f64) -> usize {
    (duration * rate - 1e-9).ceil().max(0.0) as usize
}

struct Emitter {
    synth: GaitSynth,
    frames: Vec<SkeletonFrame>,
    start_time: f64,
    rate: f64,
}

impl Emitter {
    fn next_t(&self) -> f64 {
        self.start_time + self.frames.len() as f64 / self.rate
    }

    fn emit(&mut self, motion: SynthMotion) {
        let dt = if self.frames.is_empty() {
            0.0
        } else {
            1.0 / self.rate
        };
        let t = self.next_t();
        let f = self.synth.advance(t, dt, &motion);
        self.frames.push(f);
    }
}

/// Generates a complete skeleton trace.
pub fn generate_gait(params: &GaitParams) -> Result<Vec<SkeletonFrame>> {
    params.validate()?;
    let segments = match params.kind {
        GaitKind::MixedScript => params.script.clone(),
        GaitKind::NaturalWalk => vec![GaitSegment {
            kind: GaitKind::NaturalWalk,
            duration: 0.0,
            path: params.path[1..].to_vec(),
            yaw: None,
        }],
        kind => vec![GaitSegment {
            kind,
            duration: params.duration,
            path: Vec::new(),
            yaw: Some(params.yaw),
        }],
    };
    let start = match params.kind {
        GaitKind::NaturalWalk => params.path[0],
        _ => params.origin,
    };
    let start_yaw = match (params.kind, segments.first()) {
        (GaitKind::NaturalWalk, Some(s)) => (s.path[0] - start).yaw(),
        _ => params.yaw,
    };

    let mut synth = GaitSynth::new(
        params.seed,
        params.noise_sigma,
        params.body.clone(),
        start,
        start_yaw,
    );
    let drift_phase: (f64, f64) = (
        synth.rng().random_range(0.0..TAU),
        synth.rng().random_range(0.0..TAU),
    );
    let mut em = Emitter {
        synth,
        frames: Vec::new(),
        start_time: params.start_time,
        rate: params.frame_rate,
    };
    let dt = 1.0 / params.frame_rate;

    // first frame: standing where the trace begins
    em.emit(SynthMotion {
        yaw: start_yaw,
        ..Default::default()
    });

    for seg in &segments {
        match seg.kind {
            GaitKind::Stationary => {
                let yaw = seg.yaw.unwrap_or(em.synth.yaw());
                for _ in 0..frames_for(seg.duration, params.frame_rate) {
                    em.emit(SynthMotion {
                        yaw,
                        ..Default::default()
                    });
                }
            }
            GaitKind::WalkInPlace => {
                let yaw = seg.yaw.unwrap_or(em.synth.yaw());
                for _ in 0..frames_for(seg.duration, params.frame_rate) {
                    let t = em.next_t();
                    // bounded wander, |v| <= drift_speed
                    let v = Vec2::new(
                        (0.4 * t + drift_phase.0).sin(),
                        (0.3 * t + drift_phase.1).sin(),
                    ) * (params.drift_speed / std::f64::consts::SQRT_2);
                    em.emit(SynthMotion {
                        velocity: v,
                        yaw,
                        step_rate: params.step_rate,
                        knee_lift: params.knee_lift,
                    });
                }
            }
            GaitKind::NaturalWalk => {
                let mut from = em.synth.position();
                for &to in &seg.path {
                    let leg = to - from;
                    let len = leg.norm();
                    if len < 1e-12 {
                        continue;
                    }
                    let dir = leg * (1.0 / len);
                    let yaw = dir.yaw();
                    let n = frames_for(len / params.ground_speed, params.frame_rate);
                    for k in 1..=n {
                        let s = (k as f64 * params.ground_speed * dt).min(len);
                        let target = from + dir * s;
                        let velocity = (target - em.synth.position()) * params.frame_rate;
                        em.emit(SynthMotion {
                            velocity,
                            yaw,
                            step_rate: params.step_rate,
                            knee_lift: params.knee_lift,
                        });
                    }
                    from = to;
                }
            }
            GaitKind::MixedScript => unreachable!("rejected by validate"),
        }
    }
    Ok(em.frames)
}
