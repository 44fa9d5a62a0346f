//! Proximity warnings about the real room: distance zones, indicator colors,
//! off-view arrows and the sound alert.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, HazardKind, Pose2D, RoomModel};

/// Proximity band, ordered from closest to farthest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    Danger,
    Warning,
    PreWarning,
    Normal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoneConfig {
    /// Half a step plus the safety margin, m.
    pub danger_limit: f64,
    /// One average step, m.
    pub warning_limit: f64,
    /// A step and a half, m.
    pub prewarning_limit: f64,
    pub step_length_min: f64,
    pub step_length_max: f64,
    pub safety_margin: f64,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        Self {
            danger_limit: 0.40,
            warning_limit: 0.80,
            prewarning_limit: 1.20,
            step_length_min: 0.70,
            step_length_max: 0.75,
            safety_margin: 0.20,
        }
    }
}

impl ZoneConfig {
    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.danger_limit
            && self.danger_limit < self.warning_limit
            && self.warning_limit < self.prewarning_limit
        {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "zone limits must satisfy 0 < danger < warning < prewarning, got {} / {} / {}",
                self.danger_limit, self.warning_limit, self.prewarning_limit
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WarningConfig {
    pub zones: ZoneConfig,
    /// Horizontal half field of view, rad.
    pub fov_half_angle: f64,
    /// Cone within which the person is looking directly at a hazard, rad.
    pub gaze_half_angle: f64,
}

impl Default for WarningConfig {
    fn default() -> Self {
        Self {
            zones: ZoneConfig::default(),
            fov_half_angle: 45f64.to_radians(),
            gaze_half_angle: 15f64.to_radians(),
        }
    }
}

impl WarningConfig {
    pub fn validate(&self) -> Result<()> {
        self.zones.validate()?;
        let angles_ok = self.fov_half_angle > 0.0
            && self.fov_half_angle < PI
            && self.gaze_half_angle > 0.0
            && self.gaze_half_angle < PI;
        if angles_ok {
            Ok(())
        } else {
            Err(Error::Config(
                "fov and gaze half-angles must lie in (0, π)".into(),
            ))
        }
    }
}

/// Lower-inclusive bands; negative distances (already past a limit) are Danger.
pub fn classify_zone(distance: f64, cfg: &ZoneConfig) -> Zone {
    if distance < cfg.danger_limit {
        Zone::Danger
    } else if distance < cfg.warning_limit {
        Zone::Warning
    } else if distance < cfg.prewarning_limit {
        Zone::PreWarning
    } else {
        Zone::Normal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorAppearance {
    pub visible: bool,
    pub rgba: [f64; 4],
}

pub const WHITE_CLEAR: [f64; 4] = [1.0, 1.0, 1.0, 0.0];
pub const YELLOW_SEMI: [f64; 4] = [1.0, 1.0, 0.0, 0.5];
pub const RED_OPAQUE: [f64; 4] = [1.0, 0.0, 0.0, 0.9];

fn lerp(from: [f64; 4], to: [f64; 4], t: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = from[i] + (to[i] - from[i]) * t;
    }
    out
}

pub fn indicator_appearance(distance: f64, cfg: &ZoneConfig) -> IndicatorAppearance {
    let rgba = match classify_zone(distance, cfg) {
        Zone::Normal => {
            return IndicatorAppearance {
                visible: false,
                rgba: WHITE_CLEAR,
            }
        }
        Zone::PreWarning => {
            let t = (cfg.prewarning_limit - distance) / (cfg.prewarning_limit - cfg.warning_limit);
            lerp(WHITE_CLEAR, YELLOW_SEMI, t)
        }
        Zone::Warning => {
            let t = (cfg.warning_limit - distance) / (cfg.warning_limit - cfg.danger_limit);
            lerp(YELLOW_SEMI, RED_OPAQUE, t)
        }
        Zone::Danger => RED_OPAQUE,
    };
    IndicatorAppearance {
        visible: true,
        rgba,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HazardStatus {
    pub id: String,
    pub kind: HazardKind,
    pub distance: f64,
    pub zone: Zone,
    pub bearing: f64,
    pub in_fov: bool,
    pub appearance: IndicatorAppearance,
}

/// Wire form of [`HazardStatus`]; visibility is implied by the zone.
#[derive(Serialize, Deserialize)]
struct HazardRecord {
    id: String,
    kind: HazardKind,
    distance: f64,
    zone: Zone,
    bearing: f64,
    in_fov: bool,
    rgba: [f64; 4],
}

impl Serialize for HazardStatus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HazardRecord {
            id: self.id.clone(),
            kind: self.kind,
            distance: self.distance,
            zone: self.zone,
            bearing: self.bearing,
            in_fov: self.in_fov,
            rgba: self.appearance.rgba,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HazardStatus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = HazardRecord::deserialize(d)?;
        Ok(HazardStatus {
            id: r.id,
            kind: r.kind,
            distance: r.distance,
            zone: r.zone,
            bearing: r.bearing,
            in_fov: r.in_fov,
            appearance: IndicatorAppearance {
                visible: r.zone != Zone::Normal,
                rgba: r.rgba,
            },
        })
    }
}

/// Arrow on the side of the view for a nearby hazard the person cannot see.
pub fn offscreen_arrow(status: &HazardStatus) -> Option<Side> {
    if status.in_fov || status.zone == Zone::Normal {
        return None;
    }
    // a hazard exactly behind (bearing π) goes to the right
    if status.bearing > 0.0 && status.bearing < PI {
        Some(Side::Left)
    } else {
        Some(Side::Right)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertState {
    /// Hazards currently sounding.
    pub ringing: BTreeSet<String>,
    /// Hazards the person looked at while in Danger; silent until they
    /// leave the Danger zone.
    pub acknowledged: BTreeSet<String>,
}

impl AlertState {
    pub fn sound_on(&self) -> bool {
        !self.ringing.is_empty()
    }
}

/// Per-hazard alert flags after one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlertFlags {
    pub ringing: bool,
    pub acknowledged: bool,
}

/// Alert rule for a single hazard.
pub fn alert_transition(zone: Zone, in_fov: bool, gaze_at: bool, prev: AlertFlags) -> AlertFlags {
    if zone != Zone::Danger {
        return AlertFlags {
            ringing: false,
            acknowledged: false,
        };
    }
    if gaze_at || prev.acknowledged {
        return AlertFlags {
            ringing: false,
            acknowledged: true,
        };
    }
    AlertFlags {
        ringing: prev.ringing || !in_fov,
        acknowledged: false,
    }
}

pub fn sound_alert_step(
    alert: &AlertState,
    statuses: &[HazardStatus],
    gaze_half_angle: f64,
) -> AlertState {
    let mut next = AlertState::default();
    for s in statuses {
        let prev = AlertFlags {
            ringing: alert.ringing.contains(&s.id),
            acknowledged: alert.acknowledged.contains(&s.id),
        };
        let gaze_at = s.bearing.abs() <= gaze_half_angle;
        let flags = alert_transition(s.zone, s.in_fov, gaze_at, prev);
        if flags.ringing {
            next.ringing.insert(s.id.clone());
        }
        if flags.acknowledged {
            next.acknowledged.insert(s.id.clone());
        }
    }
    next
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub id: String,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarningFrame {
    pub t: f64,
    pub hazards: Vec<HazardStatus>,
    pub arrows: Vec<Arrow>,
    pub sound_on: bool,
}

/// Evaluates one hazard as seen from `pose`.
pub fn hazard_status(
    pose: &Pose2D,
    hazard: geometry::Hazard<'_>,
    cfg: &WarningConfig,
) -> HazardStatus {
    let distance = hazard.distance(pose.position);
    let bearing = hazard.bearing_from(pose);
    HazardStatus {
        id: hazard.id().to_owned(),
        kind: hazard.kind(),
        distance,
        zone: classify_zone(distance, &cfg.zones),
        bearing,
        in_fov: geometry::in_fov(bearing, cfg.fov_half_angle),
        appearance: indicator_appearance(distance, &cfg.zones),
    }
}

/// Evaluates every limit and obstacle, then advances the alert state.
pub fn compose_warning_frame(
    pose: &Pose2D,
    room: &RoomModel,
    cfg: &WarningConfig,
    alert: &AlertState,
    t: f64,
) -> (WarningFrame, AlertState) {
    let hazards: Vec<HazardStatus> = room
        .hazards()
        .map(|h| hazard_status(pose, h, cfg))
        .collect();
    let arrows = hazards
        .iter()
        .filter_map(|s| {
            offscreen_arrow(s).map(|side| Arrow {
                id: s.id.clone(),
                side,
            })
        })
        .collect();
    let next = sound_alert_step(alert, &hazards, cfg.gaze_half_angle);
    let frame = WarningFrame {
        t,
        hazards,
        arrows,
        sound_on: next.sound_on(),
    };
    (frame, next)
}
