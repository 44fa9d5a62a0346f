//! Live sessions steered by input commands. Each tick synthesizes a skeleton
//! frame from the held command and runs it through the same pipeline as
//! recorded traces. Transport lives elsewhere; this module is the session
//! actor state and the wire messages.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, RoomModel, Vec2};
use crate::sim::{BodyParams, FrameRecord, GaitSynth, MetricsReport, Pipeline, SynthMotion};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MoveIntent {
    /// Forward (+) / backward (−).
    pub forward: f64,
    /// Right (+) / left (−).
    pub strafe: f64,
}

/// Steering intents from a client. Positive `turn` turns right.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InputCommand {
    pub t_client: f64,
    #[serde(rename = "move")]
    pub movement: MoveIntent,
    pub turn: f64,
    pub march: bool,
}

impl InputCommand {
    pub fn clamped(self) -> Self {
        let c = |v: f64| {
            if v.is_finite() {
                v.clamp(-1.0, 1.0)
            } else {
                0.0
            }
        };
        Self {
            t_client: self.t_client,
            movement: MoveIntent {
                forward: c(self.movement.forward),
                strafe: c(self.movement.strafe),
            },
            turn: c(self.turn),
            march: self.march,
        }
    }
}

/// One tick as streamed to the client: the frame-log record plus the
/// session id and metrics so far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFrameMessage {
    pub session: String,
    #[serde(flatten)]
    pub record: FrameRecord,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Hello {
        #[serde(default)]
        room: Option<Box<RoomModel>>,
        #[serde(default)]
        config: Option<Box<EngineConfig>>,
    },
    Input(InputCommand),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    Welcome { session: String, room: RoomModel },
    Frame(StateFrameMessage),
    Error { message: String },
}

#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    cfg: EngineConfig,
    pipeline: Pipeline,
    synth: GaitSynth,
    command: InputCommand,
    yaw: f64,
    t: f64,
    ticks: u64,
}

impl Session {
    pub fn new(id: impl Into<String>, room: RoomModel, cfg: EngineConfig) -> Result<Self> {
        let start = room.centroid();
        let svc = &cfg.service;
        let synth = GaitSynth::new(svc.seed, svc.noise_sigma, BodyParams::default(), start, 0.0);
        Ok(Self {
            id: id.into(),
            pipeline: Pipeline::new(room, cfg.clone())?,
            cfg,
            synth,
            command: InputCommand::default(),
            yaw: 0.0,
            t: 0.0,
            ticks: 0,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn room(&self) -> &RoomModel {
        self.pipeline.room()
    }

    pub fn person_position(&self) -> Vec2 {
        self.synth.position()
    }

    pub fn apply_input(&mut self, cmd: InputCommand) {
        self.command = cmd.clamped();
    }

    fn motion(&mut self, dt: f64) -> SynthMotion {
        let s = &self.cfg.service;
        let c = self.command;
        self.yaw = normalize_angle(self.yaw - c.turn * s.max_turn_rate * dt);
        let forward = Vec2::from_yaw(self.yaw);
        let right = Vec2::from_yaw(self.yaw - std::f64::consts::FRAC_PI_2);
        let mut intent = forward * c.movement.forward + right * c.movement.strafe;
        if intent.norm() > 1.0 {
            intent = intent * (1.0 / intent.norm());
        }
        let velocity = intent * s.max_ground_speed;
        let speed = velocity.norm();
        let (step_rate, knee_lift) = if speed > 1e-9 {
            (speed / s.walk_step_length, s.walk_knee_lift)
        } else if c.march {
            (s.max_march_rate, s.march_knee_lift)
        } else {
            (0.0, 0.0)
        };
        SynthMotion {
            velocity,
            yaw: self.yaw,
            step_rate,
            knee_lift,
        }
    }

    /// Advances the session by `dt` seconds. The real pose moves wherever the
    /// command sends it, through walls and furniture alike.
    pub fn tick(&mut self, dt: f64) -> Result<StateFrameMessage> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveDt(dt));
        }
        let step = if self.ticks == 0 { 0.0 } else { dt };
        self.t += step;
        let motion = self.motion(step);
        let frame = self.synth.advance(self.t, step, &motion);
        let record = self.pipeline.step(&frame)?;
        self.ticks += 1;
        Ok(StateFrameMessage {
            session: self.id.clone(),
            record,
            metrics: self.pipeline.metrics(),
        })
    }
}

/// Owns all live sessions; each session is mutated only through here.
#[derive(Debug, Default)]
pub struct SessionManager {
    sessions: BTreeMap<String, Session>,
    next_id: u64,
}

impl SessionManager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_session(&mut self, room: RoomModel, cfg: EngineConfig) -> Result<String> {
        self.next_id += 1;
        let id = format!("s{}", self.next_id);
        let session = Session::new(id.clone(), room, cfg)?;
        self.sessions.insert(id.clone(), session);
        Ok(id)
    }

    /// Creates a session from a room file's JSON text.
    pub fn create_session_from_json(
        &mut self,
        room_json: &str,
        cfg: EngineConfig,
    ) -> Result<String> {
        let file: crate::geometry::RoomFile = serde_json::from_str(room_json)?;
        let room = RoomModel::try_from(file)?;
        self.create_session(room, cfg)
    }

    pub fn session(&self, id: &str) -> Result<&Session> {
        self.sessions
            .get(id)
            .ok_or_else(|| Error::UnknownSession(id.to_owned()))
    }

    pub fn apply_input(&mut self, id: &str, cmd: InputCommand) -> Result<()> {
        self.session_mut(id)?.apply_input(cmd);
        Ok(())
    }

    pub fn tick(&mut self, id: &str, dt: f64) -> Result<StateFrameMessage> {
        self.session_mut(id)?.tick(dt)
    }

    pub fn close(&mut self, id: &str) -> Result<()> {
        self.sessions
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| Error::UnknownSession(id.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    fn session_mut(&mut self, id: &str) -> Result<&mut Session> {
        self.sessions
            .get_mut(id)
            .ok_or_else(|| Error::UnknownSession(id.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::RoomError;
    use crate::geometry::ObstacleBox;
    use crate::locomotion::Mode;
    use approx::assert_abs_diff_eq;

    const DT: f64 = 1.0 / 30.0;

    fn chair_room() -> RoomModel {
        RoomModel::default()
            .with_obstacle(ObstacleBox::new(
                "chair",
                Vec2::new(1.2, 2.0),
                Vec2::new(1.8, 2.5),
                0.9,
            ))
            .unwrap()
    }

    fn cmd(forward: f64, turn: f64, march: bool) -> InputCommand {
        InputCommand {
            movement: MoveIntent {
                forward,
                strafe: 0.0,
            },
            turn,
            march,
            ..Default::default()
        }
    }

    #[test]
    fn session_starts_at_centroid() {
        let mut m = SessionManager::new();
        let id = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        assert_eq!(
            m.session(&id).unwrap().person_position(),
            Vec2::new(1.5, 1.5)
        );
        let msg = m.tick(&id, DT).unwrap();
        assert_eq!(msg.record.mode, Mode::Stationary);
        assert!(!msg.record.warning.sound_on);
    }

    #[test]
    fn invalid_room_is_rejected_with_reason() {
        let mut m = SessionManager::new();
        let json = r#"{"name":"x","boundary":[[0,0],[3,0],[3,3],[0,3]],
            "obstacles":[{"id":"chair","min":[2.5,2.5],"max":[3.5,3.5],"height":1}]}"#;
        match m.create_session_from_json(json, EngineConfig::default()) {
            Err(Error::Room(RoomError::ObstacleOutsideBoundary(id))) => assert_eq!(id, "chair"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ids_are_distinct() {
        let mut m = SessionManager::new();
        let a = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        let b = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        assert_ne!(a, b);
        assert!(matches!(m.tick("nope", DT), Err(Error::UnknownSession(_))));
        assert!(matches!(
            m.apply_input("nope", cmd(0.0, 0.0, false)),
            Err(Error::UnknownSession(_))
        ));
    }

    #[test]
    fn forward_walks_at_max_speed() {
        let mut m = SessionManager::new();
        let room = RoomModel::new(
            "hall",
            vec![
                Vec2::new(-10.0, -10.0),
                Vec2::new(10.0, -10.0),
                Vec2::new(10.0, 10.0),
                Vec2::new(-10.0, 10.0),
            ],
            vec![],
        )
        .unwrap();
        let id = m.create_session(room, EngineConfig::default()).unwrap();
        m.tick(&id, DT).unwrap();
        m.apply_input(&id, cmd(1.0, 0.0, false)).unwrap();
        let mut last = None;
        for _ in 0..60 {
            last = Some(m.tick(&id, DT).unwrap());
        }
        let p = m.session(&id).unwrap().person_position();
        assert_abs_diff_eq!(p.z - 0.0, 1.4 * 60.0 * DT, epsilon = 1e-9);
        assert_eq!(last.unwrap().record.mode, Mode::NaturalWalking);
    }

    #[test]
    fn marching_becomes_wip() {
        let mut m = SessionManager::new();
        let id = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        m.apply_input(&id, cmd(0.0, 0.0, true)).unwrap();
        let modes: Vec<Mode> = (0..90)
            .map(|_| m.tick(&id, DT).unwrap().record.mode)
            .collect();
        assert_eq!(*modes.last().unwrap(), Mode::WalkingInPlace);
        assert!(modes.iter().all(|&m| m != Mode::NaturalWalking));
        let p = m.session(&id).unwrap().person_position();
        assert_eq!(p, Vec2::new(1.5, 1.5));
    }

    #[test]
    fn idle_session_is_static() {
        let mut m = SessionManager::new();
        let id = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        let first = m.tick(&id, DT).unwrap();
        let mut last = first.clone();
        for _ in 0..150 {
            last = m.tick(&id, DT).unwrap();
            assert_eq!(last.record.mode, Mode::Stationary);
        }
        assert_eq!(last.record.real, first.record.real);
        assert_eq!(last.record.avatar, first.record.avatar);
        assert_eq!(last.record.tick, 150);
    }

    #[test]
    fn backing_into_chair_rings() {
        let mut m = SessionManager::new();
        let id = m
            .create_session(chair_room(), EngineConfig::default())
            .unwrap();
        m.tick(&id, DT).unwrap();
        // turn around (right turn at 90°/s for 2 s)
        m.apply_input(&id, cmd(0.0, 1.0, false)).unwrap();
        for _ in 0..60 {
            m.tick(&id, DT).unwrap();
        }
        // facing -z now; back up toward the chair at +z until 0.3 m away
        m.apply_input(&id, cmd(-0.1, 0.0, false)).unwrap();
        let mut sound = false;
        for _ in 0..200 {
            let msg = m.tick(&id, DT).unwrap();
            let chair = msg
                .record
                .warning
                .hazards
                .iter()
                .find(|h| h.id == "chair")
                .unwrap();
            if chair.distance <= 0.3 {
                sound = msg.record.warning.sound_on;
                break;
            }
        }
        assert!(sound);
    }

    #[test]
    fn sessions_are_isolated() {
        let mut m = SessionManager::new();
        let a = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        let b = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        m.apply_input(&a, cmd(1.0, 0.0, false)).unwrap();
        for _ in 0..30 {
            m.tick(&a, DT).unwrap();
            m.tick(&b, DT).unwrap();
        }
        assert_ne!(
            m.session(&a).unwrap().person_position(),
            Vec2::new(1.5, 1.5)
        );
        assert_eq!(
            m.session(&b).unwrap().person_position(),
            Vec2::new(1.5, 1.5)
        );
    }

    #[test]
    fn wire_format() {
        let msg: ClientMessage = serde_json::from_str(
            r#"{"type":"input","t_client":1.5,"move":{"forward":2.0,"strafe":-0.5},"turn":0.2,"march":false}"#,
        )
        .unwrap();
        let ClientMessage::Input(c) = msg else {
            panic!()
        };
        assert_eq!(c.clamped().movement.forward, 1.0);
        let hello: ClientMessage = serde_json::from_str(r#"{"type":"hello"}"#).unwrap();
        assert_eq!(
            hello,
            ClientMessage::Hello {
                room: None,
                config: None
            }
        );

        let mut m = SessionManager::new();
        let id = m
            .create_session(RoomModel::default(), EngineConfig::default())
            .unwrap();
        let frame = ServerMessage::Frame(m.tick(&id, DT).unwrap());
        let v = serde_json::to_value(&frame).unwrap();
        assert_eq!(v["type"], "frame");
        assert_eq!(v["session"], "s1");
        assert_eq!(v["tick"], 0);
        assert!(v["warning"]["hazards"].is_array());
        assert!(v["metrics"]["total_exits"].is_number());
        let back: ServerMessage = serde_json::from_value(v).unwrap();
        assert_eq!(back, frame);
    }
}
