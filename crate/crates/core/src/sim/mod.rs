//! Trace-driven simulation: the full pipeline over a skeleton trace, with a
//! JSON-lines log of every tick.

pub mod gait;
pub mod metrics;
pub mod pipeline;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::RoomModel;
use crate::tracking::SkeletonFrame;

pub use gait::{
    generate_gait, BodyParams, GaitKind, GaitParams, GaitSegment, GaitSynth, SynthMotion,
};
pub use metrics::{MetricsAccumulator, MetricsReport};
pub use pipeline::{FrameRecord, Pipeline, RealPose};

/// Frames earlier than this after the first one are excluded from
/// recognition-rate statistics (filter and speed window settling), s.
pub const WARM_UP: f64 = 1.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub room: RoomModel,
    #[serde(default)]
    pub engine: EngineConfig,
}

/// One line of a frame log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LogLine {
    Header {
        room: RoomModel,
        config: EngineConfig,
    },
    Frame(FrameRecord),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub metrics: MetricsReport,
    pub frames: Vec<FrameRecord>,
}

/// Runs the pipeline over every frame of `trace`.
pub fn run_trace(cfg: &SimConfig, trace: &[SkeletonFrame]) -> Result<SimOutput> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    check_monotone(trace)?;
    let mut pipeline = Pipeline::new(cfg.room.clone(), cfg.engine.clone())?;
    let frames = trace
        .iter()
        .map(|f| pipeline.step(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimOutput {
        metrics: pipeline.metrics(),
        frames,
    })
}

fn check_monotone(trace: &[SkeletonFrame]) -> Result<()> {
    for (i, w) in trace.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(Error::NonMonotonic {
                line: i + 2,
                t: w[1].t,
                prev: w[0].t,
            });
        }
    }
    Ok(())
}

/// Writes the header line followed by one line per frame.
pub fn write_log<W: Write>(mut w: W, cfg: &SimConfig, frames: &[FrameRecord]) -> Result<()> {
    let header = LogLine::Header {
        room: cfg.room.clone(),
        config: cfg.engine.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for f in frames {
        serde_json::to_writer(&mut w, &LogLine::Frame(f.clone()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn log_bytes(cfg: &SimConfig, frames: &[FrameRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_log(&mut buf, cfg, frames).expect("writing to memory");
    buf
}

/// Parses a frame log. The header must come first.
pub fn read_log<R: BufRead>(r: R) -> Result<(SimConfig, Vec<FrameRecord>)> {
    let mut cfg = None;
    let mut frames = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LogLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        match (parsed, &cfg) {
            (LogLine::Header { room, config }, None) => {
                cfg = Some(SimConfig {
                    room,
                    engine: config,
                })
            }
            (LogLine::Header { .. }, Some(_)) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "second header".into(),
                })
            }
            (LogLine::Frame(_), None) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "frame before header".into(),
                })
            }
            (LogLine::Frame(f), Some(_)) => frames.push(f),
        }
    }
    let cfg = cfg.ok_or(Error::Parse {
        line: 0,
        message: "missing header".into(),
    })?;
    Ok((cfg, frames))
}

/// Recomputes the metrics of a logged run from its positions and modes.
pub fn metrics_from_log(cfg: &SimConfig, frames: &[FrameRecord]) -> MetricsReport {
    let mut acc = MetricsAccumulator::new(cfg.engine.sim.collision_radius);
    for f in frames {
        acc.observe(&cfg.room, f.t, f.real.position, f.mode);
    }
    acc.report()
}

/// Two runs over the same inputs give byte-identical logs.
pub fn replay_determinism_check(cfg: &SimConfig, trace: &[SkeletonFrame]) -> bool {
    match (run_trace(cfg, trace), run_trace(cfg, trace)) {
        (Ok(a), Ok(b)) => log_bytes(cfg, &a.frames) == log_bytes(cfg, &b.frames),
        _ => false,
    }
}

/// Reads a JSON-lines skeleton trace; errors carry the 1-based line number.
pub fn read_trace<R: BufRead>(r: R) -> Result<Vec<SkeletonFrame>> {
    let mut frames: Vec<SkeletonFrame> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: SkeletonFrame = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !f.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: "non-finite value".into(),
            });
        }
        if let Some(prev) = frames.last() {
            if !(f.t > prev.t) {
                return Err(Error::NonMonotonic {
                    line: i + 1,
                    t: f.t,
                    prev: prev.t,
                });
            }
        }
        frames.push(f);
    }
    if frames.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(frames)
}

pub fn write_trace<W: Write>(mut w: W, frames: &[SkeletonFrame]) -> Result<()> {
    for f in frames {
        serde_json::to_writer(&mut w, f)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
