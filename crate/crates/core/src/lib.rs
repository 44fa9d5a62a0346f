//! Locomotion classification and real-world hazard warnings for walking
//! around a virtual environment inside a small, cluttered room.
//!
//! The pipeline per tracker frame:
//!
//! 1. [`tracking`] smooths the joints and measures chest speed and knee steps.
//! 2. [`locomotion`] picks the walking mode and moves the avatar.
//! 3. [`warning`] grades every wall and obstacle by proximity and decides on
//!    arrows and the sound alert.
//!
//! [`sim`] replays traces and scores the runs. [`service`] hosts live
//! sessions. [`calibration`] derives the walking-speed threshold.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod config;
pub mod error;
pub mod geometry;
pub mod locomotion;
pub mod service;
pub mod sim;
pub mod tracking;
pub mod warning;

pub use config::EngineConfig;
pub use error::{Error, Result, RoomError};
pub use geometry::{ObstacleBox, Pose2D, RoomModel, Vec2, Vec3};
pub use locomotion::Mode;
pub use warning::Zone;
