use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance_to_obstacle, RoomModel, Vec2};
use crate::locomotion::Mode;

/// Scored outcome of one or more runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task_time: f64,
    pub runs_with_exit: u32,
    pub total_exits: u32,
    pub runs_with_hit: u32,
    pub total_hits: u32,
    pub mode_histogram: BTreeMap<Mode, u64>,
}

impl MetricsReport {
    /// Combines reports of separate runs.
    pub fn merge(&self, other: &MetricsReport) -> MetricsReport {
        let mut mode_histogram = self.mode_histogram.clone();
        for (m, n) in &other.mode_histogram {
            *mode_histogram.entry(*m).or_default() += n;
        }
        MetricsReport {
            task_time: self.task_time + other.task_time,
            runs_with_exit: self.runs_with_exit + other.runs_with_exit,
            total_exits: self.total_exits + other.total_exits,
            runs_with_hit: self.runs_with_hit + other.runs_with_hit,
            total_hits: self.total_hits + other.total_hits,
            mode_histogram,
        }
    }

    pub fn frames(&self) -> u64 {
        self.mode_histogram.values().sum()
    }
}

/// Streams person positions into exit/hit counts. The first observation
/// only establishes the initial inside/contact state.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsAccumulator {
    collision_radius: f64,
    first_t: Option<f64>,
    last_t: f64,
    inside: Option<bool>,
    contacts: Vec<bool>,
    total_exits: u32,
    total_hits: u32,
    histogram: BTreeMap<Mode, u64>,
}

impl MetricsAccumulator {
    pub fn new(collision_radius: f64) -> Self {
        Self {
            collision_radius,
            first_t: None,
            last_t: 0.0,
            inside: None,
            contacts: Vec::new(),
            total_exits: 0,
            total_hits: 0,
            histogram: BTreeMap::new(),
        }
    }

    pub fn observe(&mut self, room: &RoomModel, t: f64, position: Vec2, mode: Mode) {
        let first = self.first_t.is_none();
        self.first_t.get_or_insert(t);
        self.last_t = t;
        *self.histogram.entry(mode).or_default() += 1;

        let inside = room.contains(position);
        if self.inside == Some(true) && !inside {
            self.total_exits += 1;
        }
        self.inside = Some(inside);

        let contacts: Vec<bool> = room
            .obstacles()
            .iter()
            .map(|o| distance_to_obstacle(position, o) <= self.collision_radius)
            .collect();
        if !first {
            self.total_hits += contacts
                .iter()
                .zip(&self.contacts)
                .filter(|(now, before)| **now && !**before)
                .count() as u32;
        }
        self.contacts = contacts;
    }

    pub fn report(&self) -> MetricsReport {
        MetricsReport {
            task_time: self.first_t.map_or(0.0, |t0| self.last_t - t0),
            runs_with_exit: u32::from(self.total_exits > 0),
            total_exits: self.total_exits,
            runs_with_hit: u32::from(self.total_hits > 0),
            total_hits: self.total_hits,
            mode_histogram: self.histogram.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ObstacleBox;

    fn room() -> RoomModel {
        RoomModel::default()
            .with_obstacle(ObstacleBox::new(
                "chair",
                Vec2::new(1.2, 2.0),
                Vec2::new(1.8, 2.5),
                0.9,
            ))
            .unwrap()
    }

    fn feed(path: &[(f64, f64)]) -> MetricsReport {
        let room = room();
        let mut m = MetricsAccumulator::new(0.2);
        for (i, &(x, z)) in path.iter().enumerate() {
            m.observe(&room, i as f64 * 0.1, Vec2::new(x, z), Mode::NaturalWalking);
        }
        m.report()
    }

    #[test]
    fn exit_rearms_on_reentry() {
        let r = feed(&[
            (1.0, 1.0),
            (-0.1, 1.0),
            (-0.2, 1.0),
            (0.5, 1.0),
            (-0.1, 1.0),
        ]);
        assert_eq!(r.total_exits, 2);
        assert_eq!(r.runs_with_exit, 1);
        assert_eq!(r.total_hits, 0);
    }

    #[test]
    fn graze_counts_once() {
        let r = feed(&[(1.5, 1.0), (1.5, 1.7), (1.5, 1.85), (1.5, 1.7), (1.5, 1.0)]);
        assert_eq!((r.total_exits, r.total_hits, r.runs_with_hit), (0, 1, 1));
        assert!((r.task_time - 0.4).abs() < 1e-12);
    }

    #[test]
    fn starting_outside_is_not_an_exit() {
        let r = feed(&[(-1.0, 1.0), (-1.0, 1.1)]);
        assert_eq!(r.total_exits, 0);
    }

    #[test]
    fn merge_sums() {
        let a = feed(&[(1.0, 1.0), (-0.1, 1.0)]);
        let b = feed(&[(1.5, 1.0), (1.5, 1.9)]);
        let m = a.merge(&b);
        assert_eq!(
            (
                m.total_exits,
                m.total_hits,
                m.runs_with_exit,
                m.runs_with_hit
            ),
            (1, 1, 1, 1)
        );
        assert_eq!(m.frames(), 4);
    }
}
