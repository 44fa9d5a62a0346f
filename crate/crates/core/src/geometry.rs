//! Ground-plane geometry for the room model.
//!
//! Coordinates follow a y-up convention: the ground plane is spanned by x and
//! z. A yaw of zero faces +z and positive yaw turns toward +x, so for a person
//! facing +z the +x side is their left. Bearings use the same convention:
//! positive means "to the left of the gaze heading".

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RoomError};

const EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Projection onto the ground plane.
    pub fn ground(self) -> Vec2 {
        Vec2::new(self.x, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

/// A point or vector on the ground plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, z: 0.0 };

    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    /// Unit vector for a yaw angle.
    pub fn from_yaw(yaw: f64) -> Self {
        Self::new(yaw.sin(), yaw.cos())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.z * o.z
    }

    /// z-component of the 3D cross product of (x, 0, z) vectors, taken in
    /// the (x, z) plane as if it were (x, y).
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.z - self.z * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.z)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Yaw of this direction (atan2 in the yaw convention).
    pub fn yaw(self) -> f64 {
        self.x.atan2(self.z)
    }

    /// Rotates by `angle` in the yaw convention (positive toward +x from +z).
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(self.x * c + self.z * s, self.z * c - self.x * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, z]: [f64; 2]) -> Self {
        Self { x, z }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.z]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.z + o.z)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.z - o.z)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.z * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.z)
    }
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

/// Person's ground position and gaze heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub position: Vec2,
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(position: Vec2, yaw: f64) -> Self {
        Self {
            position,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_yaw(self.yaw)
    }
}

/// Axis-aligned obstacle; only the footprint takes part in proximity math.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleBox {
    pub id: String,
    pub min: Vec2,
    pub max: Vec2,
    pub height: f64,
    pub label: String,
}

impl ObstacleBox {
    pub fn new(id: impl Into<String>, min: Vec2, max: Vec2, height: f64) -> Self {
        Self {
            id: id.into(),
            min,
            max,
            height,
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.z >= self.min.z && p.z <= self.max.z
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.z),
            self.max,
            Vec2::new(self.min.x, self.max.z),
        ]
    }

    fn validate(&self) -> Result<(), RoomError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.height.is_finite()) {
            return Err(RoomError::NonFinite(format!("obstacle `{}`", self.id)));
        }
        if !(self.min.x < self.max.x && self.min.z < self.max.z) {
            return Err(RoomError::InvalidFootprint(self.id.clone()));
        }
        if self.height <= 0.0 {
            return Err(RoomError::NonPositiveHeight(self.id.clone()));
        }
        Ok(())
    }
}

/// One edge of the tracking-area boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitSegment {
    pub id: String,
    pub a: Vec2,
    pub b: Vec2,
    /// Unit normal pointing into the tracking area.
    pub normal: Vec2,
}

impl LimitSegment {
    /// Builds a segment whose inside is to the left of a→b when the boundary
    /// runs counter-clockwise in the (x, z) plane drawn with x right and z up.
    pub fn new(id: impl Into<String>, a: Vec2, b: Vec2, normal: Vec2) -> Self {
        Self {
            id: id.into(),
            a,
            b,
            normal,
        }
    }

    fn closest_point(&self, p: Vec2) -> Vec2 {
        let d = self.b - self.a;
        let len2 = d.dot(d);
        let t = if len2 > 0.0 {
            ((p - self.a).dot(d) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.a + d * t
    }
}

/// Ground distance from `p` to the obstacle footprint; zero inside.
pub fn distance_to_obstacle(p: Vec2, o: &ObstacleBox) -> f64 {
    p.distance(closest_point_on_box(p, o))
}

fn closest_point_on_box(p: Vec2, o: &ObstacleBox) -> Vec2 {
    Vec2::new(p.x.clamp(o.min.x, o.max.x), p.z.clamp(o.min.z, o.max.z))
}

/// Signed distance to a limit: positive on the inside, negative past it.
pub fn distance_to_limit(p: Vec2, s: &LimitSegment) -> f64 {
    let d = p.distance(s.closest_point(p));
    if (p - s.a).dot(s.normal) < 0.0 {
        -d
    } else {
        d
    }
}

/// Signed angle from the gaze heading to `target`, positive to the left.
pub fn bearing_to(pose: &Pose2D, target: Vec2) -> Result<f64> {
    let d = target - pose.position;
    if d.norm() < EPS {
        return Err(Error::DegenerateBearing);
    }
    Ok(normalize_angle(d.yaw() - pose.yaw))
}

/// Closed field-of-view test.
pub fn in_fov(bearing: f64, half_angle: f64) -> bool {
    bearing.abs() <= half_angle
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HazardKind {
    Limit,
    Obstacle,
}

/// Borrowed view of either hazard kind.
#[derive(Clone, Copy, Debug)]
pub enum Hazard<'a> {
    Limit(&'a LimitSegment),
    Obstacle(&'a ObstacleBox),
}

impl<'a> Hazard<'a> {
    pub fn id(&self) -> &'a str {
        match self {
            Hazard::Limit(s) => &s.id,
            Hazard::Obstacle(o) => &o.id,
        }
    }

    pub fn kind(&self) -> HazardKind {
        match self {
            Hazard::Limit(_) => HazardKind::Limit,
            Hazard::Obstacle(_) => HazardKind::Obstacle,
        }
    }

    /// Signed for limits, non-negative for obstacles.
    pub fn distance(&self, p: Vec2) -> f64 {
        match self {
            Hazard::Limit(s) => distance_to_limit(p, s),
            Hazard::Obstacle(o) => distance_to_obstacle(p, o),
        }
    }

    /// Bearing toward the hazard. When the person stands on the hazard itself
    /// the direction falls back to the obstacle center or the outward normal.
    pub fn bearing_from(&self, pose: &Pose2D) -> f64 {
        let p = pose.position;
        if let Ok(b) = bearing_to(pose, nearest_hazard_point(p, *self)) {
            return b;
        }
        let fallback = match self {
            Hazard::Limit(s) => p - s.normal,
            Hazard::Obstacle(o) => o.center(),
        };
        bearing_to(pose, fallback).unwrap_or(0.0)
    }
}

/// Closest point of the hazard geometry to `p`.
pub fn nearest_hazard_point(p: Vec2, hazard: Hazard<'_>) -> Vec2 {
    match hazard {
        Hazard::Limit(s) => s.closest_point(p),
        Hazard::Obstacle(o) => closest_point_on_box(p, o),
    }
}

/// On-disk room description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoomFile {
    #[serde(default)]
    pub name: String,
    pub boundary: Vec<[f64; 2]>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstacleFile {
    pub id: String,
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub height: f64,
    #[serde(default)]
    pub label: String,
}

/// Tracking-area boundary plus obstacles. Always validated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RoomFile", into = "RoomFile")]
pub struct RoomModel {
    pub name: String,
    vertices: Vec<Vec2>,
    boundary: Vec<LimitSegment>,
    obstacles: Vec<ObstacleBox>,
}

impl RoomModel {
    /// Builds and validates a room. The boundary may be given in either
    /// winding; normals are oriented toward the interior.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Vec2>,
        obstacles: Vec<ObstacleBox>,
    ) -> Result<Self, RoomError> {
        let n = vertices.len();
        if n < 3 {
            return Err(RoomError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(RoomError::NonFinite(format!("boundary vertex {i}")));
        }
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) < EPS {
                return Err(RoomError::DegenerateEdge(i));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() < EPS {
            return Err(RoomError::ZeroArea);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(RoomError::SelfIntersecting(i, j));
                }
            }
        }
        // inside lies to the left of each edge for positive area
        let side = area.signum();
        let boundary = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let d = b - a;
                let normal = Vec2::new(-d.z, d.x) * (side / d.norm());
                LimitSegment::new(format!("limit-{i}"), a, b, normal)
            })
            .collect::<Vec<_>>();

        let mut ids: HashSet<&str> = boundary.iter().map(|s| s.id.as_str()).collect();
        for o in &obstacles {
            o.validate()?;
            if !ids.insert(o.id.as_str()) {
                return Err(RoomError::DuplicateId(o.id.clone()));
            }
        }
        let room = Self {
            name: name.into(),
            vertices,
            boundary,
            obstacles,
        };
        for o in &room.obstacles {
            if !room.footprint_inside(o) {
                return Err(RoomError::ObstacleOutsideBoundary(o.id.clone()));
            }
        }
        Ok(room)
    }

    /// Empty square room with one corner at the origin.
    pub fn square(side: f64) -> Self {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(side, 0.0),
            Vec2::new(side, side),
            Vec2::new(0.0, side),
        ];
        Self::new("square", v, Vec::new()).expect("square room is valid")
    }

    pub fn with_obstacle(self, o: ObstacleBox) -> Result<Self, RoomError> {
        let mut obstacles = self.obstacles;
        obstacles.push(o);
        Self::new(self.name, self.vertices, obstacles)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn boundary(&self) -> &[LimitSegment] {
        &self.boundary
    }

    pub fn obstacles(&self) -> &[ObstacleBox] {
        &self.obstacles
    }

    /// Limits first, then obstacles, in file order.
    pub fn hazards(&self) -> impl Iterator<Item = Hazard<'_>> {
        self.boundary
            .iter()
            .map(Hazard::Limit)
            .chain(self.obstacles.iter().map(Hazard::Obstacle))
    }

    /// Even-odd point-in-polygon; points on the boundary count as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        if self
            .boundary
            .iter()
            .any(|s| p.distance(s.closest_point(p)) < 1e-12)
        {
            return true;
        }
        point_in_polygon(p, &self.vertices)
    }

    /// Area centroid of the boundary polygon.
    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let mut cx = 0.0;
        let mut cz = 0.0;
        let mut a2 = 0.0;
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cz += (p.z + q.z) * w;
        }
        Vec2::new(cx / (3.0 * a2), cz / (3.0 * a2))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn footprint_inside(&self, o: &ObstacleBox) -> bool {
        let corners = o.corners();
        if !corners.iter().all(|&c| self.contains(c)) {
            return false;
        }
        // concave boundaries can still cut through a box whose corners are inside
        let n = self.vertices.len();
        for i in 0..n {
            let v = self.vertices[i];
            if v.x > o.min.x && v.x < o.max.x && v.z > o.min.z && v.z < o.max.z {
                return false;
            }
            let (a, b) = (v, self.vertices[(i + 1) % n]);
            for k in 0..4 {
                if segments_cross_properly(a, b, corners[k], corners[(k + 1) % 4]) {
                    return false;
                }
            }
        }
        true
    }
}

impl TryFrom<RoomFile> for RoomModel {
    type Error = RoomError;

    fn try_from(f: RoomFile) -> Result<Self, RoomError> {
        let vertices = f.boundary.into_iter().map(Vec2::from).collect();
        let obstacles = f
            .obstacles
            .into_iter()
            .map(|o| ObstacleBox {
                id: o.id,
                min: o.min.into(),
                max: o.max.into(),
                height: o.height,
                label: o.label,
            })
            .collect();
        RoomModel::new(f.name, vertices, obstacles)
    }
}

impl From<RoomModel> for RoomFile {
    fn from(r: RoomModel) -> Self {
        RoomFile {
            name: r.name,
            boundary: r.vertices.into_iter().map(Into::into).collect(),
            obstacles: r
                .obstacles
                .into_iter()
                .map(|o| ObstacleFile {
                    id: o.id,
                    min: o.min.into(),
                    max: o.max.into(),
                    height: o.height,
                    label: o.label,
                })
                .collect(),
        }
    }
}

impl Default for RoomModel {
    /// The 3 m × 3 m tracking area.
    fn default() -> Self {
        Self::square(3.0)
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.z > p.z) != (b.z > p.z) {
            let x = a.x + (p.z - a.z) * (b.x - a.x) / (b.z - a.z);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) - EPS
        && p.x <= a.x.max(b.x) + EPS
        && p.z >= a.z.min(b.z) - EPS
        && p.z <= a.z.max(b.z) + EPS
}

/// Closed segment intersection, touching included.
fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    (d1.abs() <= EPS && on_segment(c, d, a))
        || (d2.abs() <= EPS && on_segment(c, d, b))
        || (d3.abs() <= EPS && on_segment(a, b, c))
        || (d4.abs() <= EPS && on_segment(a, b, d))
}

/// Strict crossing: interiors intersect at a single point.
fn segments_cross_properly(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn unit_box() -> ObstacleBox {
        ObstacleBox::new("b", Vec2::new(1.0, -0.5), Vec2::new(2.0, 0.5), 1.0)
    }

    fn wall() -> LimitSegment {
        // z = 0 wall, interior toward +z
        LimitSegment::new(
            "w",
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(0.0, 1.0),
        )
    }

    #[test]
    fn obstacle_distance_examples() {
        assert_eq!(distance_to_obstacle(Vec2::ZERO, &unit_box()), 1.0);
        assert_eq!(distance_to_obstacle(Vec2::new(1.5, 0.2), &unit_box()), 0.0);
        let corner = ObstacleBox::new("c", Vec2::new(-1.0, -1.0), Vec2::new(0.0, 0.0), 1.0);
        assert_abs_diff_eq!(distance_to_obstacle(Vec2::new(3.0, 4.0), &corner), 5.0);
    }

    #[test]
    fn limit_distance_sign() {
        assert_abs_diff_eq!(distance_to_limit(Vec2::new(1.0, 0.5), &wall()), 0.5);
        assert_eq!(distance_to_limit(Vec2::new(1.0, 0.0), &wall()), 0.0);
        assert_abs_diff_eq!(distance_to_limit(Vec2::new(1.0, -0.2), &wall()), -0.2);
        // beyond the end the clamped endpoint is used
        assert_abs_diff_eq!(distance_to_limit(Vec2::new(7.0, 3.0), &wall()), 5.0);
    }

    #[test]
    fn bearing_examples() {
        let pose = Pose2D::new(Vec2::ZERO, 0.0);
        assert_eq!(bearing_to(&pose, Vec2::new(0.0, 2.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(bearing_to(&pose, Vec2::new(-1.0, 0.0)).unwrap(), -FRAC_PI_2);
        assert_abs_diff_eq!(bearing_to(&pose, Vec2::new(1.0, 0.0)).unwrap(), FRAC_PI_2);
        assert_abs_diff_eq!(bearing_to(&pose, Vec2::new(0.0, -1.0)).unwrap(), PI);
        assert!(matches!(
            bearing_to(&pose, Vec2::ZERO),
            Err(Error::DegenerateBearing)
        ));
    }

    #[test]
    fn fov_is_closed() {
        assert!(in_fov(0.0, FRAC_PI_4));
        assert!(!in_fov(PI, FRAC_PI_4));
        assert!(in_fov(FRAC_PI_4, FRAC_PI_4));
        assert!(in_fov(-FRAC_PI_4, FRAC_PI_4));
    }

    #[test]
    fn nearest_point_examples() {
        let b = unit_box();
        assert_eq!(
            nearest_hazard_point(Vec2::ZERO, Hazard::Obstacle(&b)),
            Vec2::new(1.0, 0.0)
        );
        let inside = Vec2::new(1.2, 0.1);
        assert_eq!(nearest_hazard_point(inside, Hazard::Obstacle(&b)), inside);
        let w = wall();
        assert_eq!(
            nearest_hazard_point(Vec2::new(5.0, 1.0), Hazard::Limit(&w)),
            w.b
        );
        assert_eq!(
            nearest_hazard_point(Vec2::new(-2.0, -1.0), Hazard::Limit(&w)),
            w.a
        );
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), PI);
        assert_abs_diff_eq!(normalize_angle(-PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(
            normalize_angle(-FRAC_PI_2 - TAU),
            -FRAC_PI_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn default_room_geometry() {
        let room = RoomModel::default();
        assert_eq!(room.boundary().len(), 4);
        assert_eq!(room.centroid(), Vec2::new(1.5, 1.5));
        for s in room.boundary() {
            assert_abs_diff_eq!(distance_to_limit(Vec2::new(1.5, 1.5), s), 1.5);
            assert_abs_diff_eq!(s.normal.norm(), 1.0);
        }
        assert!(room.contains(Vec2::new(0.0, 1.0)));
        assert!(!room.contains(Vec2::new(-0.01, 1.0)));
    }

    #[test]
    fn clockwise_boundary_gets_inward_normals() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 2.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 0.0),
        ];
        let room = RoomModel::new("cw", v, vec![]).unwrap();
        for s in room.boundary() {
            assert!(distance_to_limit(Vec2::new(1.0, 1.0), s) > 0.0);
        }
    }

    #[test]
    fn room_validation_errors() {
        let sq = || {
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(3.0, 0.0),
                Vec2::new(3.0, 3.0),
                Vec2::new(0.0, 3.0),
            ]
        };
        let outside = ObstacleBox::new("chair", Vec2::new(2.5, 2.5), Vec2::new(3.5, 3.0), 0.8);
        assert_eq!(
            RoomModel::new("r", sq(), vec![outside]),
            Err(RoomError::ObstacleOutsideBoundary("chair".into()))
        );
        let flat = ObstacleBox::new("x", Vec2::new(1.0, 1.0), Vec2::new(1.0, 2.0), 0.8);
        assert_eq!(
            RoomModel::new("r", sq(), vec![flat]),
            Err(RoomError::InvalidFootprint("x".into()))
        );
        let low = ObstacleBox::new("x", Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0), 0.0);
        assert_eq!(
            RoomModel::new("r", sq(), vec![low]),
            Err(RoomError::NonPositiveHeight("x".into()))
        );
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 2.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(0.0, 3.0),
        ];
        assert!(matches!(
            RoomModel::new("r", bowtie, vec![]),
            Err(RoomError::SelfIntersecting(_, _))
        ));
        assert_eq!(
            RoomModel::new("r", sq()[..2].to_vec(), vec![]),
            Err(RoomError::TooFewVertices(2))
        );
        let a = ObstacleBox::new("a", Vec2::new(1.0, 1.0), Vec2::new(1.5, 1.5), 0.5);
        assert_eq!(
            RoomModel::new("r", sq(), vec![a.clone(), a]),
            Err(RoomError::DuplicateId("a".into()))
        );
    }

    #[test]
    fn concave_room_rejects_box_over_notch() {
        // L-shaped room; the box corners all sit inside but it straddles the notch
        let l = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(3.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 3.0),
            Vec2::new(0.0, 3.0),
        ];
        let ok = ObstacleBox::new("ok", Vec2::new(0.2, 0.2), Vec2::new(0.8, 2.5), 1.0);
        assert!(RoomModel::new("l", l.clone(), vec![ok]).is_ok());
        let bad = ObstacleBox::new("bad", Vec2::new(0.5, 0.5), Vec2::new(2.0, 2.0), 1.0);
        assert!(RoomModel::new("l", l, vec![bad]).is_err());
    }

    #[test]
    fn room_json_round_trip() {
        let json = r#"{"name":"lab","boundary":[[0,0],[3,0],[3,3],[0,3]],
            "obstacles":[{"id":"chair","min":[1.2,2.0],"max":[1.8,2.5],"height":0.9,"label":"chair"}]}"#;
        let room = RoomModel::from_json(json).unwrap();
        assert_eq!(room.obstacles()[0].label, "chair");
        let back: RoomModel = serde_json::from_str(&serde_json::to_string(&room).unwrap()).unwrap();
        assert_eq!(back, room);
    }

    fn arb_point() -> impl Strategy<Value = Vec2> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, z)| Vec2::new(x, z))
    }

    fn arb_box() -> impl Strategy<Value = ObstacleBox> {
        (arb_point(), 0.01..4.0f64, 0.01..4.0f64)
            .prop_map(|(p, w, d)| ObstacleBox::new("o", p, p + Vec2::new(w, d), 1.0))
    }

    proptest! {
        #[test]
        fn obstacle_distance_is_1_lipschitz(o in arb_box(), p in arb_point(), step in arb_point()) {
            let q = p + step * 0.1;
            let lhs = (distance_to_obstacle(p, &o) - distance_to_obstacle(q, &o)).abs();
            prop_assert!(lhs <= p.distance(q) + 1e-12);
        }

        #[test]
        fn zero_distance_iff_inside(o in arb_box(), p in arb_point()) {
            prop_assert_eq!(distance_to_obstacle(p, &o) == 0.0, o.contains(p));
        }

        #[test]
        fn bearing_is_rotation_invariant(
            pos in arb_point(), off in arb_point(), yaw in -PI..PI, theta in -PI..PI,
        ) {
            prop_assume!(off.norm() > 1e-3);
            let before = bearing_to(&Pose2D::new(pos, yaw), pos + off).unwrap();
            let after = bearing_to(&Pose2D::new(pos, yaw + theta), pos + off.rotated(theta)).unwrap();
            let diff = normalize_angle(after - before);
            prop_assert!(diff.abs() < 1e-9, "diff {}", diff);
        }

        #[test]
        fn nearest_point_realizes_distance(o in arb_box(), p in arb_point(), a in arb_point(), b in arb_point()) {
            let q = nearest_hazard_point(p, Hazard::Obstacle(&o));
            prop_assert!(o.contains(q));
            prop_assert!((p.distance(q) - distance_to_obstacle(p, &o)).abs() < 1e-9);

            prop_assume!(a.distance(b) > 1e-3);
            let d = b - a;
            let s = LimitSegment::new("s", a, b, Vec2::new(-d.z, d.x) * (1.0 / d.norm()));
            let q = nearest_hazard_point(p, Hazard::Limit(&s));
            // on the segment: collinear and between the endpoints
            prop_assert!((q - a).cross(d).abs() / d.norm() < 1e-9);
            prop_assert!((a.distance(q) + q.distance(b) - d.norm()).abs() < 1e-9);
            prop_assert!((p.distance(q) - distance_to_limit(p, &s).abs()).abs() < 1e-9);
        }
    }
}
