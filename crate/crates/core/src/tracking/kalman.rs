//! Constant-velocity Kalman smoothing of joint positions, one independent
//! 2-state filter per axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Position/velocity filter for one axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisFilter {
    pub position: f64,
    pub velocity: f64,
    /// Error covariance of (position, velocity).
    pub covariance: [[f64; 2]; 2],
}

impl AxisFilter {
    fn new(position: f64, r: f64, initial_velocity_var: f64) -> Self {
        Self {
            position,
            velocity: 0.0,
            covariance: [[r, 0.0], [0.0, initial_velocity_var]],
        }
    }

    fn step(&mut self, z: f64, dt: f64, q: f64, r: f64) {
        // predict
        let [[p00, p01], [_, p11]] = self.covariance;
        let x = self.position + dt * self.velocity;
        let v = self.velocity;
        let dt2 = dt * dt;
        let pp00 = p00 + dt * (2.0 * p01 + dt * p11) + q * dt2 * dt / 3.0;
        let pp01 = p01 + dt * p11 + q * dt2 / 2.0;
        let pp11 = p11 + q * dt;

        // update, Joseph form for the covariance
        let s = pp00 + r;
        let k0 = pp00 / s;
        let k1 = pp01 / s;
        let innovation = z - x;
        self.position = x + k0 * innovation;
        self.velocity = v + k1 * innovation;

        // (I - K H) P (I - K H)^T + K r K^T with H = [1, 0]
        let a00 = 1.0 - k0;
        let n00 = a00 * a00 * pp00 + k0 * k0 * r;
        let n01 = a00 * (pp01 - k1 * pp00) + k0 * k1 * r;
        let n11 = pp11 - 2.0 * k1 * pp01 + k1 * k1 * pp00 + k1 * k1 * r;
        self.covariance = [[n00, n01], [n01, n11]];
    }
}

/// Smoothing state for one joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointFilterState {
    pub axes: [AxisFilter; 3],
    /// Process-noise intensity, (m/s²)².
    pub q: f64,
    /// Measurement-noise variance, m².
    pub r: f64,
}

impl JointFilterState {
    pub fn new(initial: Vec3, q: f64, r: f64, initial_velocity_var: f64) -> Result<Self> {
        if !(q > 0.0 && r > 0.0 && initial_velocity_var >= 0.0) {
            return Err(Error::Config(format!(
                "kalman noise must be positive (q={q}, r={r})"
            )));
        }
        let axis = |p| AxisFilter::new(p, r, initial_velocity_var);
        Ok(Self {
            axes: [axis(initial.x), axis(initial.y), axis(initial.z)],
            q,
            r,
        })
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(
            self.axes[0].position,
            self.axes[1].position,
            self.axes[2].position,
        )
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(
            self.axes[0].velocity,
            self.axes[1].velocity,
            self.axes[2].velocity,
        )
    }

    /// One predict/update cycle; returns the posterior position.
    pub fn update(&mut self, measurement: Vec3, dt: f64) -> Result<Vec3> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveDt(dt));
        }
        let z = [measurement.x, measurement.y, measurement.z];
        for (axis, z) in self.axes.iter_mut().zip(z) {
            axis.step(z, dt, self.q, self.r);
        }
        Ok(self.position())
    }
}
