use serde::{Deserialize, Serialize};

use crate::angle::wrap;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

/// Planar robot pose. `theta` is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap(theta),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn distance(&self, other: &Pose2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from this pose's position to `p`, in the world frame.
    pub fn bearing_to(&self, p: &Point2) -> f64 {
        (p.y - self.y).atan2(p.x - self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub v: f64,
    pub w: f64,
}

impl Twist {
    pub const ZERO: Twist = Twist { v: 0.0, w: 0.0 };

    pub const fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    pub fn is_zero(&self) -> bool {
        self.v == 0.0 && self.w == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityLimits {
    pub v_max: f64,
    pub w_max: f64,
}

impl Default for VelocityLimits {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            w_max: 1.5,
        }
    }
}

impl VelocityLimits {
    /// Clamps both components into `[-max, max]`. NaN components become zero.
    pub fn clamp(&self, t: Twist) -> Twist {
        let c = |x: f64, m: f64| if x.is_nan() { 0.0 } else { x.clamp(-m, m) };
        Twist::new(c(t.v, self.v_max), c(t.w, self.w_max))
    }

    pub fn contains(&self, t: &Twist) -> bool {
        t.v.abs() <= self.v_max && t.w.abs() <= self.w_max
    }
}
