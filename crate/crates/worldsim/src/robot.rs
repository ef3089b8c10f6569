use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use teleop_core::{Pose2D, Twist, VelocityLimits};

use crate::noise::SensorNoise;
use crate::world::WorldModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// Ground truth.
    pub pose: Pose2D,
    /// Dead-reckoned estimate from wheel odometry.
    pub odom_pose: Pose2D,
    /// Twist actually executed during the last step.
    pub twist: Twist,
    pub stamp: f64,
}

impl RobotState {
    pub fn at(pose: Pose2D) -> Self {
        Self {
            pose,
            odom_pose: pose,
            twist: Twist::ZERO,
            stamp: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: RobotState,
    pub collided: bool,
}

/// Forward-Euler unicycle step.
pub fn integrate(pose: Pose2D, twist: Twist, dt: f64) -> Pose2D {
    Pose2D::new(
        pose.x + twist.v * pose.theta.cos() * dt,
        pose.y + twist.v * pose.theta.sin() * dt,
        pose.theta + twist.w * dt,
    )
}

/// Advances the ground-truth pose. A step that would bring the robot within
/// `robot_radius` of any geometry is refused: the robot stays put with a zero
/// executed twist and the collision flag set.
pub fn step_robot(
    world: &WorldModel,
    s: &RobotState,
    cmd: Twist,
    dt: f64,
    limits: &VelocityLimits,
) -> StepOutcome {
    let cmd = limits.clamp(cmd);
    let next = integrate(s.pose, cmd, dt);
    let moved = next.x != s.pose.x || next.y != s.pose.y;
    if moved && world.collides(next.position(), world.robot_radius) {
        return StepOutcome {
            state: RobotState {
                twist: Twist::ZERO,
                stamp: s.stamp + dt,
                ..*s
            },
            collided: true,
        };
    }
    StepOutcome {
        state: RobotState {
            pose: next,
            twist: cmd,
            stamp: s.stamp + dt,
            ..*s
        },
        collided: false,
    }
}

/// Integrates the executed twist, perturbed by zero-mean noise proportional to
/// the motion, into the odometry estimate. A stationary robot stays put.
pub fn read_odometry<R: Rng + ?Sized>(s: &RobotState, noise: &SensorNoise, dt: f64, rng: &mut R) -> Pose2D {
    let Twist { v, w } = s.twist;
    if v == 0.0 && w == 0.0 {
        return s.odom_pose;
    }
    let (sv, sw) = noise.odom_noise_std;
    let mut noisy = s.twist;
    if sv > 0.0 {
        let n: f64 = rng.sample(StandardNormal);
        noisy.v = v + sv * v.abs() * n;
    }
    if sw > 0.0 {
        let n: f64 = rng.sample(StandardNormal);
        noisy.w = w + sw * (w.abs() + v.abs()) * n;
    }
    integrate(s.odom_pose, noisy, dt)
}
