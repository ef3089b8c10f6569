use std::f64::consts::PI;

use proptest::prelude::*;
use teleop_core::{Point2, PlanPath, Pose2D, VelocityLimits};
use teleop_navigation::{follow_path, goal_reached, FollowerParams, GoalTolerance};
use teleop_worldsim::{Bounds, SensorNoise, Simulator, WorldModel};

fn straight_path() -> PlanPath {
    let pts: Vec<Point2> = (0..=60).map(|i| Point2::new(-1.5 + i as f64 * 0.05, 0.0)).collect();
    PlanPath::from_points(0.0, &pts, 0.0)
}

/// Seconds until the goal check passes, or `None` on collision/timeout.
fn drive(start: Pose2D) -> Option<f64> {
    let world = WorldModel {
        robot_start: start,
        ..WorldModel::empty(Bounds {
            min_x: -10.0,
            min_y: -10.0,
            max_x: 10.0,
            max_y: 10.0,
        })
    };
    let mut sim = Simulator::new(world, SensorNoise::off(0), VelocityLimits::default());
    let path = straight_path();
    let goal = *path.waypoints.last().unwrap();
    let tol = GoalTolerance {
        heading: None,
        ..GoalTolerance::default()
    };
    let params = FollowerParams::default();
    while sim.time() < 60.0 {
        let cmd = follow_path(&sim.state.odom_pose, &path, &params);
        if cmd.goal_reached {
            return goal_reached(&sim.state.pose, &goal, &tol).then(|| sim.time());
        }
        if sim.step(cmd.twist).collided {
            return None;
        }
    }
    None
}

#[test]
fn on_path_start_arrives_at_cruise_speed() {
    let t = drive(Pose2D::new(-1.5, 0.0, 0.0)).unwrap();
    // 2.95 m at 0.5 m/s plus rounding to whole ticks
    assert!((t - 5.9).abs() < 0.05, "{t}");
}

#[test]
fn facing_backwards_still_arrives() {
    assert!(drive(Pose2D::new(-1.5, 0.0, PI)).is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn converges_from_within_two_metres(r in 0.0f64..2.0, bearing in -PI..PI, theta in -PI..PI, along in 0.0f64..1.0) {
        let anchor = Point2::new(-1.5 + 3.0 * along, 0.0);
        let start = Pose2D::new(anchor.x + r * bearing.cos(), anchor.y + r * bearing.sin(), theta);
        prop_assert!(drive(start).is_some());
    }
}
