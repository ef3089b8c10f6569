use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use teleop_core::{LaserScan, Pose2D};

use crate::geometry::ray_segment;
use crate::noise::SensorNoise;
use crate::world::WorldModel;

/// Scan header parameters. Defaults model a 1147-sample, 5.5 Hz, 0.15–12 m
/// planar LiDAR whose first ray points along the robot heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    pub samples: usize,
    pub angle_min: f64,
    pub range_min: f64,
    pub range_max: f64,
    pub frequency_hz: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            samples: LaserScan::DEFAULT_SAMPLES,
            angle_min: 0.0,
            range_min: LaserScan::DEFAULT_RANGE_MIN,
            range_max: LaserScan::DEFAULT_RANGE_MAX,
            frequency_hz: 5.5,
        }
    }
}

impl ScanParams {
    pub fn angle_increment(&self) -> f64 {
        TAU / self.samples as f64
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency_hz
    }
}

/// Exact distance to the nearest surface along a world-frame bearing.
pub fn cast_ray(world: &WorldModel, pose: &Pose2D, bearing: f64) -> Option<f64> {
    let dir = (bearing.cos(), bearing.sin());
    let origin = pose.position();
    world
        .segments()
        .filter_map(|s| ray_segment(origin, dir, &s))
        .min_by(f64::total_cmp)
}

/// Casts every ray of one sweep. Hits closer than `range_min`, farther than
/// `range_max`, or missing entirely are stored as "no return". With noise
/// enabled each valid reading is scaled by `1 + σ·N(0, 1)` and clipped back
/// into `[range_min, range_max]`.
pub fn simulate_scan<R: Rng + ?Sized>(
    world: &WorldModel,
    pose: &Pose2D,
    params: &ScanParams,
    noise: &SensorNoise,
    rng: &mut R,
    stamp: f64,
) -> LaserScan {
    let mut scan = LaserScan {
        stamp,
        angle_min: params.angle_min,
        angle_increment: params.angle_increment(),
        range_min: params.range_min,
        range_max: params.range_max,
        ranges: Vec::with_capacity(params.samples),
    };
    let no_return = scan.no_return();
    for i in 0..params.samples {
        let bearing = pose.theta + scan.bearing(i);
        let reading = match cast_ray(world, pose, bearing) {
            Some(r) if r >= params.range_min && r <= params.range_max => {
                let sigma = noise.range_sigma_rel(r);
                if sigma > 0.0 {
                    let n: f64 = rng.sample(StandardNormal);
                    (r * (1.0 + sigma * n)).clamp(params.range_min, params.range_max)
                } else {
                    r
                }
            }
            _ => no_return,
        };
        scan.ranges.push(reading);
    }
    scan
}
