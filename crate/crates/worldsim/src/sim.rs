use teleop_core::{LaserScan, Twist, VelocityLimits};

use crate::lidar::{simulate_scan, ScanParams};
use crate::noise::{NoiseStreams, SensorNoise};
use crate::robot::{read_odometry, step_robot, RobotState};
use crate::world::WorldModel;

/// Fixed control period (50 Hz).
pub const CONTROL_DT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStep {
    pub time: f64,
    /// The commanded motion was refused because it would hit geometry.
    pub collided: bool,
    /// A moving obstacle ended the step within `robot_radius` of the robot.
    pub obstacle_contact: bool,
}

/// Single-threaded world + robot simulation on a virtual clock.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub world: WorldModel,
    pub state: RobotState,
    pub limits: VelocityLimits,
    pub noise: SensorNoise,
    pub scan_params: ScanParams,
    streams: NoiseStreams,
    ticks: u64,
    dt: f64,
}

impl Simulator {
    pub fn new(world: WorldModel, noise: SensorNoise, limits: VelocityLimits) -> Self {
        let state = RobotState::at(world.robot_start);
        Self {
            world,
            state,
            limits,
            noise,
            scan_params: ScanParams::default(),
            streams: NoiseStreams::new(noise.rng_seed),
            ticks: 0,
            dt: CONTROL_DT,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Current virtual time. Computed from the tick count so it does not
    /// accumulate rounding error.
    pub fn time(&self) -> f64 {
        self.ticks as f64 * self.dt
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// Advances obstacles, then the robot, then odometry, by one control tick.
    pub fn step(&mut self, cmd: Twist) -> SimStep {
        self.world.advance(self.dt);
        let out = step_robot(&self.world, &self.state, cmd, self.dt, &self.limits);
        self.state = out.state;
        self.state.odom_pose = read_odometry(&self.state, &self.noise, self.dt, &mut self.streams.odom);
        self.ticks += 1;
        self.state.stamp = self.time();
        let contact = self.world.has_dynamic_obstacles()
            && self.world.clearance(self.state.pose.position()) <= self.world.robot_radius;
        SimStep {
            time: self.time(),
            collided: out.collided,
            obstacle_contact: contact,
        }
    }

    pub fn scan(&mut self) -> LaserScan {
        let stamp = self.time();
        simulate_scan(
            &self.world,
            &self.state.pose,
            &self.scan_params,
            &self.noise,
            &mut self.streams.scan,
            stamp,
        )
    }
}
