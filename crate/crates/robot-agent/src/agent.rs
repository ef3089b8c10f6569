use std::collections::HashMap;
use std::sync::Arc;

use log::{debug, info, warn};
use serde::Serialize;
use teleop_core::{
    Bus, Envelope, GoalMsg, GridGeometry, Mode, ModeMsg, OccupancyMsg, OdomMsg, Payload, PlanPath, Pose2D,
    Publisher, Subscription, Topic, Twist, VelocityLimits,
};
use teleop_mapping::{classify, OccupancyGrid, Thresholds};
use teleop_navigation::{
    build_costmap, follow_path, goal_reached, Costmap, InflationParams, Plan, ReplanReason, Replanner,
};
use teleop_netlink::{ConnectivityClassifier, ConnectivityStatus, PingMonitor, PingRecord};
use teleop_worldsim::{SensorNoise, SimStep, Simulator, WorldModel};

use crate::config::AgentConfig;
use crate::error::AgentError;
use crate::mode::{handle_goal, supervise_tick, Action, ModeState, Transition, TransitionLog};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum AgentEvent {
    Connectivity(ConnectivityStatus),
    Transition(Transition),
    GoalAccepted { goal: GoalMsg },
    GoalRejected { x: f64, y: f64, reason: String },
    GoalRepublished { goal: GoalMsg },
    Replanned { reason: ReplanReason, waypoints: usize, length: f64 },
    PlanFailed { reason: String },
    GoalReached { pose: Pose2D },
    Collision { pose: Pose2D, obstacle_contact: bool },
}

/// What one control tick produced.
#[derive(Debug, Clone)]
pub struct TickReport {
    /// Virtual time after the tick; outbound envelopes leave at this time.
    pub time: f64,
    pub command: Twist,
    pub step: SimStep,
    pub outbound: Vec<Envelope>,
    pub events: Vec<AgentEvent>,
    /// Ping outcomes scored this tick.
    pub pings: Vec<PingRecord>,
}

pub struct RobotAgent {
    config: AgentConfig,
    sim: Simulator,
    grid: OccupancyGrid,
    thresholds: Thresholds,
    inflation: InflationParams,
    map_msg: OccupancyMsg,
    costmap: Option<Costmap>,
    replanner: Replanner,
    state: ModeState,
    log: TransitionLog,
    ping: PingMonitor,
    classifier: ConnectivityClassifier,
    uplink: Publisher,
    local: Publisher,
    nav_goals: Subscription,
    nav_goal: Option<GoalMsg>,
    reached: Option<GoalMsg>,
    teleop: Option<(Twist, f64)>,
    last_seq: HashMap<Topic, u64>,
    published_plan: Option<Vec<Pose2D>>,
    last_plan_error: Option<String>,
    scans: u64,
    odom_every: u64,
    map_every: u64,
    // Kept alive so the local goal subscription stays connected.
    _bus: Bus,
}

fn every(rate_hz: f64, dt: f64) -> u64 {
    ((1.0 / (rate_hz * dt)).round() as u64).max(1)
}

impl RobotAgent {
    pub fn new(
        world: WorldModel,
        noise: SensorNoise,
        limits: VelocityLimits,
        config: AgentConfig,
    ) -> Result<Self, AgentError> {
        config.validate()?;
        let geometry = GridGeometry::covering(world.bounds.min(), world.bounds.max(), config.map_resolution);
        let grid = OccupancyGrid::with_params(geometry, config.log_odds);
        let thresholds = config.thresholds()?;
        let inflation = config.inflation(world.robot_radius);
        let map_msg = classify(&grid, thresholds);
        let sim = Simulator::new(world, noise, limits);
        let mut replanner = Replanner::new(config.planner);
        replanner.period = config.replan_period;
        let ping = PingMonitor::new(config.ping_interval, config.ping_timeout, 0.0)
            .map_err(|e| AgentError::Config(e.to_string()))?;
        let bus = Bus::new();
        let nav_goals = bus.subscribe_topic(Topic::Goal);
        let dt = sim.dt();
        Ok(Self {
            odom_every: every(config.odom_rate_hz, dt),
            map_every: every(config.map_rate_hz, dt),
            classifier: ConnectivityClassifier::new(config.debounce_k, 0.0),
            config,
            sim,
            grid,
            thresholds,
            inflation,
            map_msg,
            costmap: None,
            replanner,
            state: ModeState::new(0.0),
            log: TransitionLog::default(),
            ping,
            uplink: bus.publisher(),
            local: bus.publisher(),
            nav_goals,
            nav_goal: None,
            reached: None,
            teleop: None,
            last_seq: HashMap::new(),
            published_plan: None,
            last_plan_error: None,
            scans: 0,
            _bus: bus,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn sim(&self) -> &Simulator {
        &self.sim
    }

    pub fn time(&self) -> f64 {
        self.sim.time()
    }

    pub fn mode_state(&self) -> &ModeState {
        &self.state
    }

    pub fn transitions(&self) -> &TransitionLog {
        &self.log
    }

    pub fn connectivity(&self) -> ConnectivityStatus {
        self.classifier.status()
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn map(&self) -> &OccupancyMsg {
        &self.map_msg
    }

    pub fn costmap(&self) -> Option<&Costmap> {
        self.costmap.as_ref()
    }

    pub fn plan(&self) -> Option<&Arc<Plan>> {
        self.replanner.current()
    }

    /// Runs one control tick. `inbound` holds envelopes the link delivered
    /// since the previous tick, with their delivery times.
    pub fn tick(&mut self, inbound: Vec<(f64, Envelope)>) -> TickReport {
        let now = self.sim.time();
        let mut events = Vec::new();
        let mut outbound = Vec::new();
        let mut pings = Vec::new();

        for (at, env) in inbound {
            self.receive(at, env, &mut events, &mut pings);
        }
        pings.extend(self.ping.expire(now));
        for rec in &pings {
            if let Some(status) = self.classifier.push(rec, now) {
                info!("t={now:.2} connectivity {:?}", status.status);
                events.push(AgentEvent::Connectivity(status));
            }
        }

        let (next, transition, actions) = supervise_tick(self.classifier.status().status, &self.state, now);
        self.state = next;
        if let Some(t) = transition {
            info!("t={now:.2} mode {} -> {}", t.from, t.to);
            self.log.push(t);
            events.push(AgentEvent::Transition(t));
            outbound.push(self.uplink.send(
                now,
                Payload::Mode(ModeMsg {
                    mode: t.to,
                    since: now,
                }),
            ));
        }

        let mut cmd = Twist::ZERO;
        for action in actions {
            match action {
                Action::PassThrough => cmd = self.remote_command(now, &mut events, &mut outbound),
                Action::Stop => cmd = Twist::ZERO,
                Action::RepublishGoal(goal) => {
                    self.local.send(now, Payload::Goal(goal.clone()));
                    events.push(AgentEvent::GoalRepublished { goal });
                }
                Action::Navigate => cmd = self.autonomous_command(now, &mut events, &mut outbound),
                Action::CancelNavigation => {
                    self.nav_goal = None;
                    self.teleop = None;
                    self.nav_goals.drain();
                }
            }
        }

        let step = self.sim.step(cmd);
        if step.collided || step.obstacle_contact {
            warn!("t={:.2} collision at {:?}", step.time, self.sim.state.pose);
            events.push(AgentEvent::Collision {
                pose: self.sim.state.pose,
                obstacle_contact: step.obstacle_contact && !step.collided,
            });
        }
        self.sense(step.time, &mut outbound);
        if let Some(p) = self.ping.due(step.time) {
            outbound.push(self.uplink.send(step.time, Payload::Ping(p)));
        }
        TickReport {
            time: step.time,
            command: cmd,
            step,
            outbound,
            events,
            pings,
        }
    }

    fn receive(&mut self, at: f64, env: Envelope, events: &mut Vec<AgentEvent>, pings: &mut Vec<PingRecord>) {
        let last = self.last_seq.entry(env.topic).or_insert(0);
        if env.seq <= *last {
            debug!("dropping stale {} seq {}", env.topic, env.seq);
            return;
        }
        *last = env.seq;
        match env.payload {
            Payload::CmdVel(t) => self.teleop = Some((self.sim.limits.clamp(t), at)),
            Payload::Goal(goal) => match handle_goal(&goal, &self.state, &self.grid.geometry) {
                Ok(next) => {
                    self.state = next;
                    if self.state.mode == Mode::Autonomous {
                        self.local.send(at, Payload::Goal(goal.clone()));
                    }
                    events.push(AgentEvent::GoalAccepted { goal });
                }
                Err(e) => {
                    warn!("{e}");
                    events.push(AgentEvent::GoalRejected {
                        x: goal.pose.x,
                        y: goal.pose.y,
                        reason: e.to_string(),
                    });
                }
            },
            Payload::Pong(p) => pings.extend(self.ping.on_pong(&p, at)),
            other => debug!("ignoring inbound {}", other.topic()),
        }
    }

    fn remote_command(&mut self, now: f64, events: &mut Vec<AgentEvent>, out: &mut Vec<Envelope>) -> Twist {
        let fresh = self
            .teleop
            .filter(|(_, at)| now - at <= self.config.deadman + 1e-9)
            .map(|(t, _)| t);
        // Keep a plan to the stored goal current so the operator side can
        // predict along it if the link drops.
        let goal = self.state.last_goal.clone();
        let follow = match goal {
            Some(g) if !self.is_reached(&g) => self.drive_to(&g, now, events, out),
            _ => None,
        };
        match (fresh, follow) {
            (Some(t), _) => t,
            (None, Some(t)) if self.config.remote_autonav => t,
            _ => Twist::ZERO,
        }
    }

    fn autonomous_command(&mut self, now: f64, events: &mut Vec<AgentEvent>, out: &mut Vec<Envelope>) -> Twist {
        if let Some(env) = self.nav_goals.drain().pop() {
            if let Payload::Goal(g) = env.payload {
                self.nav_goal = Some(g);
            }
        }
        match self.nav_goal.clone() {
            Some(g) if !self.is_reached(&g) => self.drive_to(&g, now, events, out).unwrap_or(Twist::ZERO),
            _ => Twist::ZERO,
        }
    }

    fn is_reached(&self, goal: &GoalMsg) -> bool {
        self.reached.as_ref() == Some(goal)
    }

    /// Plans (or keeps the plan) toward `goal` and returns the follower's
    /// command, or `None` when there is no plan to follow.
    fn drive_to(&mut self, goal: &GoalMsg, now: f64, events: &mut Vec<AgentEvent>, out: &mut Vec<Envelope>) -> Option<Twist> {
        let pose = self.sim.state.odom_pose;
        // With a plan in hand the follower drives on to its tighter stop
        // tolerance; the goal tolerance only settles goals met on arrival.
        if self.replanner.current().is_none() && goal_reached(&pose, &goal.pose, &self.config.goal_tolerance) {
            self.arrive(goal, now, events, out);
            return Some(Twist::ZERO);
        }
        let costmap = self.costmap.as_ref()?;
        let plan = match self.replanner.replan_if_needed(costmap, &pose, &goal.pose, now) {
            Ok((plan, reason)) => {
                self.last_plan_error = None;
                if let Some(reason) = reason {
                    events.push(AgentEvent::Replanned {
                        reason,
                        waypoints: plan.path.len(),
                        length: plan.path.length(),
                    });
                }
                plan
            }
            Err(e) => {
                let msg = e.to_string();
                if self.last_plan_error.as_ref() != Some(&msg) {
                    events.push(AgentEvent::PlanFailed { reason: msg.clone() });
                    self.last_plan_error = Some(msg);
                }
                return None;
            }
        };
        self.publish_plan(&plan.path, now, out);
        let cmd = follow_path(&pose, &plan.path, &self.config.follower);
        if cmd.goal_reached {
            self.arrive(goal, now, events, out);
        }
        Some(cmd.twist)
    }

    fn arrive(&mut self, goal: &GoalMsg, now: f64, events: &mut Vec<AgentEvent>, out: &mut Vec<Envelope>) {
        info!("t={now:.2} goal reached");
        self.reached = Some(goal.clone());
        self.replanner.clear();
        events.push(AgentEvent::GoalReached {
            pose: self.sim.state.odom_pose,
        });
        self.publish_plan(&PlanPath::default(), now, out);
    }

    fn publish_plan(&mut self, path: &PlanPath, now: f64, out: &mut Vec<Envelope>) {
        if self.published_plan.as_ref() == Some(&path.waypoints) {
            return;
        }
        self.published_plan = Some(path.waypoints.clone());
        let mut path = path.clone();
        path.stamp = now;
        out.push(self.uplink.send(now, Payload::Plan(path)));
    }

    /// Sensor sampling and telemetry after the robot moved.
    fn sense(&mut self, t: f64, out: &mut Vec<Envelope>) {
        let ticks = self.sim.ticks();
        if ticks.is_multiple_of(self.odom_every) {
            let s = &self.sim.state;
            out.push(self.uplink.send(
                t,
                Payload::Odom(OdomMsg {
                    pose: s.odom_pose,
                    twist: s.twist,
                }),
            ));
        }
        if self.scans as f64 * self.sim.scan_params.period() <= t + 1e-9 {
            self.scans += 1;
            let scan = self.sim.scan();
            self.grid.integrate_scan(&self.sim.state.odom_pose, &scan);
            self.map_msg = classify(&self.grid, self.thresholds);
            match build_costmap(&self.map_msg, &self.inflation) {
                Ok(c) => self.costmap = Some(c),
                Err(e) => warn!("costmap: {e}"),
            }
            out.push(self.uplink.send(t, Payload::Scan(scan)));
        }
        if ticks.is_multiple_of(self.map_every) {
            out.push(self.uplink.send(t, Payload::Map(self.map_msg.clone())));
        }
    }
}
