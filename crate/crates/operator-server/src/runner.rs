//! Scenario runner: robot agent, link and operator server on one virtual
//! clock.

use std::time::{Duration, Instant};

use teleop_core::{Envelope, Payload, Pose2D, Twist};
use teleop_netlink::{Direction, Link, SendOutcome};
use teleop_robot::{AgentEvent, RobotAgent};

use crate::error::ServerError;
use crate::gateway::{Control, Frame, FrameKind, GatewayHub, Notice, OperatorInput, TwinView, FRAME_RATE_HZ};
use crate::metrics::RunMetrics;
use crate::scenario::{Scenario, ScriptAction};
use crate::server::OperatorServer;
use crate::trace::{ServerEvent, Trace};
use crate::twin::TwinSource;

/// Scripted teleop is sent at this rate.
pub const TELEOP_RATE_HZ: f64 = 20.0;
const EPS: f64 = 1e-9;
/// Telemetry younger than this counts as fresh when measuring twin lag.
const FRESH_ODOM: f64 = 0.15;

#[derive(Debug, Clone, Copy)]
struct ActiveDrive {
    twist: Twist,
    next: f64,
    until: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub trace: Trace,
}

pub struct Runner {
    scenario: Scenario,
    agent: RobotAgent,
    link: Link,
    server: OperatorServer,
    trace: Trace,
    metrics: RunMetrics,
    next_action: usize,
    drive: Option<ActiveDrive>,
    pending: Vec<OperatorInput>,
    notices: Vec<Notice>,
    manual_outage: bool,
    paused: bool,
    next_frame: f64,
    frame_seq: u64,
    last_frame_pose: Option<Pose2D>,
    last_frame_map: u64,
    goal_sent_at: Option<f64>,
    blend_until: f64,
}

impl Runner {
    pub fn new(scenario: Scenario) -> Result<Self, ServerError> {
        let cfg = &scenario.config;
        let agent = RobotAgent::new(scenario.world.clone(), cfg.noise, cfg.limits, cfg.agent.clone())?;
        let link = Link::new(cfg.link.clone())?;
        let server = OperatorServer::new(cfg.twin, scenario.world.robot_start, &cfg.agent);
        let metrics = RunMetrics {
            scenario: cfg.name.clone(),
            seed: cfg.seed,
            ..RunMetrics::default()
        };
        Ok(Self {
            scenario,
            agent,
            link,
            server,
            trace: Trace::new(),
            metrics,
            next_action: 0,
            drive: None,
            pending: Vec::new(),
            notices: Vec::new(),
            manual_outage: false,
            paused: false,
            next_frame: 0.0,
            frame_seq: 0,
            last_frame_pose: None,
            last_frame_map: 0,
            goal_sent_at: None,
            blend_until: 0.0,
        })
    }

    pub fn time(&self) -> f64 {
        self.agent.time()
    }

    pub fn duration(&self) -> f64 {
        self.scenario.config.duration
    }

    pub fn finished(&self) -> bool {
        self.time() >= self.duration() - EPS
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn agent(&self) -> &RobotAgent {
        &self.agent
    }

    pub fn server(&self) -> &OperatorServer {
        &self.server
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn metrics(&self) -> &RunMetrics {
        &self.metrics
    }

    /// Queues an operator input; it is applied on the next step.
    pub fn submit(&mut self, input: OperatorInput) {
        match input {
            // pause and resume act on the clock itself, not on a step
            OperatorInput::Control { command: Control::Pause } => self.paused = true,
            OperatorInput::Control { command: Control::Resume } => self.paused = false,
            other => self.pending.push(other),
        }
    }

    fn send(&mut self, dir: Direction, env: Envelope, now: f64) {
        let (topic, seq) = (env.topic.as_str(), env.seq);
        match self.link.send(dir, env, now) {
            SendOutcome::Scheduled { deliver_at } => self.trace.link(
                now,
                ServerEvent::Send {
                    dir,
                    topic,
                    seq,
                    deliver_at,
                },
            ),
            SendOutcome::Dropped(reason) => self.trace.link(
                now,
                ServerEvent::Drop {
                    dir,
                    topic,
                    seq,
                    reason,
                },
            ),
        }
    }

    fn deliver(&mut self, dir: Direction, now: f64) -> Vec<(f64, Envelope)> {
        let out = self.link.deliver(dir, now);
        for (at, env) in &out {
            self.trace.link(
                *at,
                ServerEvent::Deliver {
                    dir,
                    topic: env.topic.as_str(),
                    seq: env.seq,
                    stamp: env.stamp,
                },
            );
        }
        out
    }

    fn run_script(&mut self, now: f64) {
        while let Some(a) = self.scenario.config.script.get(self.next_action) {
            if a.at() > now + EPS {
                break;
            }
            let a = a.clone();
            self.next_action += 1;
            match a {
                ScriptAction::Drive { at, v, w, until } => {
                    self.drive = Some(ActiveDrive {
                        twist: Twist::new(v, w),
                        next: at,
                        until,
                    })
                }
                ScriptAction::Goal { x, y, theta, .. } => self.pending.push(OperatorInput::Goal { x, y, theta }),
                ScriptAction::OutageStart { .. } => self.pending.push(OperatorInput::Control {
                    command: Control::OutageStart,
                }),
                ScriptAction::OutageEnd { .. } => self.pending.push(OperatorInput::Control {
                    command: Control::OutageEnd,
                }),
            }
        }
        if let Some(d) = &mut self.drive {
            if now >= d.until - EPS {
                self.drive = None;
            } else if now >= d.next - EPS {
                d.next += 1.0 / TELEOP_RATE_HZ;
                let twist = d.twist;
                self.pending.push(OperatorInput::Teleop { v: twist.v, w: twist.w });
            }
        }
    }

    fn apply(&mut self, input: OperatorInput, now: f64) {
        match input {
            OperatorInput::Teleop { v, w } => {
                let env = self.server.teleop(Twist::new(v, w), now);
                self.send(Direction::Downlink, env, now);
            }
            OperatorInput::Goal { x, y, theta } => match self.server.goal_request(x, y, theta, now) {
                Ok(env) => {
                    if let Payload::Goal(g) = &env.payload {
                        self.trace.server(now, ServerEvent::GoalSent { goal: g.clone() });
                    }
                    self.goal_sent_at = Some(now);
                    self.send(Direction::Downlink, env, now);
                }
                Err(reason) => {
                    self.metrics.goals_rejected += 1;
                    self.trace.server(
                        now,
                        ServerEvent::GoalRefused {
                            x,
                            y,
                            reason: reason.clone(),
                        },
                    );
                    self.notices.push(Notice::GoalRejected { x, y, reason });
                }
            },
            OperatorInput::Control { command } => match command {
                Control::OutageStart if !self.manual_outage => {
                    self.manual_outage = true;
                    self.link.begin_outage(now);
                    self.trace.server(now, ServerEvent::OutageBegin);
                }
                Control::OutageEnd if self.manual_outage => {
                    self.manual_outage = false;
                    self.link.end_outage(now);
                    self.trace.server(now, ServerEvent::OutageEnd);
                }
                Control::Pause => self.paused = true,
                Control::Resume => self.paused = false,
                _ => {}
            },
        }
    }

    fn record_robot(&mut self, t: f64, e: AgentEvent) {
        match &e {
            AgentEvent::Transition(_) => self.metrics.mode_switches += 1,
            AgentEvent::Collision { .. } => self.metrics.collision_count += 1,
            AgentEvent::GoalReached { .. } if !self.metrics.goal_reached => {
                self.metrics.goal_reached = true;
                self.metrics.time_to_goal = self.goal_sent_at.map(|s| t - s);
            }
            _ => {}
        }
        self.trace.robot(t, e);
    }

    fn frame(&mut self, now: f64) -> Frame {
        let twin = self.server.twin.pose;
        let truth = self.agent.sim().state.pose;
        if let Some(prev) = self.last_frame_pose {
            self.metrics.max_frame_step = self.metrics.max_frame_step.max(prev.distance(&twin));
        }
        self.last_frame_pose = Some(twin);
        let fresh = now - self.server.twin.last_telemetry_at <= FRESH_ODOM;
        if fresh && self.server.twin.source == TwinSource::Telemetry && now >= self.blend_until {
            self.metrics.max_twin_lag = self.metrics.max_twin_lag.max(twin.distance(&truth));
        }
        self.metrics.frames += 1;
        self.refresh_counts();
        let version = self.server.map_version();
        let map = (version != self.last_frame_map).then(|| self.server.map().cloned()).flatten();
        self.last_frame_map = version;
        self.frame_seq += 1;
        Frame {
            kind: FrameKind::Frame,
            seq: self.frame_seq,
            t: now,
            twin: TwinView {
                pose: twin,
                source: self.server.twin.source,
            },
            walls: self.server.walls.segments().iter().map(|s| [s.a.x, s.a.y, s.b.x, s.b.y]).collect(),
            map,
            map_version: version,
            plan: self.server.plan().waypoints.clone(),
            goal: self.server.goal().map(|g| g.pose),
            mode: self.server.mode().mode,
            connectivity: self.server.connectivity(),
            link_down: self.link.is_down(now),
            paused: self.paused,
            metrics: self.metrics.clone(),
            notices: std::mem::take(&mut self.notices),
        }
    }

    fn refresh_counts(&mut self) {
        self.metrics.uplink = self.link.stats(Direction::Uplink).into();
        self.metrics.downlink = self.link.stats(Direction::Downlink).into();
        self.metrics.malformed = self.server.malformed();
    }

    /// Advances one control tick. Returns a frame when one is due. The pause
    /// flag is left to the caller; `step` always advances.
    pub fn step(&mut self) -> Option<Frame> {
        let now = self.time();

        for (_, env) in self.deliver(Direction::Uplink, now) {
            let h = self.server.on_delivery(&env, now);
            if let Some(d) = h.teleport {
                self.metrics.teleport_distances.push(d);
                self.blend_until = now + self.scenario.config.twin.smoothing_t;
            }
            for e in h.events {
                self.trace.server(now, e);
            }
            for r in h.replies {
                self.send(Direction::Downlink, r, now);
            }
        }

        self.run_script(now);
        for input in std::mem::take(&mut self.pending) {
            self.apply(input, now);
        }
        for e in self.server.tick(now) {
            self.trace.server(now, e);
        }

        let frame = (now >= self.next_frame - EPS).then(|| {
            self.next_frame += 1.0 / FRAME_RATE_HZ;
            self.frame(now)
        });

        let before = self.agent.sim().state.pose;
        let inbound = self.deliver(Direction::Downlink, now);
        let report = self.agent.tick(inbound);
        for env in report.outbound {
            self.send(Direction::Uplink, env, report.time);
        }
        for e in report.events {
            self.record_robot(report.time, e);
        }
        self.metrics.path_length += before.distance(&self.agent.sim().state.pose);
        frame
    }

    /// Final metrics and trace.
    pub fn finish(mut self) -> RunOutput {
        self.refresh_counts();
        self.metrics.duration = self.time();
        let pose = self.agent.sim().state.pose;
        self.metrics.final_goal_error = self.server.goal().map(|g| g.pose.distance(&pose));
        RunOutput {
            metrics: self.metrics,
            trace: self.trace,
        }
    }

    /// Runs to the scenario duration as fast as possible.
    pub fn run_headless(mut self) -> RunOutput {
        while !self.finished() {
            self.step();
        }
        self.finish()
    }
}

/// Runs `scenario` headless and returns its outputs.
pub fn run_scenario(scenario: Scenario) -> Result<RunOutput, ServerError> {
    Ok(Runner::new(scenario)?.run_headless())
}

impl Runner {
    /// Frame of the current state without advancing the clock.
    pub fn current_frame(&mut self) -> Frame {
        let now = self.time();
        self.frame(now)
    }
}

/// Runs `runner` against the wall clock at `speed` times real time,
/// serving frames to `hub` and applying the inputs its sessions send.
pub fn run_live(mut runner: Runner, hub: &GatewayHub, speed: f64) -> RunOutput {
    let speed = if speed > 0.0 { speed } else { 1.0 };
    let mut anchor = Instant::now();
    let mut anchor_sim = runner.time();
    let mut last_idle = Instant::now();
    while !runner.finished() {
        for (_, input) in hub.drain_inputs() {
            runner.submit(input);
        }
        if runner.paused() {
            if last_idle.elapsed() >= Duration::from_millis(250) {
                hub.broadcast(&runner.current_frame());
                last_idle = Instant::now();
            }
            std::thread::sleep(Duration::from_millis(10));
            anchor = Instant::now();
            anchor_sim = runner.time();
            continue;
        }
        if let Some(f) = runner.step() {
            hub.broadcast(&f);
        }
        let target = anchor + Duration::from_secs_f64((runner.time() - anchor_sim) / speed);
        let now = Instant::now();
        if target > now {
            std::thread::sleep(target - now);
        }
    }
    hub.broadcast(&runner.current_frame());
    runner.finish()
}
