//! Operator-side replica of the robot pose.
//!
//! While /odom keeps arriving the twin shows the latest odometry pose,
//! extrapolated with the reported twist up to the current time. Once
//! telemetry is older than the staleness window, the twin drives along the
//! last plan it received at a constant speed. When telemetry returns, the gap
//! between prediction and reality is recorded and blended away over the
//! smoothing time instead of being shown as a jump.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use teleop_core::angle::angle_diff;
use teleop_core::{Envelope, Payload, PlanPath, Pose2D, Topic, Twist};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwinParams {
    /// Telemetry older than this switches the twin to prediction.
    pub staleness: f64,
    /// Constant speed along the cached plan while predicting.
    pub v_pred: f64,
    /// Blend time for the correction at reconnection; 0 snaps.
    pub smoothing_t: f64,
    /// Blend time for the small corrections between consecutive /odom
    /// samples; 0 snaps.
    pub correction_t: f64,
}

impl Default for TwinParams {
    fn default() -> Self {
        Self {
            staleness: 0.5,
            v_pred: 0.5,
            smoothing_t: 1.0,
            correction_t: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwinSource {
    Telemetry,
    Predicted,
}

/// Result of feeding one envelope to the twin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ingest {
    Applied,
    /// Older than something already seen on its topic.
    Stale,
    /// Not a topic the twin tracks.
    Ignored,
    /// First /odom after a prediction period; carries the teleport distance.
    Reconciled(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Blend {
    dx: f64,
    dy: f64,
    dtheta: f64,
    start: f64,
    duration: f64,
}

impl Blend {
    fn between(shown: &Pose2D, target: &Pose2D, start: f64, duration: f64) -> Option<Self> {
        let b = Self {
            dx: shown.x - target.x,
            dy: shown.y - target.y,
            dtheta: angle_diff(shown.theta, target.theta),
            start,
            duration,
        };
        (duration > 0.0 && (b.dx != 0.0 || b.dy != 0.0 || b.dtheta != 0.0)).then_some(b)
    }

    fn weight(&self, now: f64) -> f64 {
        (1.0 - (now - self.start) / self.duration).clamp(0.0, 1.0)
    }

    fn apply(&self, target: &Pose2D, now: f64) -> Pose2D {
        let k = self.weight(now);
        Pose2D::new(target.x + k * self.dx, target.y + k * self.dy, target.theta + k * self.dtheta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OdomSample {
    pose: Pose2D,
    twist: Twist,
    stamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinState {
    pub params: TwinParams,
    /// Pose shown to the operator.
    pub pose: Pose2D,
    pub source: TwinSource,
    /// Server time the latest /odom arrived.
    pub last_telemetry_at: f64,
    pub path_cache: Option<PlanPath>,
    /// Arc length along `path_cache`.
    pub path_progress: f64,
    odom: Option<OdomSample>,
    blend: Option<Blend>,
    predict_since: f64,
    predict_base: f64,
    last_seq: HashMap<Topic, u64>,
    malformed: u64,
}

/// Pose reached after moving `v_pred * dt` further along `path` from
/// arc length `progress`, clamped to the path end.
pub fn predict_along(path: &PlanPath, progress: f64, dt: f64, v_pred: f64) -> Option<(Pose2D, f64)> {
    let s = (progress + v_pred * dt).clamp(0.0, path.length());
    path.pose_at(s).map(|p| (p, s))
}

fn extrapolate(o: &OdomSample, dt: f64) -> Pose2D {
    let p = o.pose;
    let mid = p.theta + 0.5 * o.twist.w * dt;
    Pose2D::new(
        p.x + o.twist.v * mid.cos() * dt,
        p.y + o.twist.v * mid.sin() * dt,
        p.theta + o.twist.w * dt,
    )
}

impl TwinState {
    pub fn new(params: TwinParams, initial: Pose2D) -> Self {
        Self {
            params,
            pose: initial,
            source: TwinSource::Telemetry,
            last_telemetry_at: 0.0,
            path_cache: None,
            path_progress: 0.0,
            odom: None,
            blend: None,
            predict_since: 0.0,
            predict_base: 0.0,
            last_seq: HashMap::new(),
            malformed: 0,
        }
    }

    /// Number of tracked envelopes whose payload did not match their topic.
    pub fn malformed(&self) -> u64 {
        self.malformed
    }

    /// Latest odometry pose, extrapolated with its twist to `stamp`.
    pub fn odom_pose_at(&self, stamp: f64) -> Option<Pose2D> {
        let o = self.odom.as_ref()?;
        Some(extrapolate(o, (stamp - o.stamp).clamp(-self.params.staleness, self.params.staleness)))
    }

    /// Latest odometry pose as reported, without extrapolation.
    pub fn odom_pose(&self) -> Option<Pose2D> {
        self.odom.map(|o| o.pose)
    }

    fn telemetry_target(&self, now: f64) -> Option<Pose2D> {
        let o = self.odom.as_ref()?;
        let dt = (now - o.stamp).clamp(0.0, self.params.staleness);
        Some(extrapolate(o, dt))
    }

    fn predicted_target(&self, now: f64) -> Pose2D {
        let dt = now - self.predict_since;
        let along = self
            .path_cache
            .as_ref()
            .and_then(|p| predict_along(p, self.predict_base, dt, self.params.v_pred));
        match (along, &self.odom) {
            (Some((p, _)), _) => p,
            (None, Some(o)) => o.pose,
            (None, None) => self.pose,
        }
    }

    fn project(&self, pose: &Pose2D) -> f64 {
        self.path_cache.as_ref().map_or(0.0, |p| p.project(pose.position()))
    }

    /// Applies a delivered envelope received at server time `now`.
    pub fn ingest(&mut self, env: &Envelope, now: f64) -> Ingest {
        if !matches!(env.topic, Topic::Odom | Topic::Plan) {
            return Ingest::Ignored;
        }
        if env.payload.topic() != env.topic {
            self.malformed += 1;
            return Ingest::Ignored;
        }
        let last = self.last_seq.entry(env.topic).or_insert(0);
        if env.seq <= *last {
            return Ingest::Stale;
        }
        *last = env.seq;
        match &env.payload {
            Payload::Odom(o) => {
                let shown = self.update(now);
                let sample = OdomSample {
                    pose: o.pose,
                    twist: o.twist,
                    stamp: env.stamp,
                };
                self.odom = Some(sample);
                self.last_telemetry_at = now;
                self.path_progress = self.project(&o.pose);
                let target = extrapolate(&sample, (now - env.stamp).clamp(0.0, self.params.staleness));
                let out = if self.source == TwinSource::Predicted {
                    self.source = TwinSource::Telemetry;
                    self.blend = Blend::between(&shown, &target, now, self.params.smoothing_t);
                    Ingest::Reconciled(shown.distance(&o.pose))
                } else {
                    self.blend = self.blend.filter(|b| b.weight(now) > 0.0).map_or_else(
                        || Blend::between(&shown, &target, now, self.params.correction_t),
                        // a reconnection blend still running keeps going,
                        // re-anchored on the new sample
                        |b| Blend::between(&shown, &target, now, b.duration * b.weight(now)),
                    );
                    Ingest::Applied
                };
                self.pose = self.blend.map_or(target, |b| b.apply(&target, now));
                out
            }
            Payload::Plan(p) => {
                self.path_cache = (!p.is_empty()).then(|| p.clone());
                let anchor = self.odom.map_or(self.pose, |o| o.pose);
                self.path_progress = self.project(&anchor);
                if self.source == TwinSource::Predicted {
                    self.predict_base = self.path_progress;
                }
                Ingest::Applied
            }
            _ => Ingest::Ignored,
        }
    }

    /// Advances the displayed pose to server time `now` and returns it.
    pub fn update(&mut self, now: f64) -> Pose2D {
        if self.odom.is_none() {
            return self.pose;
        }
        let stale = now - self.last_telemetry_at > self.params.staleness;
        if stale && self.source == TwinSource::Telemetry {
            let shown = self.display(now);
            self.source = TwinSource::Predicted;
            self.predict_since = now;
            // continue from where the operator last saw the robot
            self.predict_base = self.project(&shown);
            let target = self.predicted_target(now);
            self.blend = Blend::between(&shown, &target, now, self.params.smoothing_t);
        }
        self.pose = self.display(now);
        self.pose
    }

    fn display(&mut self, now: f64) -> Pose2D {
        let target = match self.source {
            TwinSource::Telemetry => self.telemetry_target(now).unwrap_or(self.pose),
            TwinSource::Predicted => {
                let dt = now - self.predict_since;
                if let Some(p) = &self.path_cache {
                    self.path_progress = (self.predict_base + self.params.v_pred * dt).clamp(0.0, p.length());
                }
                self.predicted_target(now)
            }
        };
        match self.blend {
            Some(b) if b.weight(now) > 0.0 => b.apply(&target, now),
            _ => {
                self.blend = None;
                target
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use teleop_core::{OdomMsg, Point2};

    fn odom(seq: u64, stamp: f64, x: f64, v: f64) -> Envelope {
        Envelope::new(
            seq,
            stamp,
            Payload::Odom(OdomMsg {
                pose: Pose2D::new(x, 0.0, 0.0),
                twist: Twist::new(v, 0.0),
            }),
        )
    }

    fn straight_plan(seq: u64, len: f64, n: usize) -> Envelope {
        let pts: Vec<Point2> = (0..n)
            .map(|i| Point2::new(len * i as f64 / (n - 1) as f64, 0.0))
            .collect();
        Envelope::new(seq, 0.0, Payload::Plan(PlanPath::from_points(0.0, &pts, 0.0)))
    }

    fn snap() -> TwinParams {
        TwinParams {
            smoothing_t: 0.0,
            correction_t: 0.0,
            ..TwinParams::default()
        }
    }

    #[test]
    fn odom_sets_pose() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        assert_eq!(t.ingest(&odom(1, 1.0, 2.0, 0.0), 1.0), Ingest::Applied);
        assert_eq!(t.pose, Pose2D::new(2.0, 0.0, 0.0));
        assert_eq!(t.source, TwinSource::Telemetry);
    }

    #[test]
    fn out_of_order_is_ignored() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        t.ingest(&odom(5, 1.0, 2.0, 0.0), 1.0);
        assert_eq!(t.ingest(&odom(4, 0.9, 1.0, 0.0), 1.0), Ingest::Stale);
        assert_eq!(t.pose.x, 2.0);
    }

    #[test]
    fn plan_cached_with_progress_at_nearest_point() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        t.ingest(&odom(1, 0.0, 1.2, 0.0), 0.0);
        t.ingest(&straight_plan(1, 3.3, 12), 0.0);
        assert_eq!(t.path_cache.as_ref().unwrap().len(), 12);
        // waypoints every 0.3 m; the projection is exact, not snapped
        assert!((t.path_progress - 1.2).abs() < 1e-12);
    }

    #[test]
    fn prediction_advances_at_v_pred() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        t.ingest(&odom(1, 0.0, 0.0, 0.0), 0.0);
        t.ingest(&straight_plan(1, 3.0, 61), 0.0);
        t.update(0.5);
        assert_eq!(t.source, TwinSource::Telemetry);
        // stale from here on; prediction starts at the last telemetry pose
        t.update(0.52);
        assert_eq!(t.source, TwinSource::Predicted);
        let p = t.update(2.52);
        assert!((p.x - 1.0).abs() < 1e-9, "{}", p.x);
        let p = t.update(100.0);
        assert!((p.x - 3.0).abs() < 1e-12);
    }

    #[test]
    fn prediction_continues_from_the_extrapolated_pose() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        t.ingest(&odom(1, 0.0, 0.0, 0.5), 0.0);
        t.ingest(&straight_plan(1, 3.0, 61), 0.0);
        // extrapolation is capped at the staleness window: 0.5 s at 0.5 m/s
        let shown = t.update(0.5);
        assert!((shown.x - 0.25).abs() < 1e-12);
        let p = t.update(0.52);
        assert_eq!(t.source, TwinSource::Predicted);
        assert!((p.x - 0.25).abs() < 1e-12);
        assert!((t.update(2.52).x - 1.25).abs() < 1e-9);
    }

    #[test]
    fn no_plan_holds_position() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        t.ingest(&odom(1, 0.0, 1.0, 0.5), 0.0);
        t.update(1.0);
        assert_eq!(t.source, TwinSource::Predicted);
        assert_eq!(t.update(3.0).x, 1.0);
    }

    #[test]
    fn reconcile_reports_distance_and_snaps_with_zero_t() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        t.ingest(&odom(1, 0.0, 0.0, 0.0), 0.0);
        t.ingest(&straight_plan(1, 3.0, 61), 0.0);
        t.update(0.6);
        t.update(2.6);
        assert!((t.pose.x - 1.0).abs() < 1e-9);
        let r = t.ingest(&odom(2, 2.6, 0.2, 0.0), 2.6);
        match r {
            Ingest::Reconciled(d) => assert!((d - 0.8).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert_eq!(t.pose.x, 0.2);
        assert_eq!(t.source, TwinSource::Telemetry);
    }

    #[test]
    fn reconcile_matching_pose_is_zero() {
        let mut t = TwinState::new(TwinParams::default(), Pose2D::default());
        t.ingest(&odom(1, 0.0, 0.0, 0.0), 0.0);
        t.update(1.0);
        assert_eq!(t.ingest(&odom(2, 1.0, 0.0, 0.0), 1.0), Ingest::Reconciled(0.0));
    }

    #[test]
    fn smoothing_spreads_the_correction() {
        let mut t = TwinState::new(TwinParams::default(), Pose2D::default());
        t.ingest(&odom(1, 0.0, 0.0, 0.0), 0.0);
        t.ingest(&straight_plan(1, 3.0, 61), 0.0);
        t.update(0.6);
        t.update(2.6);
        let before = t.pose;
        t.ingest(&odom(2, 2.6, 0.2, 0.0), 2.6);
        // no jump at the reconciliation instant
        assert!(t.pose.distance(&before) < 1e-9);
        let mut last = t.pose;
        for k in 1..=20 {
            let now = 2.6 + k as f64 * 0.05;
            if k % 2 == 0 {
                t.ingest(&odom(2 + k as u64, now, 0.2, 0.0), now);
            }
            let p = t.update(now);
            // 0.8 m over 1 s, 20 frames
            assert!(p.distance(&last) <= 0.8 * 0.05 + 1e-9);
            last = p;
        }
        assert!((last.x - 0.2).abs() < 1e-12);
    }

    #[test]
    fn extrapolates_between_samples() {
        let mut t = TwinState::new(snap(), Pose2D::default());
        t.ingest(&odom(1, 1.0, 1.0, 0.5), 1.02);
        let p = t.update(1.07);
        assert!((p.x - 1.035).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn source_follows_telemetry_freshness(gaps in prop::collection::vec(0.02f64..1.5, 1..40)) {
            let mut t = TwinState::new(TwinParams::default(), Pose2D::default());
            t.ingest(&straight_plan(1, 50.0, 200), 0.0);
            let (mut now, mut seq) = (0.0, 0u64);
            for gap in gaps {
                // tick the twin at 20 Hz across the gap, then deliver odometry
                let end = now + gap;
                while now + 0.05 < end {
                    now += 0.05;
                    t.update(now);
                    let fresh = now - t.last_telemetry_at <= t.params.staleness;
                    prop_assert_eq!(t.source == TwinSource::Telemetry, fresh || seq == 0);
                }
                now = end;
                seq += 1;
                t.ingest(&odom(seq, now, 0.1 * seq as f64, 0.3), now);
                prop_assert_eq!(t.source, TwinSource::Telemetry);
            }
        }

        #[test]
        fn prediction_stays_on_the_path(progress in 0.0f64..4.0, dt in 0.0f64..10.0, v in 0.0f64..1.0) {
            let Payload::Plan(p) = straight_plan(1, 3.0, 31).payload else { unreachable!() };
            let (pose, s) = predict_along(&p, progress.min(3.0), dt, v).unwrap();
            prop_assert!((0.0..=3.0 + 1e-12).contains(&s));
            prop_assert!(pose.y.abs() < 1e-12 && (pose.x - s).abs() < 1e-9);
        }
    }
}
