//! Ground-truth world geometry and the JSON world file.
//!
//! World file (schema 1):
//!
//! ```json
//! {
//!   "schema": 1,
//!   "bounds": {"min_x": 0, "min_y": 0, "max_x": 10, "max_y": 6},
//!   "walls": [[x1, y1, x2, y2]],
//!   "obstacles": [{"polygon": [[x, y], ...], "waypoints": [[x, y], ...], "speed": 0.3, "loop": true}],
//!   "robot_start": {"x": 1, "y": 1, "theta": 0},
//!   "robot_radius": 0.11
//! }
//! ```
//!
//! The bounds rectangle is a physical wall. Scripted obstacles move their
//! centroid along `waypoints` (absolute positions) at `speed`; with `loop`
//! (the default) the script closes back to the first waypoint and repeats,
//! otherwise the obstacle parks at the last waypoint.

use std::path::Path;

use serde::{Deserialize, Serialize};
use teleop_core::{Point2, Pose2D};

use crate::error::WorldError;
use crate::geometry::{centroid, is_convex, point_in_polygon, point_segment_distance, polygon_edges, Segment};

pub const WORLD_SCHEMA: u32 = 1;
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn edges(&self) -> [Segment; 4] {
        let c = [
            Point2::new(self.min_x, self.min_y),
            Point2::new(self.max_x, self.min_y),
            Point2::new(self.max_x, self.max_y),
            Point2::new(self.min_x, self.max_y),
        ];
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }

    pub fn min(&self) -> Point2 {
        Point2::new(self.min_x, self.min_y)
    }

    pub fn max(&self) -> Point2 {
        Point2::new(self.max_x, self.max_y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleScript {
    pub waypoints: Vec<Point2>,
    pub speed: f64,
    pub looped: bool,
}

impl ObstacleScript {
    fn legs(&self) -> Vec<(Point2, Point2)> {
        let mut legs: Vec<_> = self.waypoints.windows(2).map(|w| (w[0], w[1])).collect();
        if self.looped && self.waypoints.len() > 1 {
            legs.push((*self.waypoints.last().unwrap(), self.waypoints[0]));
        }
        legs
    }

    /// Total distance of one pass (one full period when looped).
    pub fn length(&self) -> f64 {
        self.legs().iter().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn position_at(&self, progress: f64) -> Point2 {
        let mut rest = progress;
        for (a, b) in self.legs() {
            let d = a.distance(&b);
            if rest <= d {
                return if d > 0.0 { a.lerp(&b, rest / d) } else { a };
            }
            rest -= d;
        }
        if self.looped {
            self.waypoints[0]
        } else {
            *self.waypoints.last().unwrap()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    /// Current convex outline.
    pub polygon: Vec<Point2>,
    /// Outline relative to its centroid; only used for scripted obstacles.
    shape: Vec<Point2>,
    /// Outline as authored, written back by [`WorldModel::to_json`].
    authored: Vec<Point2>,
    pub script: Option<ObstacleScript>,
    /// Distance travelled along the script, wrapped to one period when looped.
    progress: f64,
}

impl Obstacle {
    pub fn fixed(polygon: Vec<Point2>) -> Self {
        Self::scripted(polygon, None)
    }

    /// A scripted obstacle starts with its centroid on the first waypoint.
    pub fn scripted(polygon: Vec<Point2>, script: Option<ObstacleScript>) -> Self {
        let c = centroid(&polygon);
        let shape: Vec<Point2> = polygon.iter().map(|p| Point2::new(p.x - c.x, p.y - c.y)).collect();
        let mut ob = Self {
            authored: polygon.clone(),
            polygon,
            shape,
            script,
            progress: 0.0,
        };
        ob.place();
        ob
    }

    pub fn centroid(&self) -> Point2 {
        centroid(&self.polygon)
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        polygon_edges(&self.polygon)
    }

    fn place(&mut self) {
        if let Some(script) = &self.script {
            let at = script.position_at(self.progress);
            self.polygon = self.shape.iter().map(|p| Point2::new(p.x + at.x, p.y + at.y)).collect();
        }
    }

    fn advance(&mut self, dt: f64) {
        let Some(script) = &self.script else { return };
        let len = script.length();
        if len <= 0.0 || script.speed <= 0.0 {
            return;
        }
        let next = self.progress + script.speed * dt;
        self.progress = if script.looped { next.rem_euclid(len) } else { next.min(len) };
        self.place();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    pub bounds: Bounds,
    pub walls: Vec<Segment>,
    pub obstacles: Vec<Obstacle>,
    pub robot_radius: f64,
    pub robot_start: Pose2D,
}

impl WorldModel {
    /// Empty world of the given bounds with the robot at the center.
    pub fn empty(bounds: Bounds) -> Self {
        Self {
            bounds,
            walls: Vec::new(),
            obstacles: Vec::new(),
            robot_radius: DEFAULT_ROBOT_RADIUS,
            robot_start: Pose2D::new(
                (bounds.min_x + bounds.max_x) / 2.0,
                (bounds.min_y + bounds.max_y) / 2.0,
                0.0,
            ),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        let file: WorldFile = serde_json::from_str(text)?;
        file.into_model()
    }

    /// World file of the initial state: scripted obstacles are written as
    /// authored, not where they have moved to.
    pub fn to_json(&self) -> String {
        let file = WorldFile::from_model(self);
        serde_json::to_string_pretty(&file).expect("world file serializes")
    }

    /// Every boundary segment: bounds, walls and obstacle edges.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.bounds
            .edges()
            .into_iter()
            .chain(self.walls.iter().copied())
            .chain(self.obstacles.iter().flat_map(|o| o.edges()))
    }

    /// Distance from `p` to the nearest boundary; zero inside an obstacle.
    pub fn clearance(&self, p: Point2) -> f64 {
        if self.obstacles.iter().any(|o| point_in_polygon(p, &o.polygon)) {
            return 0.0;
        }
        self.segments()
            .map(|s| point_segment_distance(p, &s))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when a disc of `radius` at `p` touches geometry or leaves bounds.
    pub fn collides(&self, p: Point2, radius: f64) -> bool {
        !self.bounds.contains(p) || self.clearance(p) <= radius
    }

    pub fn has_dynamic_obstacles(&self) -> bool {
        self.obstacles.iter().any(|o| o.script.is_some())
    }

    pub fn advance(&mut self, dt: f64) {
        for ob in &mut self.obstacles {
            ob.advance(dt);
        }
    }

    fn validate(&self) -> Result<(), WorldError> {
        let b = &self.bounds;
        if !(b.max_x > b.min_x && b.max_y > b.min_y) {
            return Err(WorldError::Invalid("bounds are empty".into()));
        }
        if self.robot_radius.is_nan() || self.robot_radius <= 0.0 {
            return Err(WorldError::Invalid("robot_radius must be positive".into()));
        }
        for (i, w) in self.walls.iter().enumerate() {
            if !b.contains(w.a) || !b.contains(w.b) {
                return Err(WorldError::Invalid(format!("wall {i} leaves the bounds")));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !is_convex(&o.polygon) {
                return Err(WorldError::Invalid(format!("obstacle {i} is not a convex polygon")));
            }
            if let Some(s) = &o.script {
                if s.waypoints.is_empty() || s.speed.is_nan() || s.speed <= 0.0 {
                    return Err(WorldError::Invalid(format!(
                        "obstacle {i} needs waypoints and a positive speed"
                    )));
                }
                for wp in &s.waypoints {
                    let inside = o.shape.iter().all(|p| b.contains(Point2::new(p.x + wp.x, p.y + wp.y)));
                    if !inside {
                        return Err(WorldError::Invalid(format!("obstacle {i} script leaves the bounds")));
                    }
                }
            } else if !o.polygon.iter().all(|p| b.contains(*p)) {
                return Err(WorldError::Invalid(format!("obstacle {i} leaves the bounds")));
            }
        }
        if !b.contains(self.robot_start.position()) {
            return Err(WorldError::Invalid("robot_start is outside the bounds".into()));
        }
        Ok(())
    }
}

/// Moves scripted obstacles forward by `dt`; all other geometry is unchanged.
pub fn advance_world(w: &WorldModel, dt: f64) -> WorldModel {
    let mut next = w.clone();
    next.advance(dt);
    next
}

#[derive(Debug, Serialize, Deserialize)]
struct WorldFile {
    schema: u32,
    bounds: Bounds,
    #[serde(default)]
    walls: Vec<[f64; 4]>,
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
    robot_start: Pose2D,
    #[serde(default = "default_radius")]
    robot_radius: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObstacleFile {
    polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    waypoints: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    #[serde(default = "default_loop", rename = "loop")]
    looped: bool,
}

fn default_radius() -> f64 {
    DEFAULT_ROBOT_RADIUS
}

fn default_loop() -> bool {
    true
}

fn pt(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

impl WorldFile {
    fn into_model(self) -> Result<WorldModel, WorldError> {
        if self.schema != WORLD_SCHEMA {
            return Err(WorldError::Schema {
                found: self.schema,
                expected: WORLD_SCHEMA,
            });
        }
        let obstacles = self
            .obstacles
            .into_iter()
            .map(|o| {
                let polygon: Vec<Point2> = o.polygon.into_iter().map(pt).collect();
                let script = match (o.waypoints, o.speed) {
                    (Some(w), Some(speed)) => Some(ObstacleScript {
                        waypoints: w.into_iter().map(pt).collect(),
                        speed,
                        looped: o.looped,
                    }),
                    (None, None) => None,
                    _ => {
                        return Err(WorldError::Invalid(
                            "obstacle waypoints and speed must be given together".into(),
                        ))
                    }
                };
                Ok(Obstacle::scripted(polygon, script))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let model = WorldModel {
            bounds: self.bounds,
            walls: self
                .walls
                .into_iter()
                .map(|w| Segment::new(Point2::new(w[0], w[1]), Point2::new(w[2], w[3])))
                .collect(),
            obstacles,
            robot_radius: self.robot_radius,
            robot_start: Pose2D::new(self.robot_start.x, self.robot_start.y, self.robot_start.theta),
        };
        model.validate()?;
        Ok(model)
    }

    fn from_model(m: &WorldModel) -> Self {
        Self {
            schema: WORLD_SCHEMA,
            bounds: m.bounds,
            walls: m.walls.iter().map(|s| [s.a.x, s.a.y, s.b.x, s.b.y]).collect(),
            obstacles: m
                .obstacles
                .iter()
                .map(|o| ObstacleFile {
                    polygon: o.authored.iter().map(|p| [p.x, p.y]).collect(),
                    waypoints: o.script.as_ref().map(|s| s.waypoints.iter().map(|p| [p.x, p.y]).collect()),
                    speed: o.script.as_ref().map(|s| s.speed),
                    looped: o.script.as_ref().is_none_or(|s| s.looped),
                })
                .collect(),
            robot_start: m.robot_start,
            robot_radius: m.robot_radius,
        }
    }
}
