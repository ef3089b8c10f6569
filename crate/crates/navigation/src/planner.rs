//! Cost-weighted A* on the 8-connected grid.
//!
//! Path weights are kept exact. Every edge weight is
//! `len × (1 + (c_from + c_to) / 2 / 256 × cost_weight)` with `len` either 1
//! or √2 cells, so a path weight is `(straight + diagonal·√2) / SCALE` for two
//! integers once `cost_weight` is fixed to 1/1024 steps. Comparing such pairs
//! exactly keeps A* and any other shortest-path search in perfect agreement
//! regardless of summation order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use teleop_core::{GridIndex, PlanPath, Point2, Pose2D};

use crate::costmap::Costmap;
use crate::error::NavError;

/// Denominator of the exact weight representation: 512 from the cost
/// average over 256, times 1024 for the fixed-point cost weight.
pub const SCALE: u64 = 512 * 1024;

/// Exact path weight `(straight + diagonal·√2) / SCALE`, in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PathCost {
    pub straight: u64,
    pub diagonal: u64,
}

impl PathCost {
    pub const ZERO: PathCost = PathCost {
        straight: 0,
        diagonal: 0,
    };

    pub fn to_f64(self) -> f64 {
        (self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2) / SCALE as f64
    }

    fn add(self, other: PathCost) -> PathCost {
        PathCost {
            straight: self.straight + other.straight,
            diagonal: self.diagonal + other.diagonal,
        }
    }
}

impl Ord for PathCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of a + b·√2 with a, b integers
        let a = self.straight as i128 - other.straight as i128;
        let b = self.diagonal as i128 - other.diagonal as i128;
        match (a.signum(), b.signum()) {
            (0, 0) => Ordering::Equal,
            (sa, sb) if sa >= 0 && sb >= 0 => Ordering::Greater,
            (sa, sb) if sa <= 0 && sb <= 0 => Ordering::Less,
            (1, _) => (a * a).cmp(&(2 * b * b)),
            _ => (2 * b * b).cmp(&(a * a)),
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    pub cost_weight: f64,
    /// How far from a blocked goal to look for a traversable substitute, m.
    pub goal_search_radius: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            cost_weight: 3.0,
            goal_search_radius: 0.3,
        }
    }
}

impl PlannerParams {
    fn weight_fixed(&self) -> u64 {
        (self.cost_weight.max(0.0) * 1024.0).round() as u64
    }

    /// Exact weight of one move between 8-adjacent cells.
    pub fn edge_cost(&self, from_cost: u8, to_cost: u8, diagonal: bool) -> PathCost {
        let units = SCALE + self.weight_fixed() * (from_cost as u64 + to_cost as u64);
        if diagonal {
            PathCost {
                straight: 0,
                diagonal: units,
            }
        } else {
            PathCost {
                straight: units,
                diagonal: 0,
            }
        }
    }
}

/// Octile distance in the same exact units; never exceeds the true weight.
fn octile(a: GridIndex, b: GridIndex) -> PathCost {
    let dc = a.col.abs_diff(b.col) as u64;
    let dr = a.row.abs_diff(b.row) as u64;
    let (lo, hi) = (dc.min(dr), dc.max(dr));
    PathCost {
        straight: (hi - lo) * SCALE,
        diagonal: lo * SCALE,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub path: PlanPath,
    pub cells: Vec<GridIndex>,
    pub cost: PathCost,
    /// Goal cell actually planned to (differs from the request when the
    /// requested goal was blocked).
    pub goal_cell: GridIndex,
}

#[derive(PartialEq, Eq)]
struct Open {
    f: PathCost,
    h: PathCost,
    cell: GridIndex,
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want the smallest key first
        (other.f, other.h, other.cell.row, other.cell.col).cmp(&(self.f, self.h, self.cell.row, self.cell.col))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NEIGHBORS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Minimal-weight path between two traversable cells.
pub fn astar(
    c: &Costmap,
    start: GridIndex,
    goal: GridIndex,
    params: &PlannerParams,
) -> Result<(Vec<GridIndex>, PathCost), NavError> {
    if !c.is_traversable(start) {
        return Err(NavError::StartInCollision);
    }
    if !c.is_traversable(goal) {
        return Err(NavError::GoalInCollision);
    }
    let geo = c.geometry;
    let mut g: Vec<Option<PathCost>> = vec![None; geo.len()];
    let mut parent: Vec<usize> = vec![usize::MAX; geo.len()];
    let mut closed = vec![false; geo.len()];
    let mut open = BinaryHeap::new();
    g[geo.index(start)] = Some(PathCost::ZERO);
    let h0 = octile(start, goal);
    open.push(Open {
        f: h0,
        h: h0,
        cell: start,
    });
    while let Some(Open { cell, .. }) = open.pop() {
        let ci = geo.index(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == goal {
            let mut cells = vec![cell];
            let mut i = ci;
            while parent[i] != usize::MAX {
                i = parent[i];
                cells.push(geo.cell_at(i));
            }
            cells.reverse();
            return Ok((cells, g[ci].expect("goal was reached")));
        }
        let gc = g[ci].expect("expanded cells have a cost");
        let from_cost = c.cost(cell);
        for (dc, dr) in NEIGHBORS {
            let (nc, nr) = (cell.col as i64 + dc, cell.row as i64 + dr);
            if !geo.contains_signed(nc, nr) {
                continue;
            }
            let n = GridIndex::new(nc as usize, nr as usize);
            let ni = geo.index(n);
            if closed[ni] || !c.is_traversable(n) {
                continue;
            }
            let tentative = gc.add(params.edge_cost(from_cost, c.cost(n), dc != 0 && dr != 0));
            if g[ni].is_none_or(|old| tentative < old) {
                g[ni] = Some(tentative);
                parent[ni] = ci;
                let h = octile(n, goal);
                open.push(Open {
                    f: tentative.add(h),
                    h,
                    cell: n,
                });
            }
        }
    }
    Err(NavError::NoPath)
}

/// Closest traversable cell to `p` within `radius` (by cell-center distance;
/// ties broken by row then column).
pub fn nearest_traversable(c: &Costmap, p: Point2, radius: f64) -> Option<GridIndex> {
    let geo = c.geometry;
    let (pc, pr) = geo.world_to_signed(p).ok()?;
    let reach = (radius / geo.resolution).ceil() as i64 + 1;
    let mut best: Option<(f64, usize, usize)> = None;
    for r in pr - reach..=pr + reach {
        for col in pc - reach..=pc + reach {
            if !geo.contains_signed(col, r) {
                continue;
            }
            let idx = GridIndex::new(col as usize, r as usize);
            if !c.is_traversable(idx) {
                continue;
            }
            let d = geo.cell_center(idx).distance(&p);
            if d > radius {
                continue;
            }
            let key = (d, idx.row, idx.col);
            if best.is_none_or(|b| key.partial_cmp(&b) == Some(Ordering::Less)) {
                best = Some(key);
            }
        }
    }
    best.map(|(_, row, col)| GridIndex::new(col, row))
}

/// Plans from `start` to `goal` in world coordinates.
///
/// A blocked goal is replaced by the nearest traversable cell within
/// `goal_search_radius`; only when there is none does planning fail with
/// [`NavError::GoalInCollision`].
pub fn plan_shortest_path(
    c: &Costmap,
    start: Pose2D,
    goal: Pose2D,
    params: &PlannerParams,
    stamp: f64,
) -> Result<Plan, NavError> {
    let geo = c.geometry;
    let start_cell = geo
        .world_to_grid(start.position())
        .map_err(|_| NavError::OutOfBounds { x: start.x, y: start.y })?;
    let requested = geo
        .world_to_grid(goal.position())
        .map_err(|_| NavError::OutOfBounds { x: goal.x, y: goal.y })?;
    if !c.is_traversable(start_cell) {
        return Err(NavError::StartInCollision);
    }
    let goal_cell = if c.is_traversable(requested) {
        requested
    } else {
        nearest_traversable(c, goal.position(), params.goal_search_radius).ok_or(NavError::GoalInCollision)?
    };
    let (cells, cost) = astar(c, start_cell, goal_cell, params)?;
    let mut points: Vec<Point2> = cells.iter().map(|i| geo.cell_center(*i)).collect();
    // End on the requested point itself when its cell was reachable, so the
    // follower does not stop up to half a diagonal short of it.
    if goal_cell == requested {
        *points.last_mut().expect("astar returns at least one cell") = goal.position();
    }
    Ok(Plan {
        path: PlanPath::from_points(stamp, &points, goal.theta),
        cells,
        cost,
        goal_cell,
    })
}
