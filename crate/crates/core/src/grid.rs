//! Grid indexing shared by the occupancy grid and the costmap.
//!
//! The origin is the lower-left corner of cell (0, 0); storage is row-major
//! and `row` grows with world `y`.

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::geometry::{Point2, Pose2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub col: usize,
    pub row: usize,
}

impl GridIndex {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }

    /// True when the two cells share an edge or a corner.
    pub fn is_adjacent8(&self, other: &GridIndex) -> bool {
        let dc = self.col.abs_diff(other.col);
        let dr = self.row.abs_diff(other.row);
        dc <= 1 && dr <= 1 && (dc + dr) > 0
    }
}

/// Converts a world point to the cell containing it, without an upper bound.
pub fn world_to_grid(p: Point2, origin: Pose2D, resolution: f64) -> Result<GridIndex, GridError> {
    let (c, r) = world_to_cell_signed(p, origin, resolution)?;
    if c < 0 || r < 0 {
        return Err(GridError::OutOfBounds { x: p.x, y: p.y });
    }
    Ok(GridIndex::new(c as usize, r as usize))
}

/// Signed cell coordinates; used where rays may leave the grid.
pub fn world_to_cell_signed(
    p: Point2,
    origin: Pose2D,
    resolution: f64,
) -> Result<(i64, i64), GridError> {
    if !resolution.is_finite() || resolution <= 0.0 {
        return Err(GridError::Arithmetic(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let fx = ((p.x - origin.x) / resolution).floor();
    let fy = ((p.y - origin.y) / resolution).floor();
    if !fx.is_finite() || !fy.is_finite() || fx.abs() > 1e15 || fy.abs() > 1e15 {
        return Err(GridError::Arithmetic(format!(
            "cannot index point ({}, {})",
            p.x, p.y
        )));
    }
    Ok((fx as i64, fy as i64))
}

/// Extent and placement of a rectangular grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub origin: Pose2D,
}

impl GridGeometry {
    pub fn new(resolution: f64, width: usize, height: usize, origin: Pose2D) -> Self {
        Self {
            resolution,
            width,
            height,
            origin,
        }
    }

    /// Smallest grid covering the rectangle `[min, max]`.
    pub fn covering(min: Point2, max: Point2, resolution: f64) -> Self {
        let width = ((max.x - min.x) / resolution).ceil().max(1.0) as usize;
        let height = ((max.y - min.y) / resolution).ceil().max(1.0) as usize;
        Self::new(resolution, width, height, Pose2D::new(min.x, min.y, 0.0))
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, idx: GridIndex) -> bool {
        idx.col < self.width && idx.row < self.height
    }

    pub fn contains_signed(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as u64) < self.width as u64 && (row as u64) < self.height as u64
    }

    pub fn world_to_grid(&self, p: Point2) -> Result<GridIndex, GridError> {
        let idx = world_to_grid(p, self.origin, self.resolution)?;
        if !self.contains(idx) {
            return Err(GridError::OutOfBounds { x: p.x, y: p.y });
        }
        Ok(idx)
    }

    pub fn world_to_signed(&self, p: Point2) -> Result<(i64, i64), GridError> {
        world_to_cell_signed(p, self.origin, self.resolution)
    }

    /// World coordinates of the center of `idx`.
    pub fn cell_center(&self, idx: GridIndex) -> Point2 {
        Point2::new(
            self.origin.x + (idx.col as f64 + 0.5) * self.resolution,
            self.origin.y + (idx.row as f64 + 0.5) * self.resolution,
        )
    }

    pub fn index(&self, idx: GridIndex) -> usize {
        idx.row * self.width + idx.col
    }

    pub fn cell_at(&self, linear: usize) -> GridIndex {
        GridIndex::new(linear % self.width, linear / self.width)
    }

    /// World-space `(min, max)` corners of the grid.
    pub fn extent(&self) -> (Point2, Point2) {
        let min = Point2::new(self.origin.x, self.origin.y);
        let max = Point2::new(
            self.origin.x + self.width as f64 * self.resolution,
            self.origin.y + self.height as f64 * self.resolution,
        );
        (min, max)
    }
}

/// Bresenham line between two cells, both ends included. Consecutive cells are
/// 8-adjacent.
pub fn raster_line(a: GridIndex, b: GridIndex) -> Vec<GridIndex> {
    raster_line_signed((a.col as i64, a.row as i64), (b.col as i64, b.row as i64))
        .into_iter()
        .map(|(c, r)| GridIndex::new(c as usize, r as usize))
        .collect()
}

/// Signed-coordinate Bresenham, for rays whose far end may lie off the grid.
pub fn raster_line_signed(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(((b.0 - a.0).abs().max((b.1 - a.1).abs()) + 1) as usize);
    for_each_on_line(a, b, |c| {
        out.push(c);
        true
    });
    out
}

/// Walks the Bresenham line from `a` to `b`, stopping early when `visit`
/// returns false. Returns true if the whole line was visited.
pub fn for_each_on_line(a: (i64, i64), b: (i64, i64), mut visit: impl FnMut((i64, i64)) -> bool) -> bool {
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = a;
    loop {
        if !visit((x, y)) {
            return false;
        }
        if x == b.0 && y == b.1 {
            return true;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin() -> Pose2D {
        Pose2D::new(0.0, 0.0, 0.0)
    }

    #[test]
    fn world_to_grid_examples() {
        assert_eq!(
            world_to_grid(Point2::new(0.0, 0.0), origin(), 0.05).unwrap(),
            GridIndex::new(0, 0)
        );
        assert_eq!(
            world_to_grid(Point2::new(1.0, 0.5), origin(), 0.05).unwrap(),
            GridIndex::new(20, 10)
        );
        assert!(matches!(
            world_to_grid(Point2::new(-0.01, 0.0), origin(), 0.05),
            Err(GridError::OutOfBounds { .. })
        ));
        assert!(matches!(
            world_to_grid(Point2::new(0.0, 0.0), origin(), 0.0),
            Err(GridError::Arithmetic(_))
        ));
        assert!(matches!(
            world_to_grid(Point2::new(f64::NAN, 0.0), origin(), 0.05),
            Err(GridError::Arithmetic(_))
        ));
    }

    #[test]
    fn bounded_geometry_rejects_far_points() {
        let g = GridGeometry::new(0.05, 10, 10, origin());
        assert!(g.world_to_grid(Point2::new(0.49, 0.49)).is_ok());
        assert!(matches!(
            g.world_to_grid(Point2::new(0.5, 0.1)),
            Err(GridError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn raster_trivial_cases() {
        let o = GridIndex::new(0, 0);
        assert_eq!(raster_line(o, o), vec![o]);
        assert_eq!(
            raster_line(o, GridIndex::new(3, 0)),
            (0..=3).map(|c| GridIndex::new(c, 0)).collect::<Vec<_>>()
        );
    }

    // Oracle: sample the segment between cell centers densely, keep every cell
    // the samples touch, then along the major axis keep the touched cell whose
    // center lies closest to the continuous line.
    fn dense_sample_line(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
        let (ax, ay) = (a.0 as f64, a.1 as f64);
        let (bx, by) = (b.0 as f64, b.1 as f64);
        let steps = 10_000;
        let mut touched: Vec<(i64, i64)> = Vec::new();
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let cell = ((ax + (bx - ax) * t).round() as i64, (ay + (by - ay) * t).round() as i64);
            if touched.last() != Some(&cell) {
                touched.push(cell);
            }
        }
        let x_major = (b.0 - a.0).abs() >= (b.1 - a.1).abs();
        let line_dist = |c: &(i64, i64)| {
            let (px, py) = (c.0 as f64, c.1 as f64);
            ((bx - ax) * (ay - py) - (ax - px) * (by - ay)).abs()
        };
        let mut out: Vec<(i64, i64)> = Vec::new();
        for c in touched {
            let key = |c: &(i64, i64)| if x_major { c.0 } else { c.1 };
            match out.last() {
                Some(last) if key(last) == key(&c) => {
                    if line_dist(&c) < line_dist(last) {
                        *out.last_mut().unwrap() = c;
                    }
                }
                _ => out.push(c),
            }
        }
        out
    }

    #[test]
    fn raster_matches_dense_sampling() {
        let oracle = dense_sample_line((0, 0), (5, 3));
        assert_eq!(oracle, vec![(0, 0), (1, 1), (2, 1), (3, 2), (4, 2), (5, 3)]);
        let got: Vec<_> = raster_line(GridIndex::new(0, 0), GridIndex::new(5, 3))
            .into_iter()
            .map(|g| (g.col as i64, g.row as i64))
            .collect();
        assert_eq!(got, oracle);
    }

    proptest! {
        #[test]
        fn raster_endpoints_and_adjacency(ac in 0usize..40, ar in 0usize..40, bc in 0usize..40, br in 0usize..40) {
            let a = GridIndex::new(ac, ar);
            let b = GridIndex::new(bc, br);
            let line = raster_line(a, b);
            prop_assert_eq!(line[0], a);
            prop_assert_eq!(*line.last().unwrap(), b);
            for w in line.windows(2) {
                prop_assert!(w[0].is_adjacent8(&w[1]));
            }
        }

        #[test]
        fn center_round_trip(c in 0usize..400, r in 0usize..400, ox in -5.0f64..5.0, oy in -5.0f64..5.0) {
            let g = GridGeometry::new(0.05, 400, 400, Pose2D::new(ox, oy, 0.0));
            let idx = GridIndex::new(c, r);
            let center = g.cell_center(idx);
            prop_assert_eq!(g.world_to_grid(center).unwrap(), idx);
        }

        #[test]
        fn inverse_within_half_cell(x in 0.0f64..20.0, y in 0.0f64..20.0) {
            let g = GridGeometry::new(0.05, 400, 400, Pose2D::new(0.0, 0.0, 0.0));
            let idx = g.world_to_grid(Point2::new(x, y)).unwrap();
            let c = g.cell_center(idx);
            prop_assert!((c.x - x).abs() <= 0.025 + 1e-12);
            prop_assert!((c.y - y).abs() <= 0.025 + 1e-12);
        }
    }
}
