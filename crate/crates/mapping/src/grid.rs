use serde::{Deserialize, Serialize};
use teleop_core::grid::for_each_on_line;
use teleop_core::{GridGeometry, LaserScan, Point2, Pose2D};

/// Additive log-odds update constants and clamps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogOddsParams {
    pub l_occ: f64,
    pub l_free: f64,
    pub l_min: f64,
    pub l_max: f64,
}

impl Default for LogOddsParams {
    fn default() -> Self {
        Self {
            l_occ: 0.85,
            l_free: -0.4,
            l_min: -4.0,
            l_max: 4.0,
        }
    }
}

const UNTOUCHED: u8 = 0;
const MARK_FREE: u8 = 1;
const MARK_OCC: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub geometry: GridGeometry,
    pub params: LogOddsParams,
    logodds: Vec<f64>,
    // Per-scan scratch: which cells this scan touched and how.
    marks: Vec<u8>,
    touched: Vec<usize>,
}

impl OccupancyGrid {
    /// Fresh grid with every cell unknown (log-odds 0).
    pub fn new(geometry: GridGeometry) -> Self {
        Self::with_params(geometry, LogOddsParams::default())
    }

    pub fn with_params(geometry: GridGeometry, params: LogOddsParams) -> Self {
        Self::from_logodds(geometry, params, vec![0.0; geometry.len()])
    }

    pub(crate) fn from_logodds(geometry: GridGeometry, params: LogOddsParams, logodds: Vec<f64>) -> Self {
        let n = geometry.len();
        Self {
            geometry,
            params,
            logodds,
            marks: vec![UNTOUCHED; n],
            touched: Vec::new(),
        }
    }

    pub fn logodds(&self) -> &[f64] {
        &self.logodds
    }

    pub fn logodds_at(&self, col: usize, row: usize) -> f64 {
        self.logodds[row * self.geometry.width + col]
    }

    pub fn set_logodds(&mut self, col: usize, row: usize, value: f64) {
        let i = row * self.geometry.width + col;
        self.logodds[i] = value.clamp(self.params.l_min, self.params.l_max);
    }

    /// Folds one scan taken at `pose` into the map.
    ///
    /// Every ray walks the raster line from the robot cell to its endpoint.
    /// Cells before the endpoint collect free evidence; the endpoint of a ray
    /// with a return collects occupied evidence. Rays without a return are
    /// traced to `range_max` and only clear cells. Rays leaving the grid are
    /// cut at the border. Within one scan each cell is updated at most once,
    /// and occupied evidence wins over free.
    pub fn integrate_scan(&mut self, pose: &Pose2D, scan: &LaserScan) {
        let Ok(start) = self.geometry.world_to_signed(pose.position()) else {
            return;
        };
        if !self.geometry.contains_signed(start.0, start.1) {
            return;
        }
        for (i, &r) in scan.ranges.iter().enumerate() {
            let hit = scan.is_return(r);
            let reach = if hit { r } else { scan.range_max };
            let bearing = pose.theta + scan.bearing(i);
            let end = Point2::new(pose.x + reach * bearing.cos(), pose.y + reach * bearing.sin());
            let Ok(end) = self.geometry.world_to_signed(end) else {
                continue;
            };
            self.trace_ray(start, end, hit);
        }
        self.apply_marks();
    }

    fn trace_ray(&mut self, start: (i64, i64), end: (i64, i64), hit: bool) {
        let geometry = self.geometry;
        let marks = &mut self.marks;
        let touched = &mut self.touched;
        for_each_on_line(start, end, |cell| {
            if !geometry.contains_signed(cell.0, cell.1) {
                return false;
            }
            let idx = cell.1 as usize * geometry.width + cell.0 as usize;
            let is_end = cell == end;
            let mark = if is_end && hit {
                MARK_OCC
            } else if is_end {
                return true;
            } else {
                MARK_FREE
            };
            if marks[idx] == UNTOUCHED {
                touched.push(idx);
            }
            marks[idx] = marks[idx].max(mark);
            true
        });
    }

    fn apply_marks(&mut self) {
        let p = self.params;
        for &idx in &self.touched {
            let delta = if self.marks[idx] == MARK_OCC { p.l_occ } else { p.l_free };
            self.logodds[idx] = (self.logodds[idx] + delta).clamp(p.l_min, p.l_max);
            self.marks[idx] = UNTOUCHED;
        }
        self.touched.clear();
    }
}
