use std::collections::VecDeque;

use teleop_core::{GridIndex, OccupancyMsg};

use crate::error::MapError;
use crate::grid::OccupancyGrid;

/// Occupancy probability for a log-odds value.
pub fn probability(logodds: f64) -> f64 {
    1.0 / (1.0 + (-logodds).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    occupied: f64,
    free: f64,
}

impl Thresholds {
    pub fn new(occupied: f64, free: f64) -> Result<Self, MapError> {
        if !(0.0 < free && free < occupied && occupied < 1.0) {
            return Err(MapError::Thresholds { free, occupied });
        }
        Ok(Self { occupied, free })
    }

    pub fn occupied(&self) -> f64 {
        self.occupied
    }

    pub fn free(&self) -> f64 {
        self.free
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            occupied: 0.65,
            free: 0.25,
        }
    }
}

/// Tri-state export: probability above the occupied threshold is 100, below
/// the free threshold is 0, anything in between is -1.
pub fn classify(g: &OccupancyGrid, t: Thresholds) -> OccupancyMsg {
    let cells = g
        .logodds()
        .iter()
        .map(|&l| {
            let p = probability(l);
            if p > t.occupied {
                OccupancyMsg::OCCUPIED
            } else if p < t.free {
                OccupancyMsg::FREE
            } else {
                OccupancyMsg::UNKNOWN
            }
        })
        .collect();
    OccupancyMsg {
        header: g.geometry,
        cells,
    }
}

impl OccupancyGrid {
    /// Raw export: untouched cells are -1, the rest carry their occupancy
    /// probability as a percentage in `[0, 100]`.
    pub fn export_probabilities(&self) -> OccupancyMsg {
        let cells = self
            .logodds()
            .iter()
            .map(|&l| {
                if l == 0.0 {
                    OccupancyMsg::UNKNOWN
                } else {
                    (probability(l) * 100.0).round() as i8
                }
            })
            .collect();
        OccupancyMsg {
            header: self.geometry,
            cells,
        }
    }
}

/// Cells that cannot be reached from `from` through free space (4-connected
/// flood fill), excluding occupied cells themselves. Used to shade the
/// "inaccessible" regions in the UI; nothing stores it.
pub fn inaccessible_cells(msg: &OccupancyMsg, from: GridIndex) -> Vec<bool> {
    let h = msg.header;
    let mut reached = vec![false; h.len()];
    if !h.contains(from) || msg.cells[h.index(from)] != OccupancyMsg::FREE {
        return msg.cells.iter().map(|c| *c == OccupancyMsg::FREE).collect();
    }
    let mut queue = VecDeque::from([from]);
    reached[h.index(from)] = true;
    while let Some(c) = queue.pop_front() {
        let neighbors = [
            (c.col.wrapping_sub(1), c.row),
            (c.col + 1, c.row),
            (c.col, c.row.wrapping_sub(1)),
            (c.col, c.row + 1),
        ];
        for (col, row) in neighbors {
            let n = GridIndex::new(col, row);
            if h.contains(n) {
                let i = h.index(n);
                if !reached[i] && msg.cells[i] == OccupancyMsg::FREE {
                    reached[i] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    msg.cells
        .iter()
        .zip(&reached)
        .map(|(c, r)| *c == OccupancyMsg::FREE && !r)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use teleop_core::{GridGeometry, Pose2D};

    fn grid() -> OccupancyGrid {
        OccupancyGrid::new(GridGeometry::new(0.05, 8, 8, Pose2D::default()))
    }

    #[test]
    fn fresh_grid_is_unknown() {
        let msg = classify(&grid(), Thresholds::default());
        assert!(msg.cells.iter().all(|c| *c == -1));
    }

    #[test]
    fn saturated_cells_classify() {
        let mut g = grid();
        g.set_logodds(1, 1, 4.0);
        g.set_logodds(2, 2, -4.0);
        let p_hi = probability(4.0);
        assert!((p_hi - 0.982_013_790_037_908_4).abs() < 1e-15);
        assert!(p_hi > 0.65);
        assert!(probability(-4.0) < 0.25);
        let msg = classify(&g, Thresholds::default());
        assert_eq!(msg.cells[g.geometry.index(GridIndex::new(1, 1))], 100);
        assert_eq!(msg.cells[g.geometry.index(GridIndex::new(2, 2))], 0);
    }

    #[test]
    fn single_observations() {
        // one hit is enough to call a cell occupied, one free pass is not
        let mut g = grid();
        g.set_logodds(0, 0, 0.85);
        g.set_logodds(1, 0, -0.4);
        g.set_logodds(2, 0, -1.2);
        let msg = classify(&g, Thresholds::default());
        assert_eq!(&msg.cells[0..3], &[100, -1, 0]);
    }

    #[test]
    fn threshold_validation() {
        assert!(Thresholds::new(0.65, 0.25).is_ok());
        assert!(Thresholds::new(0.25, 0.65).is_err());
        assert!(Thresholds::new(1.0, 0.2).is_err());
        assert!(Thresholds::new(0.6, 0.0).is_err());
    }

    #[test]
    fn raw_export_range() {
        let mut g = grid();
        g.set_logodds(0, 0, 4.0);
        g.set_logodds(1, 0, -4.0);
        let msg = g.export_probabilities();
        assert_eq!(msg.cells[0], 98);
        assert_eq!(msg.cells[1], 2);
        assert_eq!(msg.cells[2], -1);
    }

    #[test]
    fn flood_fill_marks_enclosed_free_space() {
        // free everywhere, a wall column at col 3 splitting the grid
        let mut g = grid();
        for r in 0..8 {
            for c in 0..8 {
                g.set_logodds(c, r, if c == 3 { 4.0 } else { -4.0 });
            }
        }
        let msg = classify(&g, Thresholds::default());
        let cut = inaccessible_cells(&msg, GridIndex::new(0, 0));
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(cut[r * 8 + c], c > 3, "cell ({c},{r})");
            }
        }
    }
}
