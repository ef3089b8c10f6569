//! 2D occupancy grid mapping from range scans taken at known (odometric)
//! poses, with tri-state export and JSON persistence.
//!
//! There is no scan matching: the pose handed to
//! [`OccupancyGrid::integrate_scan`] is trusted as-is.

mod classify;
mod error;
mod grid;
mod io;

pub use classify::{classify, inaccessible_cells, probability, Thresholds};
pub use error::MapError;
pub use grid::{LogOddsParams, OccupancyGrid};
pub use io::{load_map, save_map, MAP_SCHEMA};
