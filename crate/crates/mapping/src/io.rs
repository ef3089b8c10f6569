//! Map file: one JSON document, schema-versioned, with the raw log-odds in
//! row-major order. Values are written in shortest round-trip form, so a
//! save/load cycle reproduces every bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use teleop_core::{GridGeometry, Pose2D};

use crate::error::MapError;
use crate::grid::{LogOddsParams, OccupancyGrid};

pub const MAP_SCHEMA: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MapFile {
    schema: u32,
    resolution: f64,
    width: usize,
    height: usize,
    origin: Pose2D,
    params: LogOddsParams,
    logodds: Vec<f64>,
}

pub fn save_map(g: &OccupancyGrid, path: impl AsRef<Path>) -> Result<(), MapError> {
    let file = MapFile {
        schema: MAP_SCHEMA,
        resolution: g.geometry.resolution,
        width: g.geometry.width,
        height: g.geometry.height,
        origin: g.geometry.origin,
        params: g.params,
        logodds: g.logodds().to_vec(),
    };
    let text = serde_json::to_string(&file)?;
    // write-then-rename so readers never see a half-written map
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_map(path: impl AsRef<Path>) -> Result<OccupancyGrid, MapError> {
    let text = fs::read_to_string(path)?;
    let file: MapFile = serde_json::from_str(&text)?;
    if file.schema != MAP_SCHEMA {
        return Err(MapError::Schema {
            found: file.schema,
            expected: MAP_SCHEMA,
        });
    }
    if file.resolution.is_nan() || file.resolution <= 0.0 {
        return Err(MapError::Mismatch(format!("resolution {} is not positive", file.resolution)));
    }
    let expected = file.width * file.height;
    if file.logodds.len() != expected {
        return Err(MapError::Mismatch(format!(
            "{}x{} grid needs {expected} cells, file has {}",
            file.width,
            file.height,
            file.logodds.len()
        )));
    }
    let geometry = GridGeometry::new(file.resolution, file.width, file.height, file.origin);
    Ok(OccupancyGrid::from_logodds(geometry, file.params, file.logodds))
}
