use serde::{Deserialize, Serialize};
use teleop_core::{GridGeometry, GridIndex, OccupancyMsg};

use crate::error::NavError;

pub const LETHAL: u8 = 254;
pub const INSCRIBED: u8 = 253;
pub const FREE: u8 = 0;
pub const UNKNOWN_COST: u8 = 128;
/// Highest cost the exponential decay can produce.
const MAX_INFLATED: f64 = 252.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InflationParams {
    pub robot_radius: f64,
    pub inflation_radius: f64,
    /// Exponential decay rate, 1/m.
    pub decay: f64,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self {
            robot_radius: 0.11,
            inflation_radius: 0.35,
            decay: 10.0,
        }
    }
}

/// Cost of a cell at distance `d` from the nearest occupied cell.
pub fn inflation_cost(d: f64, p: &InflationParams) -> u8 {
    if d <= 0.0 {
        LETHAL
    } else if d <= p.robot_radius {
        INSCRIBED
    } else if d <= p.inflation_radius {
        (MAX_INFLATED * (-p.decay * (d - p.robot_radius)).exp()).round() as u8
    } else {
        FREE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    pub geometry: GridGeometry,
    cost: Vec<u8>,
}

impl Costmap {
    pub fn from_costs(geometry: GridGeometry, cost: Vec<u8>) -> Self {
        assert_eq!(cost.len(), geometry.len(), "cost vector does not match geometry");
        Self { geometry, cost }
    }

    pub fn costs(&self) -> &[u8] {
        &self.cost
    }

    pub fn cost(&self, idx: GridIndex) -> u8 {
        self.cost[self.geometry.index(idx)]
    }

    pub fn is_traversable(&self, idx: GridIndex) -> bool {
        self.geometry.contains(idx) && self.cost(idx) < INSCRIBED
    }
}

/// Inflates occupied cells of `m` into a costmap.
///
/// Distances are exact Euclidean distances between cell centers, gathered by
/// stamping a disc of `inflation_radius` around every occupied cell. Unknown
/// cells cost at least [`UNKNOWN_COST`].
pub fn build_costmap(m: &OccupancyMsg, p: &InflationParams) -> Result<Costmap, NavError> {
    if !(p.robot_radius >= 0.0 && p.inflation_radius >= p.robot_radius && p.decay >= 0.0) {
        return Err(NavError::InvalidParams(format!(
            "need 0 <= robot_radius ({}) <= inflation_radius ({}) and decay >= 0",
            p.robot_radius, p.inflation_radius
        )));
    }
    let geo = m.header;
    let (w, h) = (geo.width as i64, geo.height as i64);
    let res = geo.resolution;
    let reach = (p.inflation_radius / res).ceil() as i64;
    let mut dist = vec![f64::INFINITY; geo.len()];
    for (i, _) in m.cells.iter().enumerate().filter(|(_, c)| **c == OccupancyMsg::OCCUPIED) {
        let (c0, r0) = ((i % geo.width) as i64, (i / geo.width) as i64);
        for dr in -reach..=reach {
            let r = r0 + dr;
            if r < 0 || r >= h {
                continue;
            }
            for dc in -reach..=reach {
                let c = c0 + dc;
                if c < 0 || c >= w {
                    continue;
                }
                let d = res * ((dc * dc + dr * dr) as f64).sqrt();
                let j = (r * w + c) as usize;
                if d < dist[j] {
                    dist[j] = d;
                }
            }
        }
    }
    let cost = dist
        .iter()
        .zip(&m.cells)
        .map(|(&d, &cell)| {
            let inflated = inflation_cost(d, p);
            if cell == OccupancyMsg::UNKNOWN {
                inflated.max(UNKNOWN_COST)
            } else {
                inflated
            }
        })
        .collect();
    Ok(Costmap { geometry: geo, cost })
}
