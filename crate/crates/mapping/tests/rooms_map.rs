//! Maps the reference rooms world from fixed viewpoints and compares the
//! result with an independently rasterized ground truth.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use teleop_core::{GridGeometry, GridIndex, OccupancyMsg, Point2, Pose2D};
use teleop_mapping::{classify, inaccessible_cells, load_map, save_map, OccupancyGrid, Thresholds};
use teleop_worldsim::{simulate_scan, ScanParams, SensorNoise, WorldModel};

const VIEWPOINTS: [(f64, f64); 9] = [
    (1.0, 1.5),
    (3.0, 1.0),
    (2.0, 2.5),
    (2.0, 4.0),
    (0.6, 5.4),
    (3.2, 5.2),
    (4.8, 1.5),
    (7.2, 1.0),
    (7.2, 5.2),
];

fn rooms() -> WorldModel {
    WorldModel::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../worlds/rooms.json")).unwrap()
}

fn geometry() -> GridGeometry {
    GridGeometry::new(0.05, 180, 140, Pose2D::new(-0.5, -0.5, 0.0))
}

fn build(world: &WorldModel, noise: SensorNoise, passes: usize) -> OccupancyGrid {
    let mut grid = OccupancyGrid::new(geometry());
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    for _ in 0..passes {
        for &(x, y) in &VIEWPOINTS {
            let pose = Pose2D::new(x, y, 0.3);
            let scan = simulate_scan(world, &pose, &ScanParams::default(), &noise, &mut rng, 0.0);
            grid.integrate_scan(&pose, &scan);
        }
    }
    grid
}

fn dist_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let t = (((p.x - a.x) * vx + (p.y - a.y) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
    (p.x - a.x - t * vx).hypot(p.y - a.y - t * vy)
}

/// Occupied within one cell of a boundary, free elsewhere inside the rooms.
fn truth(world: &WorldModel, geo: &GridGeometry) -> Vec<i8> {
    let b = world.bounds;
    let mut edges: Vec<(Point2, Point2)> = world.walls.iter().map(|s| (s.a, s.b)).collect();
    let rect = [
        Point2::new(b.min_x, b.min_y),
        Point2::new(b.max_x, b.min_y),
        Point2::new(b.max_x, b.max_y),
        Point2::new(b.min_x, b.max_y),
    ];
    for poly in std::iter::once(rect.to_vec()).chain(world.obstacles.iter().map(|o| o.polygon.clone())) {
        for i in 0..poly.len() {
            edges.push((poly[i], poly[(i + 1) % poly.len()]));
        }
    }
    let inside_box = |p: Point2, poly: &[Point2]| {
        let (lo_x, hi_x) = poly.iter().fold((f64::MAX, f64::MIN), |(l, h), q| (l.min(q.x), h.max(q.x)));
        let (lo_y, hi_y) = poly.iter().fold((f64::MAX, f64::MIN), |(l, h), q| (l.min(q.y), h.max(q.y)));
        p.x > lo_x && p.x < hi_x && p.y > lo_y && p.y < hi_y
    };
    (0..geo.len())
        .map(|i| {
            let c = Point2::new(
                geo.origin.x + ((i % geo.width) as f64 + 0.5) * geo.resolution,
                geo.origin.y + ((i / geo.width) as f64 + 0.5) * geo.resolution,
            );
            let near = edges.iter().any(|(a, e)| dist_to_segment(c, *a, *e) <= geo.resolution);
            let solid = !inside_box(c, &rect) || world.obstacles.iter().any(|o| inside_box(c, &o.polygon));
            if near || solid {
                OccupancyMsg::OCCUPIED
            } else {
                OccupancyMsg::FREE
            }
        })
        .collect()
}

fn agreement(grid: &OccupancyGrid, truth: &[i8]) -> (usize, f64) {
    let map = classify(grid, Thresholds::default());
    let observed: Vec<usize> = (0..truth.len()).filter(|&i| grid.logodds()[i] != 0.0).collect();
    let same = observed.iter().filter(|&&i| map.cells[i] == truth[i]).count();
    (observed.len(), same as f64 / observed.len() as f64)
}

#[test]
fn noise_free_map_agrees_with_ground_truth() {
    let world = rooms();
    let grid = build(&world, SensorNoise::off(0), 3);
    let (observed, frac) = agreement(&grid, &truth(&world, &geometry()));
    assert!(observed > 15_000, "{observed}");
    assert!(frac >= 0.95, "{frac}");
}

#[test]
fn nominal_range_noise_still_maps_the_rooms() {
    let world = rooms();
    let grid = build(&world, SensorNoise::default(), 5);
    let (_, frac) = agreement(&grid, &truth(&world, &geometry()));
    assert!(frac >= 0.9, "{frac}");
}

#[test]
fn every_room_is_reachable_from_the_start() {
    let world = rooms();
    let grid = build(&world, SensorNoise::off(0), 3);
    let map = classify(&grid, Thresholds::default());
    let geo = geometry();
    let start = geo.world_to_grid(world.robot_start.position()).unwrap();
    let cut_off = inaccessible_cells(&map, start);
    for &(x, y) in &VIEWPOINTS {
        let idx: GridIndex = geo.world_to_grid(Point2::new(x, y)).unwrap();
        assert!(!cut_off[geo.index(idx)], "({x}, {y}) unreachable");
    }
}

#[test]
fn built_map_round_trips_bit_exactly() {
    let grid = build(&rooms(), SensorNoise::default(), 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rooms.json");
    save_map(&grid, &path).unwrap();
    let back = load_map(&path).unwrap();
    assert_eq!(back.geometry, grid.geometry);
    assert_eq!(back.params, grid.params);
    let bits = |g: &OccupancyGrid| g.logodds().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&back), bits(&grid));
}
