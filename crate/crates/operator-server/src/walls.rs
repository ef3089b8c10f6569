//! Presentational wall segments built from scan endpoints.

use std::collections::BTreeMap;

use serde::Serialize;
use teleop_core::{LaserScan, Point2, Pose2D};

/// Consecutive endpoints closer than this are linked.
pub const LINK_DISTANCE: f64 = 0.15;
/// Segments not re-observed within this window are dropped.
pub const SEGMENT_TTL: f64 = 5.0;
/// Chains are simplified with this tolerance before storing.
const SIMPLIFY_TOLERANCE: f64 = 0.03;
/// Endpoint quantum for recognising a re-observed segment.
const KEY_QUANTUM: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallSegment {
    pub a: Point2,
    pub b: Point2,
    /// Time the segment was last observed.
    pub seen_at: f64,
}

type Key = (i64, i64, i64, i64);

fn key(a: Point2, b: Point2) -> Key {
    let q = |v: f64| (v / KEY_QUANTUM).round() as i64;
    let (ka, kb) = ((q(a.x), q(a.y)), (q(b.x), q(b.y)));
    // direction-independent
    let (p, r) = if ka <= kb { (ka, kb) } else { (kb, ka) };
    (p.0, p.1, r.0, r.1)
}

#[derive(Debug, Clone, Default)]
pub struct WallSegmentSet {
    segments: BTreeMap<Key, WallSegment>,
}

/// World-frame endpoints of the returns in `scan` taken from `pose`.
pub fn scan_endpoints(scan: &LaserScan, pose: &Pose2D) -> Vec<Option<Point2>> {
    scan.ranges
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            (scan.is_return(r) && r < scan.range_max).then(|| {
                let a = pose.theta + scan.bearing(i);
                Point2::new(pose.x + r * a.cos(), pose.y + r * a.sin())
            })
        })
        .collect()
}

/// Splits the endpoint sequence into chains of linked neighbours. A full
/// sweep wraps, so the last and first rays are neighbours too.
pub fn link_chains(points: &[Option<Point2>], link: f64) -> Vec<Vec<Point2>> {
    let mut chains: Vec<Vec<Point2>> = Vec::new();
    let mut cur: Vec<Point2> = Vec::new();
    for p in points {
        match p {
            Some(p) if cur.last().is_none_or(|q| q.distance(p) < link) => cur.push(*p),
            Some(p) => {
                chains.push(std::mem::replace(&mut cur, vec![*p]));
            }
            None => {
                if !cur.is_empty() {
                    chains.push(std::mem::take(&mut cur));
                }
            }
        }
    }
    if !cur.is_empty() {
        chains.push(cur);
    }
    if chains.len() > 1 {
        let first = chains[0][0];
        let last = *chains[chains.len() - 1].last().unwrap_or(&first);
        let wraps = points.first().is_some_and(Option::is_some) && points.last().is_some_and(Option::is_some);
        if wraps && last.distance(&first) < link {
            let head = chains.remove(0);
            if let Some(c) = chains.last_mut() {
                c.extend(head);
            }
        }
    }
    chains.retain(|c| c.len() >= 2);
    chains
}

fn perpendicular(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return p.distance(&a);
    }
    ((p.x - a.x) * dy - (p.y - a.y) * dx).abs() / len
}

/// Douglas-Peucker polyline simplification.
pub fn simplify(chain: &[Point2], tol: f64) -> Vec<Point2> {
    if chain.len() <= 2 {
        return chain.to_vec();
    }
    let (a, b) = (chain[0], chain[chain.len() - 1]);
    let (idx, dmax) = chain[1..chain.len() - 1]
        .iter()
        .enumerate()
        .map(|(i, p)| (i + 1, perpendicular(*p, a, b)))
        .fold((0, -1.0), |m, x| if x.1 > m.1 { x } else { m });
    if dmax <= tol {
        return vec![a, b];
    }
    let mut left = simplify(&chain[..=idx], tol);
    let right = simplify(&chain[idx..], tol);
    left.pop();
    left.extend(right);
    left
}

impl WallSegmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Segments in a stable order.
    pub fn segments(&self) -> Vec<WallSegment> {
        self.segments.values().copied().collect()
    }

    /// Adds the walls seen by `scan` from `pose` and expires old ones.
    pub fn ingest_scan(&mut self, scan: &LaserScan, pose: &Pose2D, now: f64) {
        let points = scan_endpoints(scan, pose);
        for chain in link_chains(&points, LINK_DISTANCE) {
            for w in simplify(&chain, SIMPLIFY_TOLERANCE).windows(2) {
                let seg = WallSegment {
                    a: w[0],
                    b: w[1],
                    seen_at: now,
                };
                self.segments.insert(key(w[0], w[1]), seg);
            }
        }
        self.expire(now);
    }

    pub fn expire(&mut self, now: f64) {
        self.segments.retain(|_, s| now - s.seen_at < SEGMENT_TTL);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scan(ranges: Vec<f64>) -> LaserScan {
        let n = ranges.len();
        LaserScan {
            stamp: 0.0,
            angle_min: 0.0,
            angle_increment: std::f64::consts::TAU / n as f64,
            range_min: 0.15,
            range_max: 12.0,
            ranges,
        }
    }

    #[test]
    fn max_range_and_no_return_make_no_endpoint() {
        let s = scan(vec![1.0, 12.0, 13.0, 0.1]);
        let e = scan_endpoints(&s, &Pose2D::default());
        assert!(e[0].is_some());
        assert!(e[1..].iter().all(Option::is_none));
    }

    #[test]
    fn gaps_split_chains() {
        let p = |x: f64| Some(Point2::new(x, 0.0));
        let pts = vec![p(0.0), p(0.1), p(0.2), p(1.0), p(1.1), None, p(2.0)];
        let c = link_chains(&pts, LINK_DISTANCE);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].len(), 3);
        assert_eq!(c[1].len(), 2);
    }

    #[test]
    fn sweep_wraps_around() {
        let p = |x: f64| Some(Point2::new(x, 0.0));
        let pts = vec![p(0.1), p(0.2), None, p(5.0), p(0.0)];
        let c = link_chains(&pts, LINK_DISTANCE);
        assert_eq!(c, vec![vec![Point2::new(0.0, 0.0), Point2::new(0.1, 0.0), Point2::new(0.2, 0.0)]]);
    }

    #[test]
    fn collinear_points_collapse_to_one_segment() {
        let chain: Vec<Point2> = (0..50).map(|i| Point2::new(i as f64 * 0.05, 1.0)).collect();
        assert_eq!(simplify(&chain, 0.01), vec![chain[0], chain[49]]);
        let corner = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)];
        assert_eq!(simplify(&corner, 0.01), corner);
    }

    #[test]
    fn wall_from_scan_and_expiry() {
        // wall at x = 1 seen from the origin over a narrow fan
        let n = 400;
        let inc = std::f64::consts::TAU / n as f64;
        let ranges = (0..n)
            .map(|i| {
                let a = i as f64 * inc;
                let a = if a > std::f64::consts::PI { a - std::f64::consts::TAU } else { a };
                if a.abs() < 0.5 { 1.0 / a.cos() } else { 13.0 }
            })
            .collect();
        let mut set = WallSegmentSet::new();
        set.ingest_scan(&scan(ranges), &Pose2D::default(), 1.0);
        assert_eq!(set.len(), 1);
        let s = set.segments()[0];
        assert!((s.a.x - 1.0).abs() < 1e-9 && (s.b.x - 1.0).abs() < 1e-9);
        set.expire(5.9);
        assert_eq!(set.len(), 1);
        set.expire(6.0);
        assert!(set.is_empty());
    }

    fn polyline_distance(p: Point2, line: &[Point2]) -> f64 {
        line.windows(2)
            .map(|w| {
                let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
                let len2 = dx * dx + dy * dy;
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (((p.x - w[0].x) * dx + (p.y - w[0].y) * dy) / len2).clamp(0.0, 1.0)
                };
                p.distance(&Point2::new(w[0].x + t * dx, w[0].y + t * dy))
            })
            .fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #[test]
        fn segments_only_join_real_returns(
            ranges in prop::collection::vec(prop_oneof![0.2f64..11.9, Just(12.0), Just(13.0)], 4..200),
            x in -3.0f64..3.0,
            th in -3.0f64..3.0,
        ) {
            let s = scan(ranges);
            let pose = Pose2D::new(x, 0.5, th);
            let ends: Vec<Point2> = scan_endpoints(&s, &pose).into_iter().flatten().collect();
            let mut set = WallSegmentSet::new();
            set.ingest_scan(&s, &pose, 1.0);
            for seg in set.segments() {
                prop_assert!(ends.contains(&seg.a) && ends.contains(&seg.b));
                prop_assert!(seg.a.distance(&seg.b) > 0.0 || ends.len() == 1);
            }
        }

        #[test]
        fn simplified_chain_stays_within_tolerance(
            ys in prop::collection::vec(-0.1f64..0.1, 2..60),
            tol in 0.0f64..0.05,
        ) {
            let chain: Vec<Point2> = ys.iter().enumerate().map(|(i, y)| Point2::new(i as f64 * 0.05, *y)).collect();
            let out = simplify(&chain, tol);
            prop_assert_eq!(out.first(), chain.first());
            prop_assert_eq!(out.last(), chain.last());
            for p in &chain {
                prop_assert!(polyline_distance(*p, &out) <= tol + 1e-12);
            }
        }
    }
}
