use teleop_core::Point2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }
}

/// Distance along the unit ray `(origin, dir)` to `seg`, if they meet at
/// `t >= 0`. Collinear overlaps report the nearest segment endpoint ahead.
pub fn ray_segment(origin: Point2, dir: (f64, f64), seg: &Segment) -> Option<f64> {
    let (ex, ey) = (seg.b.x - seg.a.x, seg.b.y - seg.a.y);
    let (wx, wy) = (seg.a.x - origin.x, seg.a.y - origin.y);
    let denom = cross(dir.0, dir.1, ex, ey);
    if denom == 0.0 {
        if cross(wx, wy, dir.0, dir.1) != 0.0 {
            return None;
        }
        let ta = wx * dir.0 + wy * dir.1;
        let tb = (seg.b.x - origin.x) * dir.0 + (seg.b.y - origin.y) * dir.1;
        return match (ta >= 0.0, tb >= 0.0) {
            (true, true) => Some(ta.min(tb)),
            (false, false) => None,
            _ => Some(0.0),
        };
    }
    let t = cross(wx, wy, ex, ey) / denom;
    let u = cross(wx, wy, dir.0, dir.1) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

pub fn point_segment_distance(p: Point2, seg: &Segment) -> f64 {
    let (dx, dy) = (seg.b.x - seg.a.x, seg.b.y - seg.a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&seg.a);
    }
    let t = (((p.x - seg.a.x) * dx + (p.y - seg.a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&seg.a.lerp(&seg.b, t))
}

/// Even-odd test; points on the boundary may land either way.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn polygon_edges(poly: &[Point2]) -> impl Iterator<Item = Segment> + '_ {
    let n = poly.len();
    (0..n).map(move |i| Segment::new(poly[i], poly[(i + 1) % n]))
}

/// Area centroid of a simple polygon; falls back to the vertex mean for
/// degenerate input.
pub fn centroid(poly: &[Point2]) -> Point2 {
    let mut a2 = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for s in polygon_edges(poly) {
        let c = cross(s.a.x, s.a.y, s.b.x, s.b.y);
        a2 += c;
        cx += (s.a.x + s.b.x) * c;
        cy += (s.a.y + s.b.y) * c;
    }
    if a2.abs() < 1e-15 {
        let n = poly.len().max(1) as f64;
        let sx: f64 = poly.iter().map(|p| p.x).sum();
        let sy: f64 = poly.iter().map(|p| p.y).sum();
        return Point2::new(sx / n, sy / n);
    }
    Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

pub fn is_convex(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for i in 0..n {
        let (a, b, c) = (poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
        let z = cross(b.x - a.x, b.y - a.y, c.x - b.x, c.y - b.y);
        if z != 0.0 {
            if sign != 0.0 && z.signum() != sign {
                return false;
            }
            sign = z.signum();
        }
    }
    sign != 0.0
}

fn cross(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}
