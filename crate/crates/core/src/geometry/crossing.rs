use serde::{Deserialize, Serialize};

use crate::model::{Drawing, Graph, Point};

use super::{edge_paths, SNAP_EPSILON};

/// A transversal intersection of two non-adjacent edges. The angle is taken
/// between the exact curve tangents at the intersection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Edge indices, smaller first.
    pub edges: (usize, usize),
    pub point: Point,
    /// Acute intersection angle in degrees, in `(0, 90]`.
    pub angle: f64,
}

/// Parameters `(s, t)` where segment `p→p2` at `s` meets `q→q2` at `t`.
/// `None` for parallel or collinear segments.
pub fn segment_intersection(p: Point, p2: Point, q: Point, q2: Point) -> Option<(f64, f64)> {
    let r = p2 - p;
    let s = q2 - q;
    let denom = r.cross(s);
    if denom.abs() <= 1e-12 * r.length() * s.length() {
        return None;
    }
    let qp = q - p;
    Some((qp.cross(s) / denom, qp.cross(r) / denom))
}

/// Acute angle in degrees between two direction vectors.
pub(crate) fn acute_angle(u: Point, v: Point) -> f64 {
    u.cross(v).abs().atan2(u.dot(v).abs()).to_degrees()
}

/// Derivative of the edge's quadratic Bézier at parameter `t`.
pub(crate) fn bezier_tangent(d: &Drawing, edge: usize, t: f64) -> Point {
    let (p0, p1, p2) = d.edge_control_points(edge);
    (p1 - p0) * (2.0 * (1.0 - t)) + (p2 - p1) * (2.0 * t)
}

#[derive(Clone, Copy)]
struct Bounds {
    min: Point,
    max: Point,
}

impl Bounds {
    fn of(points: &[Point]) -> Bounds {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Bounds { min, max }
    }

    fn overlaps(&self, other: &Bounds) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }
}

pub fn find_crossings(d: &Drawing) -> Vec<Crossing> {
    find_crossings_in_paths(d, &edge_paths(d))
}

/// Crossings over precomputed edge polylines. One entry per intersection
/// point, so two curved edges may cross more than once.
pub fn find_crossings_in_paths(d: &Drawing, paths: &[Vec<Point>]) -> Vec<Crossing> {
    let graph: &Graph = &d.graph;
    let bounds: Vec<Bounds> = paths.iter().map(|p| Bounds::of(p)).collect();
    let mut out = Vec::new();
    for e in 0..paths.len() {
        if paths[e].len() < 2 {
            continue;
        }
        for f in e + 1..paths.len() {
            if paths[f].len() < 2 || graph.shares_endpoint(e, f) || !bounds[e].overlaps(&bounds[f]) {
                continue;
            }
            let (a, b) = graph.edges[e];
            let (c, dd) = graph.edges[f];
            let nodes = [d.positions[a], d.positions[b], d.positions[c], d.positions[dd]];
            crossings_between(&paths[e], &paths[f], &bounds[f], |point, te, tf| {
                if nodes.iter().all(|n| n.distance(point) > SNAP_EPSILON) {
                    let angle = acute_angle(bezier_tangent(d, e, te), bezier_tangent(d, f, tf));
                    out.push(Crossing {
                        edges: (e, f),
                        point,
                        angle,
                    });
                }
            });
        }
    }
    out
}

fn crossings_between(
    first: &[Point],
    second: &[Point],
    second_bounds: &Bounds,
    mut emit: impl FnMut(Point, f64, f64),
) {
    let (nf, ns) = ((first.len() - 1) as f64, (second.len() - 1) as f64);
    let last_i = first.len() - 2;
    let last_j = second.len() - 2;
    for (i, w) in first.windows(2).enumerate() {
        let seg = Bounds::of(w);
        if !seg.overlaps(second_bounds) {
            continue;
        }
        for (j, v) in second.windows(2).enumerate() {
            if !seg.overlaps(&Bounds::of(v)) {
                continue;
            }
            let Some((s, t)) = segment_intersection(w[0], w[1], v[0], v[1]) else {
                continue;
            };
            // Half-open segments so a hit on a shared polyline vertex counts once.
            let s_ok = s >= 0.0 && (s < 1.0 || (i == last_i && s <= 1.0));
            let t_ok = t >= 0.0 && (t < 1.0 || (j == last_j && t <= 1.0));
            if s_ok && t_ok {
                let point = w[0].lerp(w[1], s);
                // polylines are uniform in the curve parameter
                emit(point, (i as f64 + s) / nf, (j as f64 + t) / ns);
            }
        }
    }
}
