use crate::error::GeometryError;
use crate::model::{Drawing, Point};

use super::flatten_tolerance;

/// Ordered points with at least two entries and no repeated consecutive point.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Option<Self> {
        let ok = points.len() >= 2 && points.windows(2).all(|w| w[0] != w[1]);
        ok.then_some(Polyline { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn length(&self) -> f64 {
        super::polyline_length(&self.points)
    }
}

/// Uniform-parameter flattening of a quadratic Bézier. The second
/// derivative is constant, so `n` steps keep the chord error below
/// `|p0 - 2p1 + p2| / (4 n²)`.
pub fn flatten_quadratic(p0: Point, p1: Point, p2: Point, tolerance: f64) -> Vec<Point> {
    let accel = (p0 - p1 * 2.0 + p2).length();
    let n = (accel / (4.0 * tolerance)).sqrt().ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    out.push(p0);
    for i in 1..n {
        let t = i as f64 / n as f64;
        let mt = 1.0 - t;
        out.push(p0 * (mt * mt) + p1 * (2.0 * mt * t) + p2 * (t * t));
    }
    out.push(p2);
    out
}

pub fn flatten_edge(d: &Drawing, edge: usize) -> Result<Polyline, GeometryError> {
    flatten_edge_with_tolerance(d, edge, flatten_tolerance(&d.canvas))
}

pub fn flatten_edge_with_tolerance(
    d: &Drawing,
    edge: usize,
    tolerance: f64,
) -> Result<Polyline, GeometryError> {
    if edge >= d.graph.edge_count() {
        return Err(GeometryError::NoSuchEdge { edge });
    }
    let (p0, p1, p2) = d.edge_control_points(edge);
    if p0 == p2 {
        return Err(GeometryError::DegenerateEdge { edge });
    }
    let points = if d.curvatures[edge] == 0.0 {
        vec![p0, p2]
    } else {
        flatten_quadratic(p0, p1, p2, tolerance)
    };
    Polyline::new(points).ok_or(GeometryError::DegenerateEdge { edge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Graph;
    use crate::geometry::FLATTEN_TOLERANCE;
    use proptest::prelude::*;

    fn single_edge(a: Point, b: Point, curvature: f64) -> Drawing {
        Drawing::straight(Graph::new(2, vec![(0, 1)]).unwrap(), vec![a, b])
            .with_curvatures(vec![curvature])
    }

    fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
        let ab = b - a;
        let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
        p.distance(a + ab * t)
    }

    fn distance_to_polyline(p: Point, pts: &[Point]) -> f64 {
        pts.windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn straight_edge_is_two_points() {
        let d = single_edge(Point::new(0.0, 0.0), Point::new(10.0, 0.0), 0.0);
        let p = flatten_edge(&d, 0).unwrap();
        assert_eq!(p.points(), &[Point::new(0.0, 0.0), Point::new(10.0, 0.0)]);
    }

    #[test]
    fn apex_is_half_the_control_offset() {
        let d = single_edge(Point::new(0.0, 0.0), Point::new(10.0, 0.0), 0.5);
        let p = flatten_edge(&d, 0).unwrap();
        let apex = p.points().iter().map(|q| q.y.abs()).fold(0.0, f64::max);
        assert!((apex - 2.5).abs() <= FLATTEN_TOLERANCE, "apex {apex}");
    }

    #[test]
    fn degenerate_edge_is_an_error() {
        let d = single_edge(Point::new(3.0, 3.0), Point::new(3.0, 3.0), 0.2);
        assert_eq!(flatten_edge(&d, 0), Err(GeometryError::DegenerateEdge { edge: 0 }));
    }

    proptest! {
        // Dense sampling at tolerance/10 approximates the true curve; the
        // Hausdorff distance to the flattened polyline must stay within tolerance.
        #[test]
        fn flattening_respects_hausdorff_bound(
            ax in 0.0..1000.0f64, ay in 0.0..1000.0f64,
            bx in 0.0..1000.0f64, by in 0.0..1000.0f64,
            c in -1.0..1.0f64,
        ) {
            let a = Point::new(ax, ay);
            let b = Point::new(bx, by);
            prop_assume!(a.distance(b) > 1.0);
            let d = single_edge(a, b, c);
            let coarse = flatten_edge(&d, 0).unwrap();
            let dense = flatten_edge_with_tolerance(&d, 0, FLATTEN_TOLERANCE / 10.0).unwrap();
            let (p0, p1, p2) = d.edge_control_points(0);
            // sample the exact curve too, so the oracle does not rely on flattening
            let exact: Vec<Point> = (0..=2000).map(|i| {
                let t = i as f64 / 2000.0;
                p0 * ((1.0 - t) * (1.0 - t)) + p1 * (2.0 * (1.0 - t) * t) + p2 * (t * t)
            }).collect();
            let slack = FLATTEN_TOLERANCE / 10.0 + 1e-9;
            for &q in dense.points().iter().chain(&exact) {
                prop_assert!(distance_to_polyline(q, coarse.points()) <= FLATTEN_TOLERANCE + slack);
            }
            for &q in coarse.points() {
                prop_assert!(distance_to_polyline(q, &exact) <= FLATTEN_TOLERANCE + slack);
            }
        }
    }
}
