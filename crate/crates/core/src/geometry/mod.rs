//! Geometric primitives the metrics are built on.
//!
//! Every edge is flattened to a polyline once; crossings, faces and lengths
//! are all computed on those polylines.

mod arrangement;
mod crossing;
mod flatten;

pub use arrangement::{compute_faces, compute_faces_from_paths, Face};
pub use crossing::{find_crossings, find_crossings_in_paths, segment_intersection, Crossing};
pub use flatten::{flatten_edge, flatten_edge_with_tolerance, flatten_quadratic, Polyline};

use crate::error::GeometryError;
use crate::model::{Drawing, Point};

/// Flattening tolerance in canvas units (Hausdorff bound).
pub const FLATTEN_TOLERANCE: f64 = 0.25;

/// Flattening tolerance for a canvas: `FLATTEN_TOLERANCE` on the default
/// 1000×1000 canvas, proportional to the diagonal elsewhere.
pub fn flatten_tolerance(canvas: &crate::model::Canvas) -> f64 {
    FLATTEN_TOLERANCE * canvas.diagonal() / crate::model::Canvas::default().diagonal()
}
/// Intersections this close to a node are not counted as crossings.
pub const SNAP_EPSILON: f64 = 1e-6;
/// Snap-rounding grid for arrangement vertices.
pub const SNAP_GRID: f64 = 1e-7;
/// Allowed reflex deviation (degrees) for a face to still count as convex.
pub const CONVEXITY_TOLERANCE_DEG: f64 = 1.0;

/// Flattened geometry of every edge. Degenerate edges (coincident
/// endpoints) become a single point and take part in nothing.
pub fn edge_paths(d: &Drawing) -> Vec<Vec<Point>> {
    (0..d.graph.edge_count())
        .map(|e| match flatten_edge(d, e) {
            Ok(p) => p.into_points(),
            Err(_) => vec![d.positions[d.graph.edges[e].0]],
        })
        .collect()
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Unit-free tangent direction of `edge` leaving `node`.
pub fn tangent_at(d: &Drawing, edge: usize, node: usize) -> Point {
    let (p0, ctrl, p2) = d.edge_control_points(edge);
    let (a, _) = d.graph.edges[edge];
    if a == node {
        ctrl - p0
    } else {
        ctrl - p2
    }
}

/// Angles (degrees) between circularly adjacent incident-edge tangents at
/// `node`, starting from the smallest tangent direction. Sums to 360.
pub fn incident_angles(d: &Drawing, node: usize) -> Result<Vec<f64>, GeometryError> {
    let incident: Vec<usize> = d
        .graph
        .edges
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| a == node || b == node)
        .map(|(i, _)| i)
        .collect();
    let degree = incident.len();
    if degree < 2 {
        return Err(GeometryError::UndefinedForNode { node, degree });
    }
    let mut dirs: Vec<f64> = incident
        .iter()
        .map(|&e| tangent_at(d, e, node).angle().to_degrees().rem_euclid(360.0))
        .collect();
    dirs.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = dirs.windows(2).map(|w| w[1] - w[0]).collect();
    out.push(360.0 - (dirs[degree - 1] - dirs[0]));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Graph;

    fn star(directions_deg: &[f64]) -> Drawing {
        let n = directions_deg.len() + 1;
        let g = Graph::new(n, (1..n).map(|i| (0, i)).collect()).unwrap();
        let mut pos = vec![Point::new(500.0, 500.0)];
        for &a in directions_deg {
            let r = a.to_radians();
            pos.push(Point::new(500.0 + 100.0 * r.cos(), 500.0 + 100.0 * r.sin()));
        }
        Drawing::straight(g, pos)
    }

    #[test]
    fn compass_star_has_right_angles() {
        let a = incident_angles(&star(&[0.0, 90.0, 180.0, 270.0]), 0).unwrap();
        assert_eq!(a.len(), 4);
        for x in a {
            assert!((x - 90.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_edge_angles() {
        let a = incident_angles(&star(&[0.0, 60.0]), 0).unwrap();
        assert!((a[0] - 60.0).abs() < 1e-9 && (a[1] - 300.0).abs() < 1e-9, "{a:?}");
    }

    #[test]
    fn leaf_is_undefined() {
        let d = star(&[0.0, 60.0]);
        assert_eq!(
            incident_angles(&d, 1),
            Err(GeometryError::UndefinedForNode { node: 1, degree: 1 })
        );
    }

    #[test]
    fn curved_edge_uses_tangent() {
        // A bowed edge leaves the node toward its control point, not its chord.
        let g = Graph::new(3, vec![(0, 1), (0, 2)]).unwrap();
        let d = Drawing::straight(
            g,
            vec![
                Point::new(500.0, 500.0),
                Point::new(600.0, 500.0),
                Point::new(500.0, 600.0),
            ],
        )
        .with_curvatures(vec![0.5, 0.0]);
        // control of edge 0: (550, 550) -> tangent at 45 degrees
        let a = incident_angles(&d, 0).unwrap();
        assert!((a[0] - 45.0).abs() < 1e-9, "{a:?}");
    }
}
