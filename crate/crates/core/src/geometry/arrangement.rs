//! Planar arrangement of flattened edges and face extraction.
//!
//! All pairwise segment intersections (crossings, T-junctions, collinear
//! overlaps) become vertices; vertices are snap-rounded to [`SNAP_GRID`];
//! faces are traced over the resulting half-edge structure by always
//! taking the next edge clockwise from the twin, which keeps each face on
//! the left of its boundary walk.

use std::collections::{BTreeSet, HashMap};

use crate::model::{Drawing, Point};

use super::crossing::segment_intersection;
use super::{edge_paths, CONVEXITY_TOLERANCE_DEG, SNAP_GRID};

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Closed boundary; the first vertex is not repeated at the end.
    /// Bounded faces are counter-clockwise.
    pub boundary: Vec<Point>,
    /// Enclosed area minus holes. Infinite for the unbounded face.
    pub area: f64,
    pub bounded: bool,
    pub convex: bool,
    /// Number of separate components nested inside this face.
    pub holes: usize,
}

pub fn compute_faces(d: &Drawing) -> Vec<Face> {
    compute_faces_from_paths(&edge_paths(d))
}

const PARAM_EPS: f64 = 1e-9;

struct Segment {
    edge: usize,
    a: Point,
    b: Point,
    min: Point,
    max: Point,
    splits: Vec<f64>,
}

pub fn compute_faces_from_paths(paths: &[Vec<Point>]) -> Vec<Face> {
    let mut segments = Vec::new();
    for (edge, path) in paths.iter().enumerate() {
        for w in path.windows(2) {
            segments.push(Segment {
                edge,
                a: w[0],
                b: w[1],
                min: Point::new(w[0].x.min(w[1].x), w[0].y.min(w[1].y)),
                max: Point::new(w[0].x.max(w[1].x), w[0].y.max(w[1].y)),
                splits: Vec::new(),
            });
        }
    }
    split_segments(&mut segments);

    let mut graph = PlanarGraph::default();
    for seg in &segments {
        let mut params = seg.splits.clone();
        params.push(0.0);
        params.push(1.0);
        params.sort_by(f64::total_cmp);
        let mut prev = None;
        for t in params {
            let v = graph.vertex(seg.a.lerp(seg.b, t));
            if let Some(u) = prev {
                graph.link(u, v);
            }
            prev = Some(v);
        }
    }
    graph.faces()
}

fn split_segments(segments: &mut [Segment]) {
    let n = segments.len();
    let mut splits: Vec<Vec<f64>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (s1, s2) = (&segments[i], &segments[j]);
            if s1.max.x < s2.min.x || s2.max.x < s1.min.x || s1.max.y < s2.min.y || s2.max.y < s1.min.y {
                continue;
            }
            // Consecutive pieces of one flattened Bézier only share their joint.
            if s1.edge == s2.edge {
                continue;
            }
            match segment_intersection(s1.a, s1.b, s2.a, s2.b) {
                Some((s, t)) => {
                    let range = -PARAM_EPS..=1.0 + PARAM_EPS;
                    if range.contains(&s) && range.contains(&t) {
                        if s > PARAM_EPS && s < 1.0 - PARAM_EPS {
                            splits[i].push(s);
                        }
                        if t > PARAM_EPS && t < 1.0 - PARAM_EPS {
                            splits[j].push(t);
                        }
                    }
                }
                None => {
                    collinear_splits(s1, s2, &mut splits[i]);
                    collinear_splits(s2, s1, &mut splits[j]);
                }
            }
        }
    }
    for (seg, s) in segments.iter_mut().zip(splits) {
        seg.splits = s;
    }
}

/// Splits `seg` at the endpoints of a collinear, overlapping `other`.
fn collinear_splits(seg: &Segment, other: &Segment, out: &mut Vec<f64>) {
    let dir = seg.b - seg.a;
    let len2 = dir.dot(dir);
    let scale = len2.sqrt();
    for p in [other.a, other.b] {
        let off = p - seg.a;
        if off.cross(dir).abs() > 1e-9 * scale.max(1.0) * scale.max(1.0) {
            continue;
        }
        let t = off.dot(dir) / len2;
        if t > PARAM_EPS && t < 1.0 - PARAM_EPS {
            out.push(t);
        }
    }
}

#[derive(Default)]
struct PlanarGraph {
    index: HashMap<(i64, i64), usize>,
    points: Vec<Point>,
    edges: BTreeSet<(usize, usize)>,
}

impl PlanarGraph {
    fn vertex(&mut self, p: Point) -> usize {
        let key = ((p.x / SNAP_GRID).round() as i64, (p.y / SNAP_GRID).round() as i64);
        let next = self.points.len();
        *self.index.entry(key).or_insert_with(|| {
            self.points
                .push(Point::new(key.0 as f64 * SNAP_GRID, key.1 as f64 * SNAP_GRID));
            next
        })
    }

    fn link(&mut self, u: usize, v: usize) {
        if u != v {
            self.edges.insert((u.min(v), u.max(v)));
        }
    }

    fn faces(&self) -> Vec<Face> {
        let nv = self.points.len();
        // half-edge h: 2k = (u -> v), 2k + 1 = (v -> u)
        let mut heads = Vec::with_capacity(self.edges.len() * 2);
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for &(u, v) in &self.edges {
            let h = heads.len();
            heads.push((u, v));
            heads.push((v, u));
            outgoing[u].push(h);
            outgoing[v].push(h + 1);
        }
        let angle = |h: usize| {
            let (u, v) = heads[h];
            (self.points[v] - self.points[u]).angle()
        };
        let mut slot = vec![0usize; heads.len()];
        for list in &mut outgoing {
            list.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
            for (k, &h) in list.iter().enumerate() {
                slot[h] = k;
            }
        }
        let next = |h: usize| {
            let twin = h ^ 1;
            let (v, _) = heads[twin];
            let list = &outgoing[v];
            list[(slot[twin] + list.len() - 1) % list.len()]
        };

        let mut component = vec![usize::MAX; nv];
        let mut ncomp = 0;
        for start in 0..nv {
            if component[start] != usize::MAX || outgoing[start].is_empty() {
                continue;
            }
            let mut stack = vec![start];
            component[start] = ncomp;
            while let Some(u) = stack.pop() {
                for &h in &outgoing[u] {
                    let w = heads[h].1;
                    if component[w] == usize::MAX {
                        component[w] = ncomp;
                        stack.push(w);
                    }
                }
            }
            ncomp += 1;
        }

        struct Cycle {
            vertices: Vec<usize>,
            signed_area: f64,
            bounded: bool,
            component: usize,
        }
        let mut visited = vec![false; heads.len()];
        let mut cycles = Vec::new();
        for h0 in 0..heads.len() {
            if visited[h0] {
                continue;
            }
            let mut vertices = Vec::new();
            let mut h = h0;
            while !visited[h] {
                visited[h] = true;
                vertices.push(heads[h].0);
                h = next(h);
            }
            let (signed_area, magnitude) = shoelace(&vertices, &self.points);
            cycles.push(Cycle {
                component: component[vertices[0]],
                bounded: signed_area > 1e-12 * magnitude.max(f64::MIN_POSITIVE),
                vertices,
                signed_area,
            });
        }

        // Attach each component's outer boundary to the innermost bounded
        // face of another component that contains it.
        let mut hole_area = vec![0.0; cycles.len()];
        let mut hole_count = vec![0usize; cycles.len()];
        let mut outer: Vec<usize> = Vec::new();
        for (ci, c) in cycles.iter().enumerate() {
            if c.bounded {
                continue;
            }
            let probe = self.points[c.vertices[0]];
            let host = cycles
                .iter()
                .enumerate()
                .filter(|(_, f)| f.bounded && f.component != c.component)
                .filter(|(_, f)| point_in_polygon(probe, &f.vertices, &self.points))
                .min_by(|a, b| a.1.signed_area.total_cmp(&b.1.signed_area))
                .map(|(i, _)| i);
            match host {
                Some(fi) => {
                    hole_area[fi] += -c.signed_area;
                    hole_count[fi] += 1;
                }
                None => outer.push(ci),
            }
        }

        let mut faces: Vec<Face> = cycles
            .iter()
            .enumerate()
            .filter(|(_, c)| c.bounded)
            .map(|(i, c)| {
                let boundary: Vec<Point> = c.vertices.iter().map(|&v| self.points[v]).collect();
                let convex = hole_count[i] == 0 && is_convex(&boundary);
                Face {
                    boundary,
                    area: c.signed_area - hole_area[i],
                    bounded: true,
                    convex,
                    holes: hole_count[i],
                }
            })
            .collect();
        let outermost = outer
            .iter()
            .copied()
            .min_by(|&a, &b| cycles[a].signed_area.total_cmp(&cycles[b].signed_area));
        faces.push(Face {
            boundary: outermost
                .map(|i| cycles[i].vertices.iter().map(|&v| self.points[v]).collect())
                .unwrap_or_default(),
            area: f64::INFINITY,
            bounded: false,
            convex: false,
            holes: 0,
        });
        faces
    }
}

/// Signed area (CCW positive) and the sum of term magnitudes.
fn shoelace(vertices: &[usize], points: &[Point]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut mag = 0.0;
    let n = vertices.len();
    for i in 0..n {
        let a = points[vertices[i]];
        let b = points[vertices[(i + 1) % n]];
        let term = a.cross(b);
        sum += term;
        mag += term.abs();
    }
    (sum / 2.0, mag / 2.0)
}

fn point_in_polygon(p: Point, vertices: &[usize], points: &[Point]) -> bool {
    let mut inside = false;
    let n = vertices.len();
    for i in 0..n {
        let a = points[vertices[i]];
        let b = points[vertices[(i + 1) % n]];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Counter-clockwise polygon with no turn more than the tolerance clockwise
/// and total turning of one full revolution.
fn is_convex(boundary: &[Point]) -> bool {
    let n = boundary.len();
    if n < 3 {
        return false;
    }
    // Reflex turning is summed rather than checked per vertex so the verdict
    // does not depend on how finely curved edges were flattened.
    let mut total = 0.0;
    let mut reflex = 0.0;
    for i in 0..n {
        let prev = boundary[(i + n - 1) % n];
        let cur = boundary[i];
        let next = boundary[(i + 1) % n];
        let u = cur - prev;
        let v = next - cur;
        let turn = u.cross(v).atan2(u.dot(v)).to_degrees();
        if turn < 0.0 {
            reflex += turn;
        }
        total += turn;
    }
    reflex >= -CONVEXITY_TOLERANCE_DEG && (total - 360.0).abs() < 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Graph;

    fn straight(n: usize, edges: Vec<(usize, usize)>, pos: &[(f64, f64)]) -> Drawing {
        Drawing::straight(
            Graph::new(n, edges).unwrap(),
            pos.iter().map(|&(x, y)| Point::new(x, y)).collect(),
        )
    }

    fn bounded(faces: &[Face]) -> Vec<&Face> {
        faces.iter().filter(|f| f.bounded).collect()
    }

    #[test]
    fn triangle_has_one_convex_face() {
        let d = straight(3, vec![(0, 1), (1, 2), (2, 0)], &[(100.0, 100.0), (400.0, 100.0), (200.0, 300.0)]);
        let faces = compute_faces(&d);
        assert_eq!(faces.len(), 2);
        let b = bounded(&faces);
        assert_eq!(b.len(), 1);
        assert!(b[0].convex);
        let expected = 0.5 * 300.0 * 200.0;
        assert!((b[0].area - expected).abs() <= 1e-6 * expected);
        assert_eq!(faces.iter().filter(|f| !f.bounded).count(), 1);
    }

    #[test]
    fn path_has_only_the_outer_face() {
        let d = straight(4, vec![(0, 1), (1, 2), (2, 3)], &[(0.0, 0.0), (100.0, 50.0), (200.0, 0.0), (300.0, 70.0)]);
        let faces = compute_faces(&d);
        assert_eq!(faces.len(), 1);
        assert!(!faces[0].bounded);
    }

    #[test]
    fn crossing_edges_split_the_square() {
        // square with both diagonals: 4 triangular faces
        let d = straight(
            4,
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)],
            &[(0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0)],
        );
        let faces = compute_faces(&d);
        let b = bounded(&faces);
        assert_eq!(b.len(), 4);
        for f in &b {
            assert!((f.area - 2500.0).abs() < 1e-6);
            assert!(f.convex);
        }
    }

    #[test]
    fn concave_face_detected() {
        let d = straight(
            4,
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            &[(0.0, 0.0), (100.0, 0.0), (50.0, 30.0), (50.0, 100.0)],
        );
        let faces = compute_faces(&d);
        let b = bounded(&faces);
        assert_eq!(b.len(), 1);
        assert!(!b[0].convex);
    }

    #[test]
    fn nested_component_is_a_hole() {
        let d = straight(
            6,
            vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)],
            &[(0.0, 0.0), (300.0, 0.0), (150.0, 300.0), (140.0, 50.0), (160.0, 50.0), (150.0, 70.0)],
        );
        let faces = compute_faces(&d);
        let b = bounded(&faces);
        assert_eq!(b.len(), 2);
        let outer = b.iter().find(|f| f.holes == 1).expect("host face");
        assert!((outer.area - (45000.0 - 200.0)).abs() < 1e-6);
        assert!(!outer.convex);
        assert_eq!(faces.iter().filter(|f| !f.bounded).count(), 1);
    }

    #[test]
    fn tree_hanging_into_face_breaks_convexity() {
        // triangle plus a pendant edge pointing inward
        let d = straight(
            4,
            vec![(0, 1), (1, 2), (2, 0), (0, 3)],
            &[(0.0, 0.0), (300.0, 0.0), (150.0, 300.0), (150.0, 100.0)],
        );
        let faces = compute_faces(&d);
        let b = bounded(&faces);
        assert_eq!(b.len(), 1);
        assert!(!b[0].convex);
        assert!((b[0].area - 45000.0).abs() < 1e-6);
    }

    #[test]
    fn bowed_edges_enclose_a_lens() {
        let d = straight(2, vec![(0, 1)], &[(100.0, 100.0), (500.0, 100.0)]);
        // single edge: no face
        assert_eq!(compute_faces(&d).len(), 1);
        let g = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = Drawing::straight(g, vec![Point::new(100.0, 500.0), Point::new(500.0, 500.0), Point::new(900.0, 500.0)])
            .with_curvatures(vec![0.0, 0.0, 0.25]);
        let faces = compute_faces(&d);
        let b = bounded(&faces);
        assert_eq!(b.len(), 1);
        // parabolic segment: 2/3 * chord * apex height; chord 800, apex 100
        let expected = 2.0 / 3.0 * 800.0 * 100.0;
        // inscribed polygon of a parabolic arc in n pieces loses area/n^2 (n = 20 here)
        assert!((b[0].area - expected).abs() / expected < 5e-3, "{}", b[0].area);
    }
}
