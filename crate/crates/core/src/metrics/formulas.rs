//! Raw-value definitions and raw→score mappings for every catalog metric.

use std::f64::consts::PI;

use crate::model::{Drawing, MetricId, MetricResult, Point, DEFAULT_CANVAS};

use super::context::{bfs_distances, MetricContext};
use super::stats::{coefficient_of_variation, mean, spearman, std_dev};

/// An edge counts as bent above this |curvature|.
pub const BEND_THRESHOLD: f64 = 0.05;
/// Mirror axes tried by global symmetry.
pub const SYMMETRY_AXES: usize = 16;
/// Angular match tolerance for local symmetry, degrees.
pub const LOCAL_SYMMETRY_TOLERANCE_DEG: f64 = 10.0;
/// Virtual grid divisions per canvas width for node orthogonality.
pub const NODE_GRID_DIVISIONS: f64 = 16.0;

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn result(id: MetricId, raw: Option<f64>, score: impl FnOnce(f64) -> f64) -> MetricResult {
    match raw {
        Some(r) if r.is_finite() => {
            let s = score(r);
            if s.is_finite() {
                MetricResult::defined(id, r, clamp01(s))
            } else {
                MetricResult::undefined(id)
            }
        }
        _ => MetricResult::undefined(id),
    }
}

pub(crate) fn compute(ctx: &MetricContext<'_>, id: MetricId) -> MetricResult {
    use MetricId as M;
    let d = ctx.drawing;
    let m = d.graph.edge_count();
    let n = d.graph.node_count();
    match id {
        M::AngularResolution => {
            let mut min_angle = f64::INFINITY;
            let mut ideal = f64::INFINITY;
            let mut any = false;
            for list in ctx.angles().iter().flatten() {
                any = true;
                ideal = ideal.min(360.0 / list.len() as f64);
                min_angle = list.iter().copied().fold(min_angle, f64::min);
            }
            result(id, any.then_some(min_angle), |r| r / ideal)
        }
        M::AngularResolutionSd => {
            let all: Vec<f64> = ctx.angles().iter().flatten().flatten().copied().collect();
            result(id, std_dev(&all), |r| 1.0 / (1.0 + r / 36.0))
        }
        M::Area => {
            let raw = ctx.ink_bounds().map(|(lo, hi)| (hi.x - lo.x) * (hi.y - lo.y));
            result(id, raw, |r| 1.0 - r / d.canvas.area())
        }
        M::AspectRatio => {
            let raw = ctx.ink_bounds().map(|(lo, hi)| (hi.x - lo.x) / (hi.y - lo.y));
            result(id, raw, |r| r.min(1.0 / r))
        }
        M::ClusterSimilarNodes => result(id, cluster_correlation(ctx), |r| (r + 1.0) / 2.0),
        M::ConvexFaces => {
            let faces = ctx.bounded_faces();
            let raw = (!faces.is_empty())
                .then(|| faces.iter().filter(|f| f.convex).count() as f64 / faces.len() as f64);
            result(id, raw, |r| r)
        }
        M::ConsistentFlowDirection => {
            let raw = (m > 0).then(|| {
                let (mut c, mut s) = (0.0, 0.0);
                for e in 0..m {
                    let (a, b) = d.graph.edges[e];
                    let theta = (d.positions[b] - d.positions[a]).angle();
                    c += (2.0 * theta).cos();
                    s += (2.0 * theta).sin();
                }
                c.hypot(s) / m as f64
            });
            result(id, raw, |r| r)
        }
        M::CrossingAngle => {
            let angles: Vec<f64> = ctx.crossings().iter().map(|c| c.angle).collect();
            result(id, mean(&angles), |r| r / 90.0)
        }
        M::DifferenceBetweenAngles => {
            let min = ctx.crossings().iter().map(|c| c.angle).fold(f64::INFINITY, f64::min);
            let raw = (!ctx.crossings().is_empty()).then_some(90.0 - min);
            result(id, raw, |r| 1.0 - r / 90.0)
        }
        M::CrossingAngleSd => {
            let angles: Vec<f64> = ctx.crossings().iter().map(|c| c.angle).collect();
            let raw = if angles.len() >= 2 { std_dev(&angles) } else { None };
            result(id, raw, |r| 1.0 / (1.0 + r / 30.0))
        }
        M::DegreeOfEdgeBends => {
            let abs: Vec<f64> = d.curvatures.iter().map(|c| c.abs()).collect();
            result(id, mean(&abs), |r| 1.0 - r)
        }
        M::MaximumBends => {
            let raw = (m > 0).then(|| d.curvatures.iter().map(|c| c.abs()).fold(0.0, f64::max));
            result(id, raw, |r| 1.0 - r)
        }
        M::NumberOfBends => {
            let raw = (m > 0)
                .then(|| d.curvatures.iter().filter(|c| c.abs() > BEND_THRESHOLD).count() as f64);
            result(id, raw, |r| 1.0 - r / m as f64)
        }
        M::UniformEdgeBends => {
            let abs: Vec<f64> = d.curvatures.iter().map(|c| c.abs()).collect();
            result(id, std_dev(&abs), |r| 1.0 / (1.0 + 10.0 * r))
        }
        M::DistributeNodesEvenly => result(id, grid_entropy(d), |r| r),
        M::EdgeOrthogonality => {
            let devs: Vec<f64> = (0..m)
                .map(|e| {
                    let (a, b) = d.graph.edges[e];
                    let deg = (d.positions[b] - d.positions[a]).angle().to_degrees().rem_euclid(90.0);
                    deg.min(90.0 - deg)
                })
                .collect();
            result(id, mean(&devs), |r| 1.0 - r / 45.0)
        }
        M::GlobalSymmetry => result(id, global_symmetry(d), |r| r),
        M::KeepNodesApartFromEdges => result(id, node_edge_clearance(ctx), |r| r / (4.0 * d.node_radius)),
        M::LocalSymmetry => {
            let per_node: Vec<f64> = ctx
                .angles()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.is_some())
                .map(|(v, _)| local_symmetry_at(d, v))
                .collect();
            result(id, mean(&per_node), |r| r)
        }
        M::MaximumEdgeLength => {
            let raw = (m > 0).then(|| ctx.lengths().iter().copied().fold(0.0, f64::max));
            result(id, raw, |r| 1.0 / (1.0 + r / d.canvas.diagonal()))
        }
        M::TotalEdgeLength => {
            let raw = (m > 0).then(|| ctx.lengths().iter().sum::<f64>());
            result(id, raw, |r| 1.0 / (1.0 + r / (m as f64 * d.canvas.diagonal() / 4.0)))
        }
        M::UniformEdgeLengths => {
            result(id, coefficient_of_variation(ctx.lengths()), |r| 1.0 / (1.0 + r))
        }
        M::NodeOrthogonality => {
            let pitch = d.canvas.width / NODE_GRID_DIVISIONS;
            let raw = (n > 0).then(|| {
                let on_grid = d
                    .positions
                    .iter()
                    .filter(|p| {
                        let snapped = Point::new((p.x / pitch).round() * pitch, (p.y / pitch).round() * pitch);
                        p.distance(snapped) <= d.node_radius
                    })
                    .count();
                on_grid as f64 / n as f64
            });
            result(id, raw, |r| r)
        }
        M::NodesShouldNotOverlap => {
            let raw = (n >= 2).then(|| {
                let mut count = 0usize;
                for i in 0..n {
                    for j in i + 1..n {
                        if d.positions[i].distance(d.positions[j]) < 2.0 * d.node_radius {
                            count += 1;
                        }
                    }
                }
                count as f64
            });
            let pairs = (n * n.saturating_sub(1) / 2) as f64;
            result(id, raw, |r| 1.0 - r / pairs)
        }
        M::NumberOfBranches => {
            let degrees = d.graph.degrees();
            let values: Vec<f64> = ctx
                .sampled_paths()
                .iter()
                .map(|p| {
                    let interior = &p.nodes[1..p.nodes.len() - 1];
                    interior.iter().map(|&v| degrees[v].saturating_sub(2) as f64).sum()
                })
                .collect();
            result(id, mean(&values), |r| 1.0 / (1.0 + r))
        }
        M::NumberOfEdgeCrossings => {
            let raw = ctx.crossings().len() as f64;
            let mut c_max = 0usize;
            for e in 0..m {
                for f in e + 1..m {
                    if !d.graph.shares_endpoint(e, f) {
                        c_max += 1;
                    }
                }
            }
            result(id, Some(raw), |r| {
                if c_max == 0 {
                    if r == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    1.0 - r / c_max as f64
                }
            })
        }
        M::PathBendiness => {
            // Lengths are expressed in default-canvas units so the score is
            // unchanged when the whole drawing and canvas are scaled together.
            let unit = d.canvas.diagonal() / (DEFAULT_CANVAS * std::f64::consts::SQRT_2);
            let values: Vec<f64> = ctx
                .sampled_paths()
                .iter()
                .filter_map(|p| {
                    let pts = ctx.path_geometry(&p.nodes);
                    let len = crate::geometry::polyline_length(&pts) / unit;
                    (len > 0.0).then(|| path_turning(d, &p.nodes) / len)
                })
                .collect();
            result(id, mean(&values), |r| 1.0 / (1.0 + 100.0 * r))
        }
        M::ShortestPathLength => {
            let values: Vec<f64> = ctx
                .sampled_paths()
                .iter()
                .filter_map(|p| {
                    let direct = d.positions[p.source].distance(d.positions[p.target]);
                    let drawn = crate::geometry::polyline_length(&ctx.path_geometry(&p.nodes));
                    (direct > 1e-9).then(|| drawn / direct)
                })
                .collect();
            result(id, mean(&values), |r| 1.0 / r)
        }
        M::WhitespaceToInkRatio => {
            let ink = d.stroke_width * ctx.lengths().iter().sum::<f64>()
                + n as f64 * PI * d.node_radius * d.node_radius;
            result(id, Some(1.0 - ink / d.canvas.area()), |r| r)
        }
        M::FaceArea => {
            let areas: Vec<f64> = ctx.bounded_faces().iter().map(|f| f.area).collect();
            let raw = mean(&areas).map(|a| a / d.canvas.area());
            result(id, raw, |r| 4.0 * r * (1.0 - r))
        }
        M::UniformFaces => {
            let areas: Vec<f64> = ctx.bounded_faces().iter().map(|f| f.area).collect();
            let raw = if areas.len() >= 2 { coefficient_of_variation(&areas) } else { None };
            result(id, raw, |r| 1.0 / (1.0 + r))
        }
    }
}

fn turn(u: Point, v: Point) -> f64 {
    u.cross(v).atan2(u.dot(v)).abs()
}

/// Total absolute turning (radians) along a drawn node path, from exact
/// curve tangents. A quadratic Bézier has no inflection, so its own turning
/// is the angle between its end tangents.
pub(crate) fn path_turning(d: &Drawing, nodes: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut incoming: Option<Point> = None;
    for w in nodes.windows(2) {
        let e = d.graph.edge_between(w[0], w[1]).expect("path follows graph edges");
        let (p0, p1, p2) = d.edge_control_points(e);
        let (start, end) = if d.graph.edges[e].0 == w[0] {
            (p1 - p0, p2 - p1)
        } else {
            (p1 - p2, p0 - p1)
        };
        if let Some(prev) = incoming {
            total += turn(prev, start);
        }
        total += turn(start, end);
        incoming = Some(end);
    }
    total
}

fn cluster_correlation(ctx: &MetricContext<'_>) -> Option<f64> {
    let d = ctx.drawing;
    let adj = d.graph.adjacency();
    let n = d.graph.node_count();
    let mut hops = Vec::new();
    let mut dist = Vec::new();
    for s in 0..n {
        let bfs = bfs_distances(&adj, s);
        for (t, hop) in bfs.iter().enumerate().skip(s + 1) {
            if let Some(h) = *hop {
                hops.push(h as f64);
                dist.push(d.positions[s].distance(d.positions[t]));
            }
        }
    }
    spearman(&hops, &dist)
}

/// Entropy of node counts over a ⌈√n⌉×⌈√n⌉ canvas grid, divided by the
/// largest entropy `n` nodes can reach on that grid.
fn grid_entropy(d: &Drawing) -> Option<f64> {
    let n = d.graph.node_count();
    if n < 2 {
        return None;
    }
    let k = (n as f64).sqrt().ceil() as usize;
    let mut counts = vec![0usize; k * k];
    for p in &d.positions {
        let cx = ((p.x / d.canvas.width * k as f64) as usize).min(k - 1);
        let cy = ((p.y / d.canvas.height * k as f64) as usize).min(k - 1);
        counts[cy * k + cx] += 1;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum();
    Some(h / (n.min(k * k) as f64).ln())
}

fn reflect(p: Point, center: Point, axis: Point) -> Point {
    let v = p - center;
    center + axis * (2.0 * v.dot(axis)) - v
}

/// Greedy nearest bijective matching of `sources` onto `targets` within
/// `tolerance`; returns the number of matched pairs.
fn greedy_match(sources: &[Point], targets: &[Point], tolerance: f64) -> usize {
    let mut cand = Vec::new();
    for (i, s) in sources.iter().enumerate() {
        for (j, t) in targets.iter().enumerate() {
            let dist = s.distance(*t);
            if dist <= tolerance {
                cand.push((dist, i, j));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_s = vec![false; sources.len()];
    let mut used_t = vec![false; targets.len()];
    let mut matched = 0;
    for (_, i, j) in cand {
        if !used_s[i] && !used_t[j] {
            used_s[i] = true;
            used_t[j] = true;
            matched += 1;
        }
    }
    matched
}

fn global_symmetry(d: &Drawing) -> Option<f64> {
    let n = d.positions.len();
    if n == 0 {
        return None;
    }
    let center = d.positions.iter().fold(Point::default(), |acc, &p| acc + p) * (1.0 / n as f64);
    let tolerance = 2.0 * d.node_radius;
    let best = (0..SYMMETRY_AXES)
        .map(|k| {
            let phi = k as f64 * PI / SYMMETRY_AXES as f64;
            let axis = Point::new(phi.cos(), phi.sin());
            let mirrored: Vec<Point> = d.positions.iter().map(|&p| reflect(p, center, axis)).collect();
            greedy_match(&mirrored, &d.positions, tolerance)
        })
        .max()
        .unwrap_or(0);
    Some(best as f64 / n as f64)
}

fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(360.0);
    x.min(360.0 - x)
}

/// Best fraction of incident-edge directions at `node` that a mirror axis
/// through the node maps onto other incident directions.
pub(crate) fn local_symmetry_at(d: &Drawing, node: usize) -> f64 {
    let dirs: Vec<f64> = d
        .graph
        .incidence()
        .swap_remove(node)
        .into_iter()
        .map(|e| crate::geometry::tangent_at(d, e, node).angle().to_degrees())
        .collect();
    let k = dirs.len();
    let mut best = 0usize;
    for i in 0..k {
        for j in i..k {
            let bisector = (dirs[i] + dirs[j]) / 2.0;
            for axis in [bisector, bisector + 90.0] {
                let mut cand = Vec::new();
                for (a, &theta) in dirs.iter().enumerate() {
                    let image = 2.0 * axis - theta;
                    for (b, &other) in dirs.iter().enumerate() {
                        let diff = circular_diff_deg(image, other);
                        if diff <= LOCAL_SYMMETRY_TOLERANCE_DEG {
                            cand.push((diff, a, b));
                        }
                    }
                }
                cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
                let mut used_a = vec![false; k];
                let mut used_b = vec![false; k];
                let mut matched = 0;
                for (_, a, b) in cand {
                    if !used_a[a] && !used_b[b] {
                        used_a[a] = true;
                        used_b[b] = true;
                        matched += 1;
                    }
                }
                best = best.max(matched);
            }
        }
    }
    best as f64 / k as f64
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn node_edge_clearance(ctx: &MetricContext<'_>) -> Option<f64> {
    let d = ctx.drawing;
    let paths = ctx.paths();
    let mut best: Option<f64> = None;
    for (v, &p) in d.positions.iter().enumerate() {
        for (e, &(a, b)) in d.graph.edges.iter().enumerate() {
            if a == v || b == v {
                continue;
            }
            let path = &paths[e];
            let dist = if path.len() < 2 {
                p.distance(path[0])
            } else {
                path.windows(2)
                    .map(|w| point_segment_distance(p, w[0], w[1]))
                    .fold(f64::INFINITY, f64::min)
            };
            best = Some(best.map_or(dist, |x: f64| x.min(dist)));
        }
    }
    best
}

pub(crate) fn explanation(id: MetricId) -> &'static str {
    use MetricId as M;
    match id {
        M::AngularResolution => "raw = minimum angle (degrees) between circularly adjacent incident-edge tangents over all nodes of degree >= 2; score = raw / ideal where ideal = min over those nodes of 360/degree. Undefined without a node of degree >= 2.",
        M::AngularResolutionSd => "raw = population standard deviation (degrees) of all incident angles at nodes of degree >= 2; score = 1 / (1 + raw/36). Undefined without a node of degree >= 2.",
        M::Area => "raw = area of the bounding box of all ink (node discs and stroked, flattened edges); score = 1 - raw / canvas area, clamped to [0,1].",
        M::AspectRatio => "raw = width / height of the ink bounding box; score = min(raw, 1/raw).",
        M::ClusterSimilarNodes => "raw = Spearman rank correlation between hop distance and Euclidean distance over all connected node pairs; score = (raw + 1) / 2. Undefined when either distance list is constant.",
        M::ConvexFaces => "raw = fraction of bounded faces of the edge arrangement that are convex (reflex tolerance 1 degree, faces with holes are not convex); score = raw. Undefined without a bounded face.",
        M::ConsistentFlowDirection => "raw = axial mean resultant length of edge chord directions (angles doubled, edges are undirected); score = raw. Undefined without edges.",
        M::CrossingAngle => "raw = mean acute crossing angle (degrees) over all crossings of non-adjacent edges; score = raw / 90. Undefined without crossings.",
        M::DifferenceBetweenAngles => "raw = 90 - smallest crossing angle (degrees); score = 1 - raw/90. Undefined without crossings.",
        M::DegreeOfEdgeBends => "raw = mean |curvature| over edges; score = 1 - raw. Undefined without edges.",
        M::DistributeNodesEvenly => "raw = Shannon entropy of node counts over a ceil(sqrt n) x ceil(sqrt n) grid of canvas cells, divided by ln(min(n, cells)); score = raw. Undefined for fewer than 2 nodes.",
        M::EdgeOrthogonality => "raw = mean over edges of the chord's angular deviation from the nearest axis (0-45 degrees); score = 1 - raw/45. Undefined without edges.",
        M::GlobalSymmetry => "raw = max over 16 mirror axes through the node centroid (angles k*180/16) of the fraction of nodes whose mirror image is matched, greedy nearest and one-to-one, to a node within 2*node_radius; score = raw.",
        M::KeepNodesApartFromEdges => "raw = minimum distance from a node centre to any non-incident flattened edge; score = clamp(raw / (4*node_radius), 0, 1). Undefined without a node/non-incident edge pair.",
        M::LocalSymmetry => "raw = mean over nodes of degree >= 2 of the best fraction of incident tangent directions mirrored onto another incident direction (within 10 degrees) by an axis through the node; score = raw.",
        M::MaximumBends => "raw = maximum |curvature| over edges (an edge with |curvature| > 0.05 is a bend); score = 1 - raw. Undefined without edges.",
        M::MaximumEdgeLength => "raw = longest flattened edge length; score = 1 / (1 + raw / canvas diagonal). Undefined without edges.",
        M::NodeOrthogonality => "raw = fraction of nodes within node_radius of the nearest point of a grid with pitch canvas width/16 anchored at the canvas origin; score = raw.",
        M::NodesShouldNotOverlap => "raw = number of node pairs whose centres are closer than 2*node_radius; score = 1 - raw / C(n,2). Undefined for fewer than 2 nodes.",
        M::NumberOfBends => "raw = number of edges with |curvature| > 0.05; score = 1 - raw/m. Undefined without edges.",
        M::NumberOfBranches => "raw = mean over sampled connected node pairs (all pairs when n <= 12, else 200 fixed-seed pairs) of the summed degree surplus max(deg - 2, 0) of interior nodes on the graph-shortest path; score = 1 / (1 + raw).",
        M::NumberOfEdgeCrossings => "raw = number of transversal intersection points between non-adjacent edges; score = 1 - raw / c_max, c_max = number of non-adjacent edge pairs, clamped to [0,1].",
        M::PathBendiness => "raw = mean over sampled node pairs of the cumulative turning angle (radians) along the drawn graph-shortest path divided by its drawn length in default-canvas units (canvas diagonal rescaled to 1000*sqrt 2); score = 1 / (1 + 100*raw).",
        M::ShortestPathLength => "raw = mean over sampled node pairs of drawn length of the graph-shortest path divided by the straight-line distance between its ends; score = 1/raw clamped to [0,1].",
        M::CrossingAngleSd => "raw = population standard deviation of crossing angles (degrees); score = 1 / (1 + raw/30). Undefined with fewer than 2 crossings.",
        M::TotalEdgeLength => "raw = sum of flattened edge lengths; score = 1 / (1 + raw / (m * canvas diagonal / 4)). Undefined without edges.",
        M::UniformEdgeBends => "raw = population standard deviation of |curvature| over edges; score = 1 / (1 + 10*raw). Undefined without edges.",
        M::UniformEdgeLengths => "raw = coefficient of variation of flattened edge lengths; score = 1 / (1 + raw). Undefined without edges.",
        M::WhitespaceToInkRatio => "ink = stroke_width * total edge length + n * pi * node_radius^2 (overlap ignored); raw = 1 - ink / canvas area; score = raw clamped to [0,1].",
        M::FaceArea => "raw = mean bounded face area / canvas area; score = 4*raw*(1 - raw), peaking at medium faces. Undefined without a bounded face.",
        M::UniformFaces => "raw = coefficient of variation of bounded face areas; score = 1 / (1 + raw). Undefined with fewer than 2 bounded faces.",
    }
}
