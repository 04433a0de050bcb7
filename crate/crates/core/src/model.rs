//! Domain types shared by every module: graphs, drawings, metric
//! identifiers and the built-in aesthetic catalog.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ModelError;

pub const DEFAULT_CANVAS: f64 = 1000.0;
pub const DEFAULT_NODE_RADIUS: f64 = 8.0;
pub const DEFAULT_STROKE_WIDTH: f64 = 2.0;

/// A 2-D point in canvas units. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).length()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    pub fn midpoint(self, other: Point) -> Point {
        self.lerp(other, 0.5)
    }

    /// Direction angle in radians, `atan2(y, x)`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Undirected simple graph over dense node ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph on `n` nodes, rejecting self-loops, duplicates and
    /// dangling endpoints.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, ModelError> {
        let graph = Graph {
            nodes: (0..n).collect(),
            edges,
        };
        match graph.violations().into_iter().next() {
            Some(v) => Err(ModelError::InvalidGraph(v)),
            None => Ok(graph),
        }
    }

    /// Checks a graph built by deserialization or by hand.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self.violations().into_iter().next() {
            Some(v) => Err(ModelError::InvalidGraph(v)),
            None => Ok(()),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == node || b == node)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(a, b) in &self.edges {
            if a < deg.len() {
                deg[a] += 1;
            }
            if b < deg.len() {
                deg[b] += 1;
            }
        }
        deg
    }

    /// Adjacency lists; neighbours sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Edge indices incident to each node.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            inc[a].push(i);
            inc[b].push(i);
        }
        inc
    }

    pub fn shares_endpoint(&self, e: usize, f: usize) -> bool {
        let (a, b) = self.edges[e];
        let (c, d) = self.edges[f];
        a == c || a == d || b == c || b == d
    }

    /// Index of the edge joining `a` and `b`, in either orientation.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|&(u, v)| (u == a && v == b) || (u == b && v == a))
    }

    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &id) in self.nodes.iter().enumerate() {
            if id != i {
                out.push(format!("nodes[{i}]: id {id} is not dense (expected {i})"));
            }
        }
        let n = self.nodes.len();
        let mut seen = HashSet::new();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if a >= n || b >= n {
                out.push(format!("edges[{i}]: endpoint out of range ({a}, {b}) for {n} nodes"));
                continue;
            }
            if a == b {
                out.push(format!("edges[{i}]: self-loop on node {a}"));
                continue;
            }
            if !seen.insert((a.min(b), a.max(b))) {
                out.push(format!("edges[{i}]: duplicate edge ({a}, {b})"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Canvas {
    pub const fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas::new(DEFAULT_CANVAS, DEFAULT_CANVAS)
    }
}

/// A graph with a geometric embedding. Each edge is drawn as a quadratic
/// Bézier whose control point sits on the perpendicular bisector of the
/// chord, offset by `curvature × chord length` (positive = left of the
/// direction from the first to the second endpoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drawing {
    pub graph: Graph,
    pub positions: Vec<Point>,
    pub curvatures: Vec<f64>,
    pub canvas: Canvas,
    pub node_radius: f64,
    pub stroke_width: f64,
}

impl Drawing {
    /// Straight-line drawing on the default canvas.
    pub fn straight(graph: Graph, positions: Vec<Point>) -> Self {
        let m = graph.edge_count();
        Drawing {
            graph,
            positions,
            curvatures: vec![0.0; m],
            canvas: Canvas::default(),
            node_radius: DEFAULT_NODE_RADIUS,
            stroke_width: DEFAULT_STROKE_WIDTH,
        }
    }

    pub fn with_canvas(mut self, canvas: Canvas) -> Self {
        self.canvas = canvas;
        self
    }

    pub fn with_curvatures(mut self, curvatures: Vec<f64>) -> Self {
        self.curvatures = curvatures;
        self
    }

    /// Endpoints and Bézier control point of an edge.
    pub fn edge_control_points(&self, edge: usize) -> (Point, Point, Point) {
        let (a, b) = self.graph.edges[edge];
        let p0 = self.positions[a];
        let p2 = self.positions[b];
        let chord = p2 - p0;
        let normal = Point::new(-chord.y, chord.x);
        let control = p0.midpoint(p2) + normal * self.curvatures[edge];
        (p0, control, p2)
    }

    /// Stable content hash (hex SHA-256 of the canonical JSON form).
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("drawing serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Applies `f` to every position and the canvas/radii scale factor `scale`.
    pub fn transformed(&self, f: impl Fn(Point) -> Point, canvas: Canvas, scale: f64) -> Drawing {
        Drawing {
            graph: self.graph.clone(),
            positions: self.positions.iter().map(|&p| f(p)).collect(),
            curvatures: self.curvatures.clone(),
            canvas,
            node_radius: self.node_radius * scale,
            stroke_width: self.stroke_width * scale,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("drawing serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))
    }
}

/// Lists every violated drawing invariant. Empty means the drawing is valid.
pub fn validate_drawing(d: &Drawing) -> Vec<String> {
    let mut out = d.graph.violations();
    let n = d.graph.node_count();
    if d.positions.len() != n {
        out.push(format!(
            "positions: expected {n} entries, found {}",
            d.positions.len()
        ));
    }
    if d.curvatures.len() != d.graph.edge_count() {
        out.push(format!(
            "curvatures: expected {} entries, found {}",
            d.graph.edge_count(),
            d.curvatures.len()
        ));
    }
    if !(d.canvas.width.is_finite() && d.canvas.width > 0.0)
        || !(d.canvas.height.is_finite() && d.canvas.height > 0.0)
    {
        out.push(format!(
            "canvas: dimensions must be positive, found {} x {}",
            d.canvas.width, d.canvas.height
        ));
    }
    for (i, &p) in d.positions.iter().enumerate() {
        if !p.is_finite() || !d.canvas.contains(p) {
            out.push(format!(
                "positions[{i}]: node {i} at ({}, {}) lies outside the {} x {} canvas",
                p.x, p.y, d.canvas.width, d.canvas.height
            ));
        }
    }
    for (i, &c) in d.curvatures.iter().enumerate() {
        if !c.is_finite() || c.abs() > 1.0 {
            out.push(format!("curvatures[{i}]: edge {i} has |curvature| {c} > 1"));
        }
    }
    if !(d.node_radius.is_finite() && d.node_radius > 0.0) {
        out.push(format!("node_radius: must be > 0, found {}", d.node_radius));
    }
    if !(d.stroke_width.is_finite() && d.stroke_width > 0.0) {
        out.push(format!("stroke_width: must be > 0, found {}", d.stroke_width));
    }
    out
}

macro_rules! metric_ids {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Identifier of one catalog aesthetic.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum MetricId {
            $($variant),*
        }

        impl MetricId {
            /// All identifiers in catalog order.
            pub const ALL: [MetricId; 31] = [$(MetricId::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(MetricId::$variant => $name),*
                }
            }
        }

        impl FromStr for MetricId {
            type Err = ModelError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(MetricId::$variant),)*
                    other => Err(ModelError::UnknownMetric(other.to_string())),
                }
            }
        }
    };
}

metric_ids! {
    AngularResolution => "angular_resolution",
    Area => "area",
    AspectRatio => "aspect_ratio",
    ClusterSimilarNodes => "cluster_similar_nodes",
    ConvexFaces => "convex_faces",
    ConsistentFlowDirection => "consistent_flow_direction",
    CrossingAngle => "crossing_angle",
    DegreeOfEdgeBends => "degree_of_edge_bends",
    DifferenceBetweenAngles => "difference_between_angles",
    DistributeNodesEvenly => "distribute_nodes_evenly",
    EdgeOrthogonality => "edge_orthogonality",
    GlobalSymmetry => "global_symmetry",
    KeepNodesApartFromEdges => "keep_nodes_apart_from_edges",
    LocalSymmetry => "local_symmetry",
    MaximumBends => "maximum_bends",
    MaximumEdgeLength => "maximum_edge_length",
    NodeOrthogonality => "node_orthogonality",
    NodesShouldNotOverlap => "nodes_should_not_overlap",
    NumberOfBends => "number_of_bends",
    NumberOfBranches => "number_of_branches",
    NumberOfEdgeCrossings => "number_of_edge_crossings",
    PathBendiness => "path_bendiness",
    ShortestPathLength => "shortest_path_length",
    CrossingAngleSd => "crossing_angle_sd",
    AngularResolutionSd => "angular_resolution_sd",
    TotalEdgeLength => "total_edge_length",
    UniformEdgeBends => "uniform_edge_bends",
    UniformEdgeLengths => "uniform_edge_lengths",
    WhitespaceToInkRatio => "whitespace_to_ink_ratio",
    FaceArea => "face_area",
    UniformFaces => "uniform_faces",
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogCategory {
    VisualMapping,
    Composition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AestheticCatalogEntry {
    pub id: MetricId,
    pub display_name: &'static str,
    pub category: CatalogCategory,
    /// Published empirical evidence of a significant readability effect.
    pub evaluated: bool,
    /// Elicited in the study without a literature counterpart.
    pub novel: bool,
}

const fn entry(
    id: MetricId,
    display_name: &'static str,
    category: CatalogCategory,
    evaluated: bool,
    novel: bool,
) -> AestheticCatalogEntry {
    AestheticCatalogEntry {
        id,
        display_name,
        category,
        evaluated,
        novel,
    }
}

use CatalogCategory::{Composition as C, VisualMapping as V};
use MetricId as M;

static CATALOG: [AestheticCatalogEntry; 31] = [
    entry(M::AngularResolution, "Angular resolution", C, true, false),
    entry(M::Area, "Area", C, true, false),
    entry(M::AspectRatio, "Aspect ratio", C, false, false),
    entry(M::ClusterSimilarNodes, "Cluster similar nodes", C, true, false),
    entry(M::ConvexFaces, "Convex faces", C, false, false),
    entry(M::ConsistentFlowDirection, "Consistent flow direction", C, false, false),
    entry(M::CrossingAngle, "Crossing angle", C, true, false),
    entry(M::DegreeOfEdgeBends, "Degree of edge bends", V, true, false),
    entry(M::DifferenceBetweenAngles, "Difference between angles", C, false, false),
    entry(M::DistributeNodesEvenly, "Distribute nodes evenly", C, false, false),
    entry(M::EdgeOrthogonality, "Edge orthogonality", V, true, false),
    entry(M::GlobalSymmetry, "Global symmetry", C, true, false),
    entry(M::KeepNodesApartFromEdges, "Keep nodes apart from edges", C, false, false),
    entry(M::LocalSymmetry, "Local symmetry", C, true, false),
    entry(M::MaximumBends, "Maximum bends", C, false, false),
    entry(M::MaximumEdgeLength, "Maximum edge length", C, false, false),
    entry(M::NodeOrthogonality, "Node orthogonality", C, false, false),
    entry(M::NodesShouldNotOverlap, "Nodes should not overlap", C, false, false),
    entry(M::NumberOfBends, "Number of bends", C, false, false),
    entry(M::NumberOfBranches, "Number of branches", C, true, false),
    entry(M::NumberOfEdgeCrossings, "Number of edge crossings", C, true, false),
    entry(M::PathBendiness, "Path bendiness", C, true, false),
    entry(M::ShortestPathLength, "Shortest path length", C, true, false),
    entry(M::CrossingAngleSd, "SD of crossing angles", C, false, false),
    entry(M::AngularResolutionSd, "SD of angular resolution", C, false, false),
    entry(M::TotalEdgeLength, "Total edge length", C, false, false),
    entry(M::UniformEdgeBends, "Uniform edge bends", V, false, false),
    entry(M::UniformEdgeLengths, "Uniform edge lengths", V, false, false),
    entry(M::WhitespaceToInkRatio, "Whitespace to ink ratio", C, true, false),
    entry(M::FaceArea, "Face area", C, false, true),
    entry(M::UniformFaces, "Uniform faces", C, false, true),
];

/// The full aesthetic catalog, in a fixed order.
pub fn catalog() -> &'static [AestheticCatalogEntry] {
    &CATALOG
}

pub fn catalog_entry(id: MetricId) -> &'static AestheticCatalogEntry {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .expect("every MetricId has a catalog entry")
}

/// Outcome of one metric on one drawing. `score` is in `[0, 1]`, with 1 the
/// preferred pole. Undefined results carry `raw = score = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub id: MetricId,
    pub raw: f64,
    pub score: f64,
    pub defined: bool,
}

impl MetricResult {
    pub fn defined(id: MetricId, raw: f64, score: f64) -> Self {
        debug_assert!(raw.is_finite(), "{id}: raw {raw}");
        debug_assert!((0.0..=1.0).contains(&score), "{id}: score {score}");
        MetricResult {
            id,
            raw,
            score,
            defined: true,
        }
    }

    pub fn undefined(id: MetricId) -> Self {
        MetricResult {
            id,
            raw: 0.0,
            score: 0.0,
            defined: false,
        }
    }
}
