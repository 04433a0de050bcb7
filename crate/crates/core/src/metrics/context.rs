use std::cell::OnceCell;
use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{self, Crossing, Face};
use crate::model::{Drawing, Point};

use super::{ALL_PAIRS_MAX_NODES, PAIR_SAMPLE_COUNT, PAIR_SAMPLE_SEED};

/// A node pair together with its graph-shortest path (node sequence).
#[derive(Debug, Clone)]
pub struct SampledPath {
    pub source: usize,
    pub target: usize,
    pub nodes: Vec<usize>,
}

/// Intermediate geometry shared by all metrics of one drawing, each piece
/// computed at most once and only when some metric asks for it.
pub struct MetricContext<'a> {
    pub drawing: &'a Drawing,
    paths: OnceCell<Vec<Vec<Point>>>,
    lengths: OnceCell<Vec<f64>>,
    crossings: OnceCell<Vec<Crossing>>,
    bounded_faces: OnceCell<Vec<Face>>,
    angles: OnceCell<Vec<Option<Vec<f64>>>>,
    sampled: OnceCell<Vec<SampledPath>>,
    ink_bounds: OnceCell<Option<(Point, Point)>>,
}

impl<'a> MetricContext<'a> {
    pub fn new(drawing: &'a Drawing) -> Self {
        MetricContext {
            drawing,
            paths: OnceCell::new(),
            lengths: OnceCell::new(),
            crossings: OnceCell::new(),
            bounded_faces: OnceCell::new(),
            angles: OnceCell::new(),
            sampled: OnceCell::new(),
            ink_bounds: OnceCell::new(),
        }
    }

    pub fn paths(&self) -> &[Vec<Point>] {
        self.paths.get_or_init(|| geometry::edge_paths(self.drawing))
    }

    pub fn lengths(&self) -> &[f64] {
        self.lengths
            .get_or_init(|| self.paths().iter().map(|p| geometry::polyline_length(p)).collect())
    }

    pub fn crossings(&self) -> &[Crossing] {
        self.crossings
            .get_or_init(|| geometry::find_crossings_in_paths(self.drawing, self.paths()))
    }

    pub fn bounded_faces(&self) -> &[Face] {
        self.bounded_faces.get_or_init(|| {
            geometry::compute_faces_from_paths(self.paths())
                .into_iter()
                .filter(|f| f.bounded)
                .collect()
        })
    }

    /// Incident angles per node; `None` for nodes of degree < 2.
    pub fn angles(&self) -> &[Option<Vec<f64>>] {
        self.angles.get_or_init(|| {
            (0..self.drawing.graph.node_count())
                .map(|v| geometry::incident_angles(self.drawing, v).ok())
                .collect()
        })
    }

    /// Bounding box of all ink: node discs and stroked edges.
    pub fn ink_bounds(&self) -> Option<(Point, Point)> {
        *self.ink_bounds.get_or_init(|| {
            let d = self.drawing;
            if d.positions.is_empty() {
                return None;
            }
            let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
            let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
            let mut grow = |p: Point, pad: f64| {
                lo.x = lo.x.min(p.x - pad);
                lo.y = lo.y.min(p.y - pad);
                hi.x = hi.x.max(p.x + pad);
                hi.y = hi.y.max(p.y + pad);
            };
            for &p in &d.positions {
                grow(p, d.node_radius);
            }
            for path in self.paths() {
                for &p in path {
                    grow(p, d.stroke_width / 2.0);
                }
            }
            Some((lo, hi))
        })
    }

    /// Node pairs used by the path metrics: every connected pair when the
    /// graph is small, otherwise a fixed-seed sample of pairs.
    pub fn sampled_paths(&self) -> &[SampledPath] {
        self.sampled.get_or_init(|| {
            let g = &self.drawing.graph;
            let n = g.node_count();
            let adj = g.adjacency();
            let mut candidates = Vec::new();
            if n <= ALL_PAIRS_MAX_NODES {
                for s in 0..n {
                    for t in s + 1..n {
                        candidates.push((s, t));
                    }
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SAMPLE_SEED);
                while candidates.len() < PAIR_SAMPLE_COUNT {
                    let s = rng.gen_range(0..n);
                    let t = rng.gen_range(0..n);
                    if s != t {
                        candidates.push((s.min(t), s.max(t)));
                    }
                }
            }
            let mut parents: Vec<Option<Vec<Option<usize>>>> = vec![None; n];
            candidates
                .into_iter()
                .filter_map(|(s, t)| {
                    let parent = parents[s].get_or_insert_with(|| bfs_parents(&adj, s));
                    let nodes = walk_back(parent, s, t)?;
                    Some(SampledPath {
                        source: s,
                        target: t,
                        nodes,
                    })
                })
                .collect()
        })
    }

    /// Drawn geometry of a node path, each edge oriented along the walk.
    pub fn path_geometry(&self, nodes: &[usize]) -> Vec<Point> {
        let g = &self.drawing.graph;
        let paths = self.paths();
        let mut out: Vec<Point> = Vec::new();
        for w in nodes.windows(2) {
            let e = g.edge_between(w[0], w[1]).expect("path follows graph edges");
            let forward = g.edges[e].0 == w[0];
            let pts: Box<dyn Iterator<Item = &Point>> = if forward {
                Box::new(paths[e].iter())
            } else {
                Box::new(paths[e].iter().rev())
            };
            for &p in pts {
                if out.last() != Some(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// BFS tree; neighbours are visited in ascending id order so ties between
/// shortest paths resolve toward smaller ids.
pub(crate) fn bfs_parents(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    parent
}

fn walk_back(parent: &[Option<usize>], source: usize, target: usize) -> Option<Vec<usize>> {
    let mut nodes = vec![target];
    let mut cur = target;
    while cur != source {
        cur = parent[cur]?;
        nodes.push(cur);
    }
    nodes.reverse();
    Some(nodes)
}

/// Hop distances from `source`; `None` for unreachable nodes.
pub(crate) fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}
