//! Seeded random study elements: G(n, m) graphs with uniformly random node
//! positions and edge curvatures. Overlapping nodes are allowed.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Canvas, Drawing, Graph, Point, DEFAULT_NODE_RADIUS, DEFAULT_STROKE_WIDTH};

/// Resampling rounds allowed before an element set gives up on its edge span.
pub const MAX_RESAMPLE_ROUNDS: usize = 1000;
pub const DEFAULT_ELEMENT_COUNT: usize = 12;

const GRAPH_STREAM: u64 = 0;
const LAYOUT_STREAM: u64 = 1;
const SET_STREAM: u64 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("infeasible generator parameters: {0}")]
    InvalidParams(String),
    #[error("element count must be at least 1")]
    EmptySet,
    #[error("no element set reached the required edge span after {0} rounds")]
    SpanNotReached(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub seed: u64,
    pub min_edges: usize,
    pub max_edges: usize,
    /// Inclusive `[min, max]` node count.
    pub node_count_range: (usize, usize),
    pub canvas: Canvas,
    pub max_curvature: f64,
    pub node_radius: f64,
    pub stroke_width: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 0,
            min_edges: 5,
            max_edges: 69,
            node_count_range: (4, 40),
            canvas: Canvas::default(),
            max_curvature: 0.8,
            node_radius: DEFAULT_NODE_RADIUS,
            stroke_width: DEFAULT_STROKE_WIDTH,
        }
    }
}

impl GeneratorParams {
    pub fn with_seed(seed: u64) -> Self {
        GeneratorParams {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |msg: String| Err(GeneratorError::InvalidParams(msg));
        let (lo, hi) = self.node_count_range;
        if self.min_edges < 1 {
            return bad("min_edges must be >= 1".into());
        }
        if self.max_edges < self.min_edges {
            return bad(format!("max_edges {} < min_edges {}", self.max_edges, self.min_edges));
        }
        if lo > hi {
            return bad(format!("node_count_range [{lo}, {hi}] is empty"));
        }
        if lo * lo.saturating_sub(1) / 2 < self.min_edges {
            return bad(format!(
                "{lo} nodes admit at most {} edges, below min_edges {}",
                lo * lo.saturating_sub(1) / 2,
                self.min_edges
            ));
        }
        if !(0.0..=1.0).contains(&self.max_curvature) {
            return bad(format!("max_curvature {} outside [0, 1]", self.max_curvature));
        }
        if !(self.canvas.width > 0.0 && self.canvas.height > 0.0) {
            return bad("canvas dimensions must be positive".into());
        }
        if !(self.node_radius > 0.0 && self.stroke_width > 0.0) {
            return bad("node_radius and stroke_width must be positive".into());
        }
        Ok(())
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unordered pair with lexicographic index `k` among all pairs of `0..n`.
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = n - a - 1;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
        a += 1;
    }
}

/// G(n, m): `n` uniform over the node range, `m` uniform over the edge
/// range the chosen `n` admits, then `m` distinct pairs without replacement.
pub fn generate_graph(p: &GeneratorParams) -> Result<Graph, GeneratorError> {
    p.validate()?;
    let mut rng = rng(p.seed, GRAPH_STREAM);
    let n = rng.gen_range(p.node_count_range.0..=p.node_count_range.1);
    let pairs = n * (n - 1) / 2;
    let m = rng.gen_range(p.min_edges..=p.max_edges.min(pairs));
    let mut picks = index::sample(&mut rng, pairs, m).into_vec();
    picks.sort_unstable();
    let edges = picks.into_iter().map(|k| pair_from_index(n, k)).collect();
    Ok(Graph {
        nodes: (0..n).collect(),
        edges,
    })
}

/// Uniform positions over the canvas and uniform curvatures in
/// `[-max_curvature, max_curvature]`, with no rejection of overlaps.
pub fn random_drawing(g: &Graph, p: &GeneratorParams) -> Drawing {
    let mut rng = rng(p.seed, LAYOUT_STREAM);
    let positions = (0..g.node_count())
        .map(|_| {
            Point::new(
                rng.gen_range(0.0..=p.canvas.width),
                rng.gen_range(0.0..=p.canvas.height),
            )
        })
        .collect();
    let curvatures = (0..g.edge_count())
        .map(|_| {
            if p.max_curvature == 0.0 {
                0.0
            } else {
                rng.gen_range(-p.max_curvature..=p.max_curvature)
            }
        })
        .collect();
    Drawing {
        graph: g.clone(),
        positions,
        curvatures,
        canvas: p.canvas,
        node_radius: p.node_radius,
        stroke_width: p.stroke_width,
    }
}

pub fn generate_element(p: &GeneratorParams) -> Result<Drawing, GeneratorError> {
    let g = generate_graph(p)?;
    Ok(random_drawing(&g, p))
}

/// `count` independent elements whose edge counts span at least half of the
/// allowed edge range; whole sets are redrawn until they do.
pub fn generate_element_set(p: &GeneratorParams, count: usize) -> Result<Vec<Drawing>, GeneratorError> {
    p.validate()?;
    if count == 0 {
        return Err(GeneratorError::EmptySet);
    }
    let required = (p.max_edges - p.min_edges) as f64 / 2.0;
    let mut master = rng(p.seed, SET_STREAM);
    for _ in 0..MAX_RESAMPLE_ROUNDS {
        let set = (0..count)
            .map(|_| {
                generate_element(&GeneratorParams {
                    seed: master.gen(),
                    ..p.clone()
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if count == 1 || edge_span(&set) as f64 >= required {
            return Ok(set);
        }
    }
    Err(GeneratorError::SpanNotReached(MAX_RESAMPLE_ROUNDS))
}

pub fn edge_span(set: &[Drawing]) -> usize {
    let counts = set.iter().map(|d| d.graph.edge_count());
    let max = counts.clone().max().unwrap_or(0);
    let min = counts.min().unwrap_or(0);
    max - min
}

/// Content-derived element id: first 16 hex digits of the drawing hash.
pub fn element_id(d: &Drawing) -> String {
    d.content_hash()[..16].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_drawing;

    #[test]
    fn pair_index_enumerates_all_pairs() {
        let n = 7;
        let all: Vec<_> = (0..n * (n - 1) / 2).map(|k| pair_from_index(n, k)).collect();
        let mut expected = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                expected.push((a, b));
            }
        }
        assert_eq!(all, expected);
    }

    #[test]
    fn edge_bounds_hold_for_default_params() {
        for seed in 0..300 {
            let g = generate_graph(&GeneratorParams::with_seed(seed)).unwrap();
            let m = g.edge_count();
            assert!((5..=69).contains(&m), "seed {seed}: {m} edges");
            assert!(Graph::new(g.node_count(), g.edges.clone()).is_ok());
        }
    }

    #[test]
    fn same_seed_same_drawing() {
        let p = GeneratorParams::with_seed(42);
        assert_eq!(generate_element(&p).unwrap(), generate_element(&p).unwrap());
        assert_ne!(
            generate_element(&p).unwrap(),
            generate_element(&GeneratorParams::with_seed(43)).unwrap()
        );
    }

    #[test]
    fn drawings_are_valid() {
        for seed in 0..50 {
            let d = generate_element(&GeneratorParams::with_seed(seed)).unwrap();
            assert!(validate_drawing(&d).is_empty());
            assert!(d.curvatures.iter().all(|c| c.abs() <= 0.8));
        }
    }

    #[test]
    fn element_set_spans_the_edge_range() {
        let set = generate_element_set(&GeneratorParams::with_seed(7), 12).unwrap();
        assert_eq!(set.len(), 12);
        assert!(edge_span(&set) as f64 >= (69.0 - 5.0) / 2.0);
        let single = generate_element_set(&GeneratorParams::with_seed(7), 1).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn infeasible_ranges_are_rejected() {
        let p = GeneratorParams {
            node_count_range: (3, 3),
            ..Default::default()
        };
        assert!(matches!(generate_graph(&p), Err(GeneratorError::InvalidParams(_))));
        let p = GeneratorParams {
            min_edges: 10,
            max_edges: 5,
            ..Default::default()
        };
        assert!(generate_graph(&p).is_err());
        assert_eq!(
            generate_element_set(&GeneratorParams::default(), 0),
            Err(GeneratorError::EmptySet)
        );
    }

    #[test]
    fn narrow_node_range_that_cannot_span_fails() {
        // 4 nodes admit at most 6 edges; a span of (69-5)/2 is unreachable.
        let p = GeneratorParams {
            node_count_range: (4, 4),
            ..Default::default()
        };
        assert_eq!(
            generate_element_set(&p, 3),
            Err(GeneratorError::SpanNotReached(MAX_RESAMPLE_ROUNDS))
        );
    }
}
