//! Layout optimization against a weighted mix of catalog aesthetics:
//! simulated annealing from a random start, plus a strict hill-climbing
//! refinement.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{random_drawing, GeneratorParams};
use crate::metrics::{evaluate_many, MetricsError};
use crate::model::{catalog, Canvas, Drawing, Graph, MetricId, DEFAULT_NODE_RADIUS, DEFAULT_STROKE_WIDTH};

const MOVE_STREAM: u64 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("invalid annealing config: {0}")]
    InvalidConfig(String),
    #[error("every weighted metric is undefined on this drawing")]
    AllUndefined,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedPolicy {
    /// Leave undefined metrics out of the weighted mean.
    #[default]
    Skip,
    /// Count undefined metrics with score 0.
    Worst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub weights: IndexMap<MetricId, f64>,
    #[serde(default)]
    pub undefined_policy: UndefinedPolicy,
}

impl Default for Objective {
    /// Uniform weights over the aesthetics with published empirical support.
    fn default() -> Self {
        Objective {
            weights: catalog().iter().filter(|e| e.evaluated).map(|e| (e.id, 1.0)).collect(),
            undefined_policy: UndefinedPolicy::Skip,
        }
    }
}

impl Objective {
    pub fn single(id: MetricId) -> Self {
        Objective {
            weights: [(id, 1.0)].into_iter().collect(),
            undefined_policy: UndefinedPolicy::Skip,
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if let Some((id, w)) = self.weights.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(OptimizerError::InvalidObjective(format!("weight for {id} is {w}")));
        }
        if !self.weights.values().any(|w| *w > 0.0) {
            return Err(OptimizerError::InvalidObjective("no strictly positive weight".into()));
        }
        Ok(())
    }

    fn active(&self) -> (Vec<MetricId>, Vec<f64>) {
        self.weights.iter().filter(|(_, w)| **w > 0.0).map(|(id, w)| (*id, *w)).unzip()
    }
}

/// Weighted mean of scores in `[0, 1]`.
pub fn objective_value(d: &Drawing, o: &Objective) -> Result<f64, OptimizerError> {
    o.validate()?;
    let (ids, weights) = o.active();
    value_of(d, &ids, &weights, o.undefined_policy)
}

fn value_of(d: &Drawing, ids: &[MetricId], weights: &[f64], policy: UndefinedPolicy) -> Result<f64, OptimizerError> {
    let results = evaluate_many(d, ids)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (r, w) in results.iter().zip(weights) {
        match (r.defined, policy) {
            (true, _) => {
                num += w * r.score;
                den += w;
            }
            (false, UndefinedPolicy::Worst) => den += w,
            (false, UndefinedPolicy::Skip) => {}
        }
    }
    if den == 0.0 {
        return Err(OptimizerError::AllUndefined);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub seed: u64,
    pub max_iterations: usize,
    pub initial_temperature: f64,
    /// Temperature multiplier per iteration.
    pub cooling_factor: f64,
    /// Node displacement standard deviation as a fraction of the canvas side.
    pub node_sigma: f64,
    /// Curvature moves are uniform in `[-curvature_delta, curvature_delta]`.
    pub curvature_delta: f64,
    /// Probability that a move perturbs a curvature rather than a node.
    pub curvature_move_prob: f64,
    pub canvas: Canvas,
    pub node_radius: f64,
    pub stroke_width: f64,
    /// Curvature bound of the random start drawing.
    pub start_max_curvature: f64,
    /// Stop as soon as the objective reaches 1.
    pub stop_at_optimum: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            seed: 0,
            max_iterations: 20_000,
            initial_temperature: 0.1,
            cooling_factor: 0.9997,
            node_sigma: 0.02,
            curvature_delta: 0.1,
            curvature_move_prob: 0.5,
            canvas: Canvas::default(),
            node_radius: DEFAULT_NODE_RADIUS,
            stroke_width: DEFAULT_STROKE_WIDTH,
            start_max_curvature: 0.8,
            stop_at_optimum: true,
        }
    }
}

impl AnnealConfig {
    pub fn with_seed(seed: u64) -> Self {
        AnnealConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: String| Err(OptimizerError::InvalidConfig(m));
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad(format!("cooling_factor {} outside (0, 1)", self.cooling_factor));
        }
        if !(self.initial_temperature.is_finite() && self.initial_temperature >= 0.0) {
            return bad(format!("initial_temperature {}", self.initial_temperature));
        }
        if !(self.node_sigma.is_finite() && self.node_sigma >= 0.0) {
            return bad(format!("node_sigma {}", self.node_sigma));
        }
        if !(self.curvature_delta.is_finite() && self.curvature_delta >= 0.0) {
            return bad(format!("curvature_delta {}", self.curvature_delta));
        }
        if !(0.0..=1.0).contains(&self.curvature_move_prob) {
            return bad(format!("curvature_move_prob {}", self.curvature_move_prob));
        }
        if !(0.0..=1.0).contains(&self.start_max_curvature) {
            return bad(format!("start_max_curvature {}", self.start_max_curvature));
        }
        if !(self.canvas.width > 0.0 && self.canvas.height > 0.0) {
            return bad("canvas dimensions must be positive".into());
        }
        Ok(())
    }

    fn start_params(&self) -> GeneratorParams {
        GeneratorParams {
            seed: self.seed,
            canvas: self.canvas,
            max_curvature: self.start_max_curvature,
            node_radius: self.node_radius,
            stroke_width: self.stroke_width,
            ..Default::default()
        }
    }
}

/// One annealing or refinement step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// Candidate objective minus current objective; `None` when the move
    /// produced an unusable drawing.
    pub delta: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub drawing: Drawing,
    /// Objective of `drawing`; recomputing it gives the same number.
    pub value: f64,
    pub start_value: f64,
    /// Best value seen after each executed iteration.
    pub trace: Vec<f64>,
    pub steps: Vec<Step>,
}

impl OptimizeOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

enum Move {
    Node(usize, crate::model::Point),
    Curve(usize, f64),
}

struct Mover {
    rng: ChaCha8Rng,
    node_x: Normal<f64>,
    node_y: Normal<f64>,
    delta: f64,
    curve_prob: f64,
}

impl Mover {
    fn new(c: &AnnealConfig, canvas: Canvas) -> Mover {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        rng.set_stream(MOVE_STREAM);
        Mover {
            rng,
            node_x: Normal::new(0.0, c.node_sigma * canvas.width).expect("finite sigma"),
            node_y: Normal::new(0.0, c.node_sigma * canvas.height).expect("finite sigma"),
            delta: c.curvature_delta,
            curve_prob: c.curvature_move_prob,
        }
    }

    /// Applies a random move in place; returns what to restore.
    fn apply(&mut self, d: &mut Drawing) -> Option<Move> {
        let (n, m) = (d.graph.node_count(), d.graph.edge_count());
        let curve = m > 0 && (n == 0 || self.rng.gen_bool(self.curve_prob));
        if curve {
            let e = self.rng.gen_range(0..m);
            let old = d.curvatures[e];
            let step = if self.delta > 0.0 {
                self.rng.gen_range(-self.delta..=self.delta)
            } else {
                0.0
            };
            d.curvatures[e] = (old + step).clamp(-1.0, 1.0);
            Some(Move::Curve(e, old))
        } else if n > 0 {
            let v = self.rng.gen_range(0..n);
            let old = d.positions[v];
            let (dx, dy) = (self.node_x.sample(&mut self.rng), self.node_y.sample(&mut self.rng));
            d.positions[v].x = (old.x + dx).clamp(0.0, d.canvas.width);
            d.positions[v].y = (old.y + dy).clamp(0.0, d.canvas.height);
            Some(Move::Node(v, old))
        } else {
            None
        }
    }

    fn undo(d: &mut Drawing, mv: Move) {
        match mv {
            Move::Node(v, p) => d.positions[v] = p,
            Move::Curve(e, c) => d.curvatures[e] = c,
        }
    }
}

/// Simulated annealing from a seeded random drawing of `g`. A move is kept
/// when it does not lower the objective, or with probability `exp(Δ/T)`.
pub fn optimize_layout(g: &Graph, o: &Objective, c: &AnnealConfig) -> Result<OptimizeOutcome, OptimizerError> {
    o.validate()?;
    c.validate()?;
    let start = random_drawing(g, &c.start_params());
    anneal(start, o, c, true)
}

/// Hill climbing from `d`: only strict improvements are kept.
pub fn greedy_refine(d: &Drawing, o: &Objective, c: &AnnealConfig) -> Result<OptimizeOutcome, OptimizerError> {
    o.validate()?;
    c.validate()?;
    anneal(d.clone(), o, c, false)
}

fn anneal(start: Drawing, o: &Objective, c: &AnnealConfig, annealing: bool) -> Result<OptimizeOutcome, OptimizerError> {
    let (ids, weights) = o.active();
    let policy = o.undefined_policy;
    let start_value = value_of(&start, &ids, &weights, policy)?;
    let mut mover = Mover::new(c, start.canvas);
    let mut current = start;
    let mut current_value = start_value;
    let mut best = current.clone();
    let mut best_value = current_value;
    let mut temperature = c.initial_temperature;
    let mut trace = Vec::with_capacity(c.max_iterations);
    let mut steps = Vec::with_capacity(c.max_iterations);

    for _ in 0..c.max_iterations {
        if c.stop_at_optimum && best_value >= 1.0 {
            break;
        }
        let Some(mv) = mover.apply(&mut current) else {
            break;
        };
        let candidate = value_of(&current, &ids, &weights, policy).ok();
        let delta = candidate.map(|v| v - current_value);
        let accepted = match delta {
            None => false,
            Some(dv) if !annealing => dv > 0.0,
            Some(dv) if dv >= 0.0 => true,
            Some(dv) => {
                // draw only when needed so equal-valued runs consume equal randomness
                let u: f64 = mover.rng.gen();
                temperature > 0.0 && u < (dv / temperature).exp()
            }
        };
        if accepted {
            current_value = candidate.expect("accepted moves have a value");
            if current_value > best_value {
                best_value = current_value;
                best = current.clone();
            }
        } else {
            Mover::undo(&mut current, mv);
        }
        steps.push(Step { delta, accepted });
        trace.push(best_value);
        temperature *= c.cooling_factor;
    }

    Ok(OptimizeOutcome {
        drawing: best,
        value: best_value,
        start_value,
        trace,
        steps,
    })
}
