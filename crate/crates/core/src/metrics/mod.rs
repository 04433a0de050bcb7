//! The aesthetic metric catalog: raw value and normalized score for every
//! [`MetricId`] on a [`Drawing`].
//!
//! Scores live in `[0, 1]` with 1 the preferred pole. Metrics whose
//! precondition fails (no crossings, no bounded face, no node of degree
//! two or more, ...) come back with `defined = false` instead of an error.

mod context;
mod formulas;
mod stats;

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{catalog_entry, validate_drawing, Drawing, MetricId, MetricResult};

pub use context::MetricContext;
pub use stats::{coefficient_of_variation, mean, spearman, std_dev};

/// Seed of the pair sampler used by the path metrics on graphs with more
/// than [`ALL_PAIRS_MAX_NODES`] nodes.
pub const PAIR_SAMPLE_SEED: u64 = 0x5EED_0A1E;
pub const PAIR_SAMPLE_COUNT: usize = 200;
pub const ALL_PAIRS_MAX_NODES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("unknown metric id `{0}`")]
    UnknownMetric(String),
    #[error("invalid drawing: {}", .0.join("; "))]
    InvalidDrawing(Vec<String>),
}

fn check(d: &Drawing) -> Result<(), MetricsError> {
    let v = validate_drawing(d);
    if v.is_empty() {
        Ok(())
    } else {
        Err(MetricsError::InvalidDrawing(v))
    }
}

pub fn evaluate(d: &Drawing, id: MetricId) -> Result<MetricResult, MetricsError> {
    check(d)?;
    Ok(formulas::compute(&MetricContext::new(d), id))
}

/// Same as [`evaluate`] but for an id given by name.
pub fn evaluate_named(d: &Drawing, name: &str) -> Result<MetricResult, MetricsError> {
    let id = name
        .parse::<MetricId>()
        .map_err(|_| MetricsError::UnknownMetric(name.to_string()))?;
    evaluate(d, id)
}

/// Evaluates a subset of ids over one shared context.
pub fn evaluate_many(d: &Drawing, ids: &[MetricId]) -> Result<Vec<MetricResult>, MetricsError> {
    check(d)?;
    let ctx = MetricContext::new(d);
    Ok(ids.iter().map(|&id| formulas::compute(&ctx, id)).collect())
}

pub fn evaluate_all(d: &Drawing) -> Result<MetricVector, MetricsError> {
    Ok(MetricVector {
        results: evaluate_many(d, &MetricId::ALL)?,
        drawing_hash: d.content_hash(),
    })
}

/// Formula used for `id`, in words.
pub fn explain(id: MetricId) -> &'static str {
    formulas::explanation(id)
}

pub fn explain_named(name: &str) -> Result<&'static str, MetricsError> {
    name.parse::<MetricId>()
        .map(explain)
        .map_err(|_| MetricsError::UnknownMetric(name.to_string()))
}

/// One result per catalog id plus the hash of the evaluated drawing.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVector {
    pub results: Vec<MetricResult>,
    pub drawing_hash: String,
}

impl MetricVector {
    pub fn get(&self, id: MetricId) -> &MetricResult {
        self.results
            .iter()
            .find(|r| r.id == id)
            .expect("metric vector holds every id")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metric vector serializes")
    }

    /// Fixed-width text table: id | defined | raw | score.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<28} {:>4} {:>14} {:>7}", "metric", "def", "raw", "score");
        for r in &self.results {
            if r.defined {
                let _ = writeln!(out, "{:<28} {:>4} {:>14.4} {:>7.4}", r.id.as_str(), "yes", r.raw, r.score);
            } else {
                let _ = writeln!(out, "{:<28} {:>4} {:>14} {:>7}", r.id.as_str(), "no", "-", "-");
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ResultBody {
    raw: f64,
    score: f64,
    defined: bool,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    drawing_hash: String,
    results: IndexMap<MetricId, ResultBody>,
}

impl Serialize for MetricVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        VectorRepr {
            drawing_hash: self.drawing_hash.clone(),
            results: self
                .results
                .iter()
                .map(|r| {
                    (
                        r.id,
                        ResultBody {
                            raw: r.raw,
                            score: r.score,
                            defined: r.defined,
                        },
                    )
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MetricVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = VectorRepr::deserialize(deserializer)?;
        if repr.results.len() != MetricId::ALL.len() {
            return Err(serde::de::Error::custom(format!(
                "expected {} metric results, found {}",
                MetricId::ALL.len(),
                repr.results.len()
            )));
        }
        Ok(MetricVector {
            drawing_hash: repr.drawing_hash,
            results: repr
                .results
                .into_iter()
                .map(|(id, b)| MetricResult {
                    id,
                    raw: b.raw,
                    score: b.score,
                    defined: b.defined,
                })
                .collect(),
        })
    }
}

/// Display name used in reports.
pub fn display_name(id: MetricId) -> &'static str {
    catalog_entry(id).display_name
}

#[cfg(test)]
mod tests;
