//! Graph drawing aesthetics workbench.
//!
//! * [`model`]: graphs, drawings and the aesthetic catalog
//! * [`geometry`]: edge flattening, crossings, faces and angles
//! * [`metrics`]: raw value and score for every catalog aesthetic
//! * [`generator`]: seeded random study elements and SVG rendering
//! * [`optimizer`]: simulated annealing over weighted aesthetic objectives
//! * [`rgt`]: repertory-grid interview sessions with append-only event logs
//! * [`analysis`]: construct categorization, aesthetic mapping and reports
//! * [`service`]: file-backed study store and HTTP endpoints

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod generator;
pub mod model;
pub mod optimizer;
pub mod render;
pub mod rgt;
pub mod service;

pub use model::{catalog, validate_drawing, Canvas, Drawing, Graph, MetricId, MetricResult, Point};
