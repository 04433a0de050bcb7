//! Repertory-grid interviews: studies (fixed element sets), sessions
//! (triads, constructs, laddering, stop rule) and session exports.
//!
//! A session is the fold of its append-only event log; every mutation
//! appends one event, and [`Session::replay`] rebuilds identical state.

mod session;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{validate_drawing, Drawing};

pub use session::{
    normalize_pole, AddedElement, Construct, ConstructRequest, Event, FinishReason, FinishRecord, LogEntry,
    ParticipantView, Session, SessionExport, SessionState, Triad, TriadRecord,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RgtError {
    #[error("a study needs at least {needed} elements, found {found}")]
    TooFewElements { needed: usize, found: usize },
    #[error("element {0} appears twice")]
    DuplicateElement(String),
    #[error("invalid study config: {0}")]
    InvalidConfig(String),
    #[error("malformed element payload: {0}")]
    MalformedPayload(String),
    #[error("session is finished")]
    SessionFinished,
    #[error("no triad is currently open")]
    NoCurrentTriad,
    #[error("triad {found} is not the open triad {expected}")]
    NotCurrentTriad { expected: usize, found: usize },
    #[error("construct poles must be non-empty")]
    EmptyPole,
    #[error("construct poles are equal after normalization")]
    EqualPoles,
    #[error("unknown construct {0}")]
    UnknownConstruct(String),
    #[error("request id {0} was already used for a different operation")]
    RequestConflict(String),
    #[error("session log does not match study {0}")]
    StudyMismatch(String),
    #[error("corrupt session log: {0}")]
    CorruptLog(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Drawing { drawing: Drawing },
    /// Opaque image reference, e.g. a verbatim SVG document or a
    /// base64 raster with its media type.
    Image { media_type: String, data: String },
    /// Text card standing in for an element the participant imagines.
    Text { text: String },
}

impl Payload {
    pub fn validate(&self) -> Result<(), RgtError> {
        match self {
            Payload::Drawing { drawing } => {
                let v = validate_drawing(drawing);
                if !v.is_empty() {
                    return Err(RgtError::MalformedPayload(v.join("; ")));
                }
                if drawing.graph.node_count() == 0 {
                    return Err(RgtError::MalformedPayload("drawing has no nodes".into()));
                }
            }
            Payload::Image { media_type, data } => {
                if media_type.trim().is_empty() || data.is_empty() {
                    return Err(RgtError::MalformedPayload("image needs a media type and data".into()));
                }
            }
            Payload::Text { text } => {
                if text.trim().is_empty() {
                    return Err(RgtError::MalformedPayload("empty text card".into()));
                }
            }
        }
        Ok(())
    }

    /// First 16 hex digits of the payload hash. Drawings hash their
    /// canonical JSON, so the id matches [`crate::generator::element_id`].
    pub fn content_id(&self) -> String {
        match self {
            Payload::Drawing { drawing } => crate::generator::element_id(drawing),
            Payload::Image { media_type, data } => short_hash(&[media_type.as_bytes(), b"\n", data.as_bytes()]),
            Payload::Text { text } => short_hash(&[b"text\n", text.as_bytes()]),
        }
    }
}

fn short_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())[..16].to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Generated,
    ParticipantDrawn,
    Placeholder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub origin: Origin,
    pub payload: Payload,
}

impl Element {
    pub fn new(payload: Payload, origin: Origin, label: Option<String>) -> Result<Element, RgtError> {
        payload.validate()?;
        Ok(Element {
            id: payload.content_id(),
            label,
            origin,
            payload,
        })
    }

    pub fn generated(d: Drawing) -> Result<Element, RgtError> {
        Element::new(Payload::Drawing { drawing: d }, Origin::Generated, None)
    }

    pub fn drawing(&self) -> Option<&Drawing> {
        match &self.payload {
            Payload::Drawing { drawing } => Some(drawing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    /// Consecutive triads without a new construct that end a session.
    pub strike_limit: u32,
    pub triad_size: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            strike_limit: 3,
            triad_size: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub id: String,
    pub elements: Vec<Element>,
    pub config: StudyConfig,
}

/// Builds a study; the id is derived from the element ids and config, so
/// identical inputs give identical ids.
pub fn create_study(elements: Vec<Element>, config: StudyConfig) -> Result<Study, RgtError> {
    if config.strike_limit == 0 {
        return Err(RgtError::InvalidConfig("strike_limit must be >= 1".into()));
    }
    if config.triad_size < 2 {
        return Err(RgtError::InvalidConfig("triad_size must be >= 2".into()));
    }
    if elements.len() < config.triad_size {
        return Err(RgtError::TooFewElements {
            needed: config.triad_size,
            found: elements.len(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for e in &elements {
        e.payload.validate()?;
        if e.id != e.payload.content_id() {
            return Err(RgtError::MalformedPayload(format!("element id {} does not match its content", e.id)));
        }
        if !seen.insert(e.id.as_str()) {
            return Err(RgtError::DuplicateElement(e.id.clone()));
        }
    }
    let key = format!(
        "{}|{}|{}",
        elements.iter().map(|e| e.id.as_str()).collect::<Vec<_>>().join(","),
        config.strike_limit,
        config.triad_size
    );
    Ok(Study {
        id: format!("s-{}", short_hash(&[key.as_bytes()])),
        elements,
        config,
    })
}

impl Study {
    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }
}
