//! File-backed persistence.
//!
//! ```text
//! <root>/studies/<study id>.json      study: config, label, element ids
//! <root>/elements/<element id>.json   element record (content addressed)
//! <root>/elements/<element id>.svg    image payloads with an SVG media type, verbatim
//! <root>/sessions/<session id>.jsonl  append-only session event log
//! <root>/analysis/<study id>.jsonl    append-only tag/mapping events
//! ```

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{AnalysisEvent, StudyAnalysis};
use crate::rgt::{create_study, Element, Payload, Session, Study, StudyConfig};

use super::ApiError;

pub const DATA_DIR_ENV: &str = "AESTHETICS_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub id: String,
    #[serde(default)]
    pub label: String,
    pub config: StudyConfig,
    pub elements: Vec<String>,
}

pub struct Store {
    root: PathBuf,
    studies: RwLock<HashMap<String, Arc<Study>>>,
    labels: RwLock<HashMap<String, String>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    analysis: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn io(e: std::io::Error) -> ApiError {
    ApiError::internal(format!("storage: {e}"))
}

fn append_lines(path: &Path, lines: &str) -> Result<(), ApiError> {
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    f.write_all(lines.as_bytes()).map_err(io)?;
    f.sync_data().map_err(io)
}

impl Store {
    /// Opens (creating if needed) a data directory and checks it is writable.
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, ApiError> {
        let root = root.into();
        for sub in ["studies", "elements", "sessions", "analysis"] {
            fs::create_dir_all(root.join(sub)).map_err(io)?;
        }
        let probe = root.join(".write-probe");
        fs::write(&probe, b"ok").map_err(|e| ApiError::internal(format!("data directory {} is not writable: {e}", root.display())))?;
        let _ = fs::remove_file(probe);
        Ok(Store {
            root,
            studies: RwLock::new(HashMap::new()),
            labels: RwLock::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
            analysis: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn element_path(&self, id: &str, ext: &str) -> PathBuf {
        self.root.join("elements").join(format!("{id}.{ext}"))
    }

    fn put_element(&self, e: &Element) -> Result<(), ApiError> {
        let path = self.element_path(&e.id, "json");
        if !path.exists() {
            fs::write(&path, serde_json::to_string_pretty(e).expect("elements serialize")).map_err(io)?;
        }
        if let Payload::Image { media_type, data } = &e.payload {
            if media_type == "image/svg+xml" {
                let svg = self.element_path(&e.id, "svg");
                if !svg.exists() {
                    fs::write(svg, data).map_err(io)?;
                }
            }
        }
        Ok(())
    }

    pub fn element(&self, id: &str) -> Result<Element, ApiError> {
        if !id.chars().all(|c| c.is_ascii_alphanumeric()) {
            return Err(ApiError::not_found("element", id));
        }
        let text = fs::read_to_string(self.element_path(id, "json")).map_err(|_| ApiError::not_found("element", id))?;
        serde_json::from_str(&text).map_err(|e| ApiError::internal(format!("element {id}: {e}")))
    }

    /// Stores a study. Identical inputs give the same id, so repeating the
    /// call is harmless.
    pub fn create_study(&self, label: &str, elements: Vec<Element>, config: StudyConfig) -> Result<Arc<Study>, ApiError> {
        let study = create_study(elements, config)?;
        for e in &study.elements {
            self.put_element(e)?;
        }
        let record = StudyRecord {
            id: study.id.clone(),
            label: label.to_string(),
            config: study.config,
            elements: study.elements.iter().map(|e| e.id.clone()).collect(),
        };
        let path = self.root.join("studies").join(format!("{}.json", study.id));
        if !path.exists() {
            fs::write(path, serde_json::to_string_pretty(&record).expect("records serialize")).map_err(io)?;
        }
        let study = Arc::new(study);
        self.studies.write().expect("lock").insert(study.id.clone(), study.clone());
        self.labels.write().expect("lock").insert(study.id.clone(), label.to_string());
        Ok(study)
    }

    pub fn study(&self, id: &str) -> Result<Arc<Study>, ApiError> {
        if let Some(s) = self.studies.read().expect("lock").get(id) {
            return Ok(s.clone());
        }
        let record = self.study_record(id)?;
        let elements = record.elements.iter().map(|e| self.element(e)).collect::<Result<Vec<_>, _>>()?;
        let study = Arc::new(create_study(elements, record.config)?);
        self.studies.write().expect("lock").insert(id.to_string(), study.clone());
        self.labels.write().expect("lock").insert(id.to_string(), record.label);
        Ok(study)
    }

    pub fn study_record(&self, id: &str) -> Result<StudyRecord, ApiError> {
        if !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(ApiError::not_found("study", id));
        }
        let text = fs::read_to_string(self.root.join("studies").join(format!("{id}.json")))
            .map_err(|_| ApiError::not_found("study", id))?;
        serde_json::from_str(&text).map_err(|e| ApiError::internal(format!("study {id}: {e}")))
    }

    pub fn list_studies(&self) -> Result<Vec<StudyRecord>, ApiError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("studies")).map_err(io)? {
            let path = entry.map_err(io)?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let text = fs::read_to_string(&path).map_err(io)?;
                out.push(serde_json::from_str(&text).map_err(|e| ApiError::internal(e.to_string()))?);
            }
        }
        out.sort_by(|a: &StudyRecord, b| a.id.cmp(&b.id));
        Ok(out)
    }

    fn session_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.jsonl"))
    }

    /// Starts a session, or returns the existing one with the same id.
    /// The default id is derived from study, participant and seed.
    pub fn start_session(
        &self,
        study_id: &str,
        participant: &str,
        seed: u64,
        session_id: Option<&str>,
    ) -> Result<String, ApiError> {
        let study = self.study(study_id)?;
        let id = match session_id {
            Some(id) => {
                if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                    return Err(ApiError::bad_request("session ids use letters, digits, '-' and '_'"));
                }
                id.to_string()
            }
            None => {
                let mut h = Sha256::new();
                h.update(format!("{study_id}\n{participant}\n{seed}"));
                format!("sess-{}", &hex::encode(h.finalize())[..12])
            }
        };
        let mut sessions = self.sessions.lock().expect("lock");
        if sessions.contains_key(&id) || self.session_path(&id).exists() {
            drop(sessions);
            let existing = self.session(&id)?;
            let s = existing.lock().expect("lock");
            if s.study_id() != study_id || s.participant() != participant {
                return Err(ApiError::conflict(format!("session {id} already exists for another participant")));
            }
            return Ok(id);
        }
        let session = Session::start(&study, &id, participant, seed);
        append_lines(&self.session_path(&id), &session.log_jsonl())?;
        sessions.insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let mut sessions = self.sessions.lock().expect("lock");
        if let Some(s) = sessions.get(id) {
            return Ok(s.clone());
        }
        if !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(ApiError::not_found("session", id));
        }
        let text = fs::read_to_string(self.session_path(id)).map_err(|_| ApiError::not_found("session", id))?;
        let log = Session::parse_log(&text)?;
        let study_id = match log.first().map(|e| &e.event) {
            Some(crate::rgt::Event::SessionStarted { study_id, .. }) => study_id.clone(),
            _ => return Err(ApiError::internal(format!("session {id}: log has no start event"))),
        };
        let study = self.study(&study_id)?;
        let session = Arc::new(Mutex::new(Session::replay(&study, &log)?));
        sessions.insert(id.to_string(), session.clone());
        Ok(session)
    }

    /// Runs `f` on the session under its lock and appends whatever events
    /// it produced to the session file.
    pub fn with_session<R>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<R, crate::rgt::RgtError>,
    ) -> Result<R, ApiError> {
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("lock");
        let before = s.log().len();
        let out = f(&mut s);
        let added = &s.log()[before..];
        if !added.is_empty() {
            let lines: String = added
                .iter()
                .map(|e| serde_json::to_string(e).expect("log entries serialize") + "\n")
                .collect();
            append_lines(&self.session_path(id), &lines)?;
            for e in added {
                if let crate::rgt::Event::ElementAdded { element } = &e.event {
                    self.put_element(element)?;
                }
            }
        }
        Ok(out?)
    }

    pub fn read_session<R>(&self, id: &str, f: impl FnOnce(&Session) -> R) -> Result<R, ApiError> {
        let handle = self.session(id)?;
        let s = handle.lock().expect("lock");
        Ok(f(&s))
    }

    /// Ids of the sessions run against `study_id`, sorted.
    pub fn sessions_of(&self, study_id: &str) -> Result<Vec<String>, ApiError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join("sessions")).map_err(io)? {
            let path = entry.map_err(io)?.path();
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            if self.read_session(&id, |s| s.study_id() == study_id)? {
                ids.push(id);
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn analysis_path(&self, study_id: &str) -> PathBuf {
        self.root.join("analysis").join(format!("{study_id}.jsonl"))
    }

    /// Current tags and mappings of a study over its exported sessions.
    pub fn analysis(&self, study_id: &str) -> Result<StudyAnalysis, ApiError> {
        let label = {
            self.study(study_id)?;
            self.labels.read().expect("lock").get(study_id).cloned().unwrap_or_default()
        };
        let exports = self
            .sessions_of(study_id)?
            .iter()
            .map(|id| self.read_session(id, |s| s.export()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut a = StudyAnalysis::new(if label.is_empty() { study_id } else { &label }, exports);
        if let Ok(text) = fs::read_to_string(self.analysis_path(study_id)) {
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let event: AnalysisEvent = serde_json::from_str(line).map_err(|e| ApiError::internal(e.to_string()))?;
                // events were validated when written; later re-tags may have invalidated old mappings
                let _ = a.apply(&event);
            }
        }
        Ok(a)
    }

    /// Validates and records a tag or mapping. Events that change nothing
    /// are not written again.
    pub fn annotate(&self, study_id: &str, event: AnalysisEvent) -> Result<AnalysisEvent, ApiError> {
        let lock = self.analysis.lock().expect("lock").entry(study_id.to_string()).or_default().clone();
        let _guard = lock.lock().expect("lock");
        let mut a = self.analysis(study_id)?;
        let unchanged = match &event {
            AnalysisEvent::Tag(t) => a.tag(&t.construct_id, &t.analyst) == Some(t.category),
            AnalysisEvent::Map(m) => a.mapping(&m.construct_id, &m.analyst) == Some(&m.aesthetic),
        };
        let applied = match &event {
            AnalysisEvent::Tag(t) => AnalysisEvent::Tag(a.tag_construct(&t.construct_id, t.category, &t.analyst)?),
            AnalysisEvent::Map(m) => AnalysisEvent::Map(a.map_construct(&m.construct_id, m.aesthetic.clone(), &m.analyst)?),
        };
        if !unchanged {
            append_lines(
                &self.analysis_path(study_id),
                &(serde_json::to_string(&applied).expect("events serialize") + "\n"),
            )?;
        }
        Ok(applied)
    }
}
