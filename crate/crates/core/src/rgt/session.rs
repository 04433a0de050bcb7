use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Element, Origin, Payload, RgtError, Study, StudyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Active,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    /// Strike limit reached.
    StopCriterion,
    /// Ended explicitly by the interviewer.
    Interviewer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triad {
    pub triad_id: usize,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Construct {
    pub id: String,
    pub session_id: String,
    pub triad_id: usize,
    pub pole_a: String,
    pub pole_b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder_parent: Option<String>,
    /// Interviewer judgement that this construct restates an earlier one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<String>,
    pub novel: bool,
}

/// Input for [`Session::record_construct`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConstructRequest {
    pub triad_id: usize,
    pub pole_a: String,
    pub pole_b: String,
    #[serde(default)]
    pub ladder_parent: Option<String>,
    #[serde(default)]
    pub duplicate_of: Option<String>,
}

impl ConstructRequest {
    pub fn new(triad_id: usize, pole_a: &str, pole_b: &str) -> Self {
        ConstructRequest {
            triad_id,
            pole_a: pole_a.to_string(),
            pole_b: pole_b.to_string(),
            ..Default::default()
        }
    }

    pub fn laddered_from(mut self, parent: &str) -> Self {
        self.ladder_parent = Some(parent.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriadRecord {
    pub triad_id: usize,
    pub elements: Vec<String>,
    pub constructs: Vec<String>,
    pub new_construct_count: usize,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SessionStarted {
        session_id: String,
        study_id: String,
        participant: String,
        seed: u64,
        config: StudyConfig,
        pool: Vec<String>,
    },
    TriadPresented {
        triad: Triad,
    },
    ConstructRecorded {
        construct: Construct,
    },
    TriadCompleted {
        triad_id: usize,
        new_constructs: usize,
        strikes: u32,
    },
    ElementAdded {
        element: Element,
    },
    Terminated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<String>,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinishRecord {
    pub reason: FinishReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Case-folded, trimmed pole text.
pub fn normalize_pole(s: &str) -> String {
    s.trim().to_lowercase()
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    let (a, b) = (normalize_pole(a), normalize_pole(b));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn triple_key(ids: &[String]) -> Vec<String> {
    let mut k = ids.to_vec();
    k.sort();
    k
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    id: String,
    study_id: String,
    participant: String,
    seed: u64,
    config: StudyConfig,
    pool: Vec<Element>,
    triads: Vec<TriadRecord>,
    constructs: Vec<Construct>,
    strikes: u32,
    finish: Option<FinishRecord>,
    /// Triples shown in the current scheduling cycle.
    cycle: BTreeSet<Vec<String>>,
    log: Vec<LogEntry>,
}

impl Session {
    pub fn start(study: &Study, session_id: &str, participant: &str, seed: u64) -> Session {
        let mut s = Session::empty(study);
        s.push(
            None,
            Event::SessionStarted {
                session_id: session_id.to_string(),
                study_id: study.id.clone(),
                participant: participant.to_string(),
                seed,
                config: study.config,
                pool: study.elements.iter().map(|e| e.id.clone()).collect(),
            },
        );
        s
    }

    fn empty(study: &Study) -> Session {
        Session {
            id: String::new(),
            study_id: study.id.clone(),
            participant: String::new(),
            seed: 0,
            config: study.config,
            pool: study.elements.clone(),
            triads: Vec::new(),
            constructs: Vec::new(),
            strikes: 0,
            finish: None,
            cycle: BTreeSet::new(),
            log: Vec::new(),
        }
    }

    /// Rebuilds a session from its log.
    pub fn replay(study: &Study, log: &[LogEntry]) -> Result<Session, RgtError> {
        let mut s = Session::empty(study);
        match log.first().map(|e| &e.event) {
            Some(Event::SessionStarted { study_id, pool, .. }) => {
                let ids: Vec<&String> = study.elements.iter().map(|e| &e.id).collect();
                if *study_id != study.id || pool.iter().collect::<Vec<_>>() != ids {
                    return Err(RgtError::StudyMismatch(study.id.clone()));
                }
            }
            _ => return Err(RgtError::CorruptLog("log must open with session_started".into())),
        }
        for (i, entry) in log.iter().enumerate() {
            if entry.seq != i as u64 {
                return Err(RgtError::CorruptLog(format!("entry {i} has seq {}", entry.seq)));
            }
            s.apply(&entry.event)?;
            s.log.push(entry.clone());
        }
        Ok(s)
    }

    fn push(&mut self, request_id: Option<&str>, event: Event) {
        self.apply(&event).expect("validated event applies");
        self.log.push(LogEntry {
            seq: self.log.len() as u64,
            request_id: request_id.map(str::to_string),
            event,
        });
    }

    fn apply(&mut self, event: &Event) -> Result<(), RgtError> {
        let corrupt = |m: &str| Err(RgtError::CorruptLog(m.to_string()));
        match event {
            Event::SessionStarted {
                session_id,
                participant,
                seed,
                config,
                ..
            } => {
                if !self.id.is_empty() {
                    return corrupt("second session_started");
                }
                self.id = session_id.clone();
                self.participant = participant.clone();
                self.seed = *seed;
                self.config = *config;
            }
            Event::TriadPresented { triad } => {
                if self.open_triad().is_some() || triad.triad_id != self.triads.len() {
                    return corrupt("triad presented out of order");
                }
                let key = triple_key(&triad.elements);
                if self.cycle.contains(&key) {
                    self.cycle.clear();
                }
                self.cycle.insert(key);
                self.triads.push(TriadRecord {
                    triad_id: triad.triad_id,
                    elements: triad.elements.clone(),
                    constructs: Vec::new(),
                    new_construct_count: 0,
                    completed: false,
                });
            }
            Event::ConstructRecorded { construct } => {
                let Some(t) = self.triads.last_mut().filter(|t| !t.completed && t.triad_id == construct.triad_id)
                else {
                    return corrupt("construct outside the open triad");
                };
                t.constructs.push(construct.id.clone());
                if construct.novel {
                    t.new_construct_count += 1;
                }
                self.constructs.push(construct.clone());
            }
            Event::TriadCompleted { triad_id, strikes, .. } => {
                let Some(t) = self.triads.last_mut().filter(|t| !t.completed && t.triad_id == *triad_id) else {
                    return corrupt("completion of a triad that is not open");
                };
                t.completed = true;
                self.strikes = *strikes;
                if self.strikes >= self.config.strike_limit {
                    self.finish = Some(FinishRecord {
                        reason: FinishReason::StopCriterion,
                        note: None,
                    });
                }
            }
            Event::ElementAdded { element } => self.pool.push(element.clone()),
            Event::Terminated { note } => {
                self.finish = Some(FinishRecord {
                    reason: FinishReason::Interviewer,
                    note: note.clone(),
                })
            }
        }
        Ok(())
    }

    fn prior(&self, request_id: Option<&str>) -> Option<&Event> {
        let rid = request_id?;
        self.log.iter().find(|e| e.request_id.as_deref() == Some(rid)).map(|e| &e.event)
    }

    fn ensure_active(&self) -> Result<(), RgtError> {
        match self.state() {
            SessionState::Active => Ok(()),
            SessionState::Finished => Err(RgtError::SessionFinished),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn study_id(&self) -> &str {
        &self.study_id
    }

    pub fn participant(&self) -> &str {
        &self.participant
    }

    pub fn state(&self) -> SessionState {
        if self.finish.is_some() {
            SessionState::Finished
        } else {
            SessionState::Active
        }
    }

    pub fn finish(&self) -> Option<&FinishRecord> {
        self.finish.as_ref()
    }

    pub fn strikes(&self) -> u32 {
        self.strikes
    }

    pub fn config(&self) -> StudyConfig {
        self.config
    }

    pub fn pool(&self) -> &[Element] {
        &self.pool
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.pool.iter().find(|e| e.id == id)
    }

    pub fn triads(&self) -> &[TriadRecord] {
        &self.triads
    }

    pub fn constructs(&self) -> &[Construct] {
        &self.constructs
    }

    pub fn construct(&self, id: &str) -> Option<&Construct> {
        self.constructs.iter().find(|c| c.id == id)
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// One JSON object per line.
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|e| serde_json::to_string(e).expect("log entries serialize") + "\n")
            .collect()
    }

    pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, RgtError> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| RgtError::CorruptLog(e.to_string())))
            .collect()
    }

    pub fn open_triad(&self) -> Option<Triad> {
        self.triads.last().filter(|t| !t.completed).map(|t| Triad {
            triad_id: t.triad_id,
            elements: t.elements.clone(),
        })
    }

    /// Number of ladder steps from `id` up to its root, counting `id`.
    pub fn ladder_depth(&self, id: &str) -> Option<usize> {
        let mut depth = 0;
        let mut cur = Some(id.to_string());
        while let Some(c) = cur {
            cur = self.construct(&c)?.ladder_parent.clone();
            depth += 1;
        }
        Some(depth)
    }

    /// The open triad, or a fresh one drawn uniformly from the triples not
    /// yet shown in the current cycle. The draw for triad `i` uses its own
    /// generator stream, so it depends only on the seed, `i` and the pool.
    pub fn next_triad(&mut self, request_id: Option<&str>) -> Result<Triad, RgtError> {
        if let Some(prior) = self.prior(request_id) {
            return match prior {
                Event::TriadPresented { triad } => Ok(triad.clone()),
                _ => Err(RgtError::RequestConflict(request_id.unwrap_or_default().to_string())),
            };
        }
        self.ensure_active()?;
        if let Some(t) = self.open_triad() {
            return Ok(t);
        }
        let ids: Vec<&String> = self.pool.iter().map(|e| &e.id).collect();
        let all: Vec<Vec<String>> = subsets(ids.len(), self.config.triad_size)
            .into_iter()
            .map(|s| s.into_iter().map(|i| ids[i].clone()).collect())
            .collect();
        let mut fresh: Vec<&Vec<String>> = all.iter().filter(|t| !self.cycle.contains(&triple_key(t))).collect();
        if fresh.is_empty() {
            fresh = all.iter().collect();
        }
        let draw = self.triads.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(draw as u64);
        let pick = fresh[rng.gen_range(0..fresh.len())].clone();
        let triad = Triad {
            triad_id: draw,
            elements: pick,
        };
        self.push(request_id, Event::TriadPresented { triad: triad.clone() });
        Ok(triad)
    }

    pub fn record_construct(&mut self, request_id: Option<&str>, req: &ConstructRequest) -> Result<Construct, RgtError> {
        if let Some(prior) = self.prior(request_id) {
            return match prior {
                Event::ConstructRecorded { construct } => Ok(construct.clone()),
                _ => Err(RgtError::RequestConflict(request_id.unwrap_or_default().to_string())),
            };
        }
        self.ensure_active()?;
        let open = self.open_triad().ok_or(RgtError::NoCurrentTriad)?;
        if open.triad_id != req.triad_id {
            return Err(RgtError::NotCurrentTriad {
                expected: open.triad_id,
                found: req.triad_id,
            });
        }
        let (a, b) = (normalize_pole(&req.pole_a), normalize_pole(&req.pole_b));
        if a.is_empty() || b.is_empty() {
            return Err(RgtError::EmptyPole);
        }
        if a == b {
            return Err(RgtError::EqualPoles);
        }
        for reference in [&req.ladder_parent, &req.duplicate_of].into_iter().flatten() {
            if self.construct(reference).is_none() {
                return Err(RgtError::UnknownConstruct(reference.clone()));
            }
        }
        let key = pair_key(&req.pole_a, &req.pole_b);
        let seen = self.constructs.iter().any(|c| pair_key(&c.pole_a, &c.pole_b) == key);
        let construct = Construct {
            id: format!("{}-c{}", self.id, self.constructs.len() + 1),
            session_id: self.id.clone(),
            triad_id: req.triad_id,
            pole_a: req.pole_a.trim().to_string(),
            pole_b: req.pole_b.trim().to_string(),
            ladder_parent: req.ladder_parent.clone(),
            duplicate_of: req.duplicate_of.clone(),
            novel: !seen && req.duplicate_of.is_none(),
        };
        self.push(
            request_id,
            Event::ConstructRecorded {
                construct: construct.clone(),
            },
        );
        Ok(construct)
    }

    /// Closes the open triad and applies the stop rule.
    pub fn complete_triad(&mut self, request_id: Option<&str>) -> Result<SessionState, RgtError> {
        if let Some(prior) = self.prior(request_id) {
            return match prior {
                Event::TriadCompleted { strikes, .. } => Ok(if *strikes >= self.config.strike_limit {
                    SessionState::Finished
                } else {
                    SessionState::Active
                }),
                _ => Err(RgtError::RequestConflict(request_id.unwrap_or_default().to_string())),
            };
        }
        self.ensure_active()?;
        let open = self.open_triad().ok_or(RgtError::NoCurrentTriad)?;
        let new_constructs = self.triads.last().map_or(0, |t| t.new_construct_count);
        let strikes = if new_constructs == 0 { self.strikes + 1 } else { 0 };
        self.push(
            request_id,
            Event::TriadCompleted {
                triad_id: open.triad_id,
                new_constructs,
                strikes,
            },
        );
        Ok(self.state())
    }

    /// Adds a participant's own element to this session's pool. Text
    /// payloads become placeholder cards.
    pub fn add_participant_element(
        &mut self,
        request_id: Option<&str>,
        payload: Payload,
        label: Option<String>,
    ) -> Result<String, RgtError> {
        if let Some(prior) = self.prior(request_id) {
            return match prior {
                Event::ElementAdded { element } => Ok(element.id.clone()),
                _ => Err(RgtError::RequestConflict(request_id.unwrap_or_default().to_string())),
            };
        }
        self.ensure_active()?;
        let origin = match payload {
            Payload::Text { .. } => Origin::Placeholder,
            _ => Origin::ParticipantDrawn,
        };
        let element = Element::new(payload, origin, label)?;
        if self.element(&element.id).is_some() {
            return Ok(element.id);
        }
        let id = element.id.clone();
        self.push(request_id, Event::ElementAdded { element });
        Ok(id)
    }

    /// Interviewer ends the session early.
    pub fn terminate(&mut self, request_id: Option<&str>, note: Option<String>) -> Result<SessionState, RgtError> {
        if let Some(prior) = self.prior(request_id) {
            return match prior {
                Event::Terminated { .. } => Ok(SessionState::Finished),
                _ => Err(RgtError::RequestConflict(request_id.unwrap_or_default().to_string())),
            };
        }
        self.ensure_active()?;
        self.push(request_id, Event::Terminated { note });
        Ok(SessionState::Finished)
    }

    pub fn export(&self) -> SessionExport {
        SessionExport {
            session_id: self.id.clone(),
            study_id: self.study_id.clone(),
            participant: self.participant.clone(),
            seed: self.seed,
            state: self.state(),
            finish: self.finish.clone(),
            strikes: self.strikes,
            strike_limit: self.config.strike_limit,
            triads: self.triads.clone(),
            constructs: self.constructs.clone(),
            added_elements: self
                .pool
                .iter()
                .filter(|e| e.origin != Origin::Generated)
                .map(|e| AddedElement {
                    id: e.id.clone(),
                    origin: e.origin,
                    label: e.label.clone(),
                })
                .collect(),
        }
    }

    pub fn participant_view(&self) -> ParticipantView {
        ParticipantView {
            session_id: self.id.clone(),
            state: self.state(),
            current_triad: self.open_triad(),
            triads_completed: self.triads.iter().filter(|t| t.completed).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedElement {
    pub id: String,
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Ordered construct list with triad and ladder provenance and the
/// session's stop record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionExport {
    pub session_id: String,
    pub study_id: String,
    pub participant: String,
    pub seed: u64,
    pub state: SessionState,
    pub finish: Option<FinishRecord>,
    pub strikes: u32,
    pub strike_limit: u32,
    pub triads: Vec<TriadRecord>,
    pub constructs: Vec<Construct>,
    pub added_elements: Vec<AddedElement>,
}

impl SessionExport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("exports serialize")
    }

    pub fn from_json(text: &str) -> Result<SessionExport, RgtError> {
        serde_json::from_str(text).map_err(|e| RgtError::CorruptLog(e.to_string()))
    }
}

/// What the participant's screen may show: never constructs or strikes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantView {
    pub session_id: String,
    pub state: SessionState,
    pub current_triad: Option<Triad>,
    pub triads_completed: usize,
}
