//! Line-delimited JSON session protocol.
//!
//! Every inbound line is one JSON object with a `kind` field and produces
//! exactly one reply line. Inbound kinds:
//!
//! | kind               | fields                                                        |
//! |--------------------|---------------------------------------------------------------|
//! | `open_session`     | optional `seed: u64`, optional `preconfigured: bool`          |
//! | `close_session`    | `session`                                                     |
//! | `gaze_event`       | `session`, `target: int`                                      |
//! | `query_strategy`   | `session`, `task: string`                                     |
//! | `task_performance` | `session`, `task`, `comprehension` / `enabledness`: `{success: bool, time: float}` |
//!
//! Replies reuse the request's kind (a query is answered by
//! `strategy_response`); failures are answered with
//! `{"kind":"error","session":...,"reason":...}`.
//!
//! One episode is one `query_strategy` followed by one `task_performance`
//! for the same session and task. If the performance does not arrive
//! within the configured timeout, the episode is logged without learning.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::partner_model::{GazeClass, PartnerModel};
use crate::scoring::{CognitiveState, HesitationType, NegationType, ScoringTable};
use crate::session::{Agent, DimensionOutcome, Session, TaskPerformance};

const INBOUND_KINDS: [&str; 5] = [
    "open_session",
    "close_session",
    "gaze_event",
    "query_strategy",
    "task_performance",
];
const REPLY_KINDS: [&str; 2] = ["strategy_response", "error"];

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Request {
    OpenSession {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        preconfigured: Option<bool>,
    },
    CloseSession {
        session: String,
    },
    GazeEvent {
        session: String,
        target: i64,
    },
    QueryStrategy {
        session: String,
        task: String,
    },
    TaskPerformance {
        session: String,
        task: String,
        comprehension: DimensionOutcome,
        enabledness: DimensionOutcome,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reply {
    OpenSession {
        session: String,
        config_digest: String,
    },
    CloseSession {
        session: String,
        episodes: usize,
        cumulative_reward: f64,
    },
    GazeEvent {
        session: String,
        target: i64,
        gaze: GazeClass,
    },
    StrategyResponse {
        session: String,
        negation: NegationType,
        hesitation: HesitationType,
        state: CognitiveState,
        triple: [&'static str; 3],
    },
    TaskPerformance {
        session: String,
        episode: usize,
        reward: f64,
        cumulative_reward: f64,
    },
    Error {
        #[serde(skip_serializing_if = "Option::is_none")]
        session: Option<String>,
        reason: String,
    },
}

impl Reply {
    fn error(session: Option<&str>, reason: impl Into<String>) -> Reply {
        Reply::Error {
            session: session.map(str::to_string),
            reason: reason.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Reply::Error { .. })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("replies serialize")
    }
}

struct Slot {
    session: Session,
    pending_since: Option<Instant>,
}

/// Hosts many sessions; all messages for one session are serialized on its
/// own lock, so distinct sessions proceed independently.
pub struct Service {
    config: Config,
    digest: String,
    table: Arc<ScoringTable>,
    timeout: Duration,
    next_id: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Mutex<Slot>>>>,
}

impl Service {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let table = Arc::new(config.load_table()?);
        Ok(Service {
            digest: config.digest(),
            timeout: Duration::from_secs_f64(config.service.task_timeout_secs),
            table,
            next_id: AtomicU64::new(0),
            sessions: Mutex::new(HashMap::new()),
            config,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("registry lock").len()
    }

    pub fn handle_line(&self, line: &str) -> String {
        self.handle_line_at(line, Instant::now())
    }

    /// Handles one line as if it arrived at `now`.
    pub fn handle_line_at(&self, line: &str, now: Instant) -> String {
        self.handle_at(line, now).to_line()
    }

    pub fn handle_at(&self, line: &str, now: Instant) -> Reply {
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return Reply::error(None, format!("malformed JSON: {e}")),
        };
        let Some(obj) = value.as_object() else {
            return Reply::error(None, "expected a JSON object");
        };
        let session = obj
            .get("session")
            .and_then(Value::as_str)
            .map(str::to_string);
        let session = session.as_deref();
        let kind = match obj.get("kind") {
            Some(Value::String(k)) => k.as_str(),
            Some(_) => return Reply::error(session, "`kind` must be a string"),
            None => return Reply::error(session, "missing `kind`"),
        };
        if REPLY_KINDS.contains(&kind) {
            return Reply::error(session, format!("`{kind}` is a reply kind"));
        }
        if !INBOUND_KINDS.contains(&kind) {
            return Reply::error(session, format!("unknown kind `{kind}`"));
        }
        let request: Request = match serde_json::from_value(value.clone()) {
            Ok(r) => r,
            Err(e) => return Reply::error(session, format!("invalid {kind}: {e}")),
        };
        self.dispatch(request, now)
    }

    fn slot(&self, id: &str) -> Option<Arc<Mutex<Slot>>> {
        self.sessions
            .lock()
            .expect("registry lock")
            .get(id)
            .cloned()
    }

    fn open(&self, seed: Option<u64>, preconfigured: Option<bool>) -> Result<Reply> {
        let n = self.next_id.fetch_add(1, Ordering::SeqCst) + 1;
        let id = format!("s{n}");
        let seed = seed.unwrap_or_else(|| self.config.service.base_seed.wrapping_add(n));
        let agent = Agent::with_prior(
            Arc::clone(&self.table),
            self.config.policy.clone(),
            preconfigured.unwrap_or(self.config.service.preconfigured),
            seed,
        )?;
        let session = Session::new(
            PartnerModel::new(self.config.partner_model.clone())?,
            agent,
            self.config.reward.clone(),
        )?;
        self.sessions.lock().expect("registry lock").insert(
            id.clone(),
            Arc::new(Mutex::new(Slot {
                session,
                pending_since: None,
            })),
        );
        Ok(Reply::OpenSession {
            session: id,
            config_digest: self.digest.clone(),
        })
    }

    fn dispatch(&self, request: Request, now: Instant) -> Reply {
        let id = match &request {
            Request::OpenSession {
                seed,
                preconfigured,
            } => {
                return self
                    .open(*seed, *preconfigured)
                    .unwrap_or_else(|e| Reply::error(None, e.to_string()))
            }
            Request::CloseSession { session }
            | Request::GazeEvent { session, .. }
            | Request::QueryStrategy { session, .. }
            | Request::TaskPerformance { session, .. } => session.clone(),
        };
        if let Request::CloseSession { .. } = request {
            let removed = self.sessions.lock().expect("registry lock").remove(&id);
            return match removed {
                Some(slot) => {
                    let slot = slot.lock().expect("session lock");
                    Reply::CloseSession {
                        session: id,
                        episodes: slot.session.log().len(),
                        cumulative_reward: slot.session.log().cumulative_reward(),
                    }
                }
                None => Reply::error(Some(&id), format!("unknown session `{id}`")),
            };
        }
        let Some(slot) = self.slot(&id) else {
            return Reply::error(Some(&id), format!("unknown session `{id}`"));
        };
        let mut slot = slot.lock().expect("session lock");
        self.apply(&mut slot, &id, request, now)
            .unwrap_or_else(|e| Reply::error(Some(&id), e.to_string()))
    }

    fn expired(&self, slot: &Slot, now: Instant) -> bool {
        slot.pending_since
            .is_some_and(|since| now.saturating_duration_since(since) >= self.timeout)
    }

    fn apply(&self, slot: &mut Slot, id: &str, request: Request, now: Instant) -> Result<Reply> {
        match request {
            Request::GazeEvent { target, .. } => {
                slot.session.ingest_gaze(target)?;
                let partner = slot.session.partner();
                Ok(Reply::GazeEvent {
                    session: id.to_string(),
                    target,
                    gaze: partner.gaze.class(partner.config()),
                })
            }
            Request::QueryStrategy { task, .. } => {
                if self.expired(slot, now) {
                    slot.session.expire_pending();
                    slot.pending_since = None;
                }
                let d = slot.session.query(&task)?;
                slot.pending_since = Some(now);
                Ok(Reply::StrategyResponse {
                    session: id.to_string(),
                    negation: d.action.negation,
                    hesitation: d.action.hesitation,
                    state: d.state,
                    triple: d.triple.labels(),
                })
            }
            Request::TaskPerformance {
                task,
                comprehension,
                enabledness,
                ..
            } => {
                if self.expired(slot, now) {
                    let rec = slot.session.expire_pending().expect("pending query");
                    slot.pending_since = None;
                    return Err(Error::TimedOut {
                        episode: rec.episode,
                    });
                }
                let tp = TaskPerformance {
                    comprehension,
                    enabledness,
                };
                let rec = slot.session.complete(Some(&task), &tp)?;
                slot.pending_since = None;
                Ok(Reply::TaskPerformance {
                    session: id.to_string(),
                    episode: rec.episode,
                    reward: rec.reward,
                    cumulative_reward: rec.cumulative_reward,
                })
            }
            Request::OpenSession { .. } | Request::CloseSession { .. } => {
                unreachable!("handled in dispatch")
            }
        }
    }
}
