//! Local HTTP service for the human-observer mode.
//!
//! The client only ever sees two brightness values per trial. Basis
//! settings, A-side clicks and the cloner angle stay on the server, and
//! per-term results are withheld until the session is complete so that a
//! client cannot infer the active setting from a running tally.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bellamp_core::analysis::{chsh, BellEstimate, ChshSettings};
use bellamp_core::detection::Verdict;
use bellamp_core::experiment::{generate_trial, CoincidenceTable, PendingTrial, RunConfig};
use bellamp_core::rng::derive_seed;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub run: RunConfig,
    pub settings: ChshSettings,
    /// Minimum time between an answer and the next trial being handed out.
    pub pacing: Duration,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    cfg: ServiceConfig,
    sessions: Mutex<HashMap<String, Session>>,
    created: AtomicU64,
}

struct Session {
    run: RunConfig,
    next_trial: u64,
    pending: Option<PendingTrial>,
    table: CoincidenceTable,
    answered: u64,
    last_answer: Option<Instant>,
}

impl Session {
    fn complete(&self) -> bool {
        self.next_trial >= self.run.total_trials()
    }
}

/// Answer labels as shown on the page: left is the `+` output of the PBS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Judgment {
    Left,
    Right,
    Inconclusive,
}

impl From<Judgment> for Verdict {
    fn from(j: Judgment) -> Verdict {
        match j {
            Judgment::Left => Verdict::Plus,
            Judgment::Right => Verdict::Minus,
            Judgment::Inconclusive => Verdict::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionCreated {
    pub session_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialView {
    pub trial_id: u64,
    pub left_brightness: f64,
    pub right_brightness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Answer {
    pub trial_id: u64,
    pub verdict: Judgment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermView {
    pub label: String,
    pub e: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateView {
    pub terms: Vec<TermView>,
    pub s: f64,
    pub sigma_s: f64,
    pub success_probability: Option<f64>,
    pub violates_local_bound: bool,
}

impl From<&BellEstimate> for EstimateView {
    fn from(b: &BellEstimate) -> Self {
        EstimateView {
            terms: b
                .terms
                .iter()
                .map(|t| TermView {
                    label: t.label.clone(),
                    e: t.value,
                    sigma: t.sigma,
                })
                .collect(),
            s: b.s,
            sigma_s: b.sigma_s,
            success_probability: b.success_probability,
            violates_local_bound: b.violates_local_bound(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsView {
    pub answered: u64,
    pub total_trials: u64,
    pub complete: bool,
    /// Present once the session is complete.
    pub estimate: Option<EstimateView>,
    /// Why the estimate is missing on a complete session.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": msg.into() }))).into_response()
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("session {id} not found"))
}

impl AppState {
    pub fn new(cfg: ServiceConfig) -> anyhow::Result<Self> {
        cfg.run.validate()?;
        Ok(AppState {
            inner: Arc::new(Inner {
                cfg,
                sessions: Mutex::new(HashMap::new()),
                created: AtomicU64::new(0),
            }),
        })
    }

    /// The first session runs on the configured seed, later ones on derived
    /// seeds.
    fn create_session(&self) -> String {
        let k = self.inner.created.fetch_add(1, Ordering::Relaxed);
        let base = &self.inner.cfg.run;
        let run = RunConfig {
            seed: if k == 0 { base.seed } else { derive_seed(base.seed, k) },
            ..base.clone()
        };
        let id = format!("s{k}");
        let session = Session {
            table: CoincidenceTable::for_settings(&run.schedule.settings),
            run,
            next_trial: 0,
            pending: None,
            answered: 0,
            last_answer: None,
        };
        self.inner.sessions.lock().expect("poisoned").insert(id.clone(), session);
        id
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", get(new_session))
        .route("/session/{id}/trial", get(next_trial))
        .route("/session/{id}/answer", post(answer))
        .route("/session/{id}/results", get(results))
        .with_state(state)
}

async fn new_session(State(state): State<AppState>) -> Json<SessionCreated> {
    Json(SessionCreated {
        session_id: state.create_session(),
    })
}

fn view(p: &PendingTrial) -> TrialView {
    TrialView {
        trial_id: p.trial_id,
        left_brightness: p.i_plus.clamp(0.0, 1.0),
        right_brightness: p.i_minus.clamp(0.0, 1.0),
    }
}

async fn next_trial(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    let wait = {
        let sessions = state.inner.sessions.lock().expect("poisoned");
        let Some(s) = sessions.get(&id) else {
            return not_found(&id);
        };
        match (s.pending, s.last_answer) {
            (None, Some(t)) => state.inner.cfg.pacing.saturating_sub(t.elapsed()),
            _ => Duration::ZERO,
        }
    };
    if !wait.is_zero() {
        tokio::time::sleep(wait).await;
    }
    let mut sessions = state.inner.sessions.lock().expect("poisoned");
    let Some(s) = sessions.get_mut(&id) else {
        return not_found(&id);
    };
    if let Some(p) = &s.pending {
        return Json(view(p)).into_response();
    }
    if s.complete() {
        return error(StatusCode::GONE, "session complete");
    }
    let p = generate_trial(&s.run, s.next_trial);
    s.pending = Some(p);
    Json(view(&p)).into_response()
}

async fn answer(State(state): State<AppState>, Path(id): Path<String>, Json(ans): Json<Answer>) -> Response {
    let mut sessions = state.inner.sessions.lock().expect("poisoned");
    let Some(s) = sessions.get_mut(&id) else {
        return not_found(&id);
    };
    match s.pending {
        Some(p) if p.trial_id == ans.trial_id => {
            s.table.entries[p.setting_index].1.record(p.a_click, ans.verdict.into());
            s.answered += 1;
            s.next_trial += 1;
            s.pending = None;
            s.last_answer = Some(Instant::now());
            Json(serde_json::json!({ "status": "accepted" })).into_response()
        }
        _ if ans.trial_id < s.next_trial => {
            (StatusCode::CONFLICT, Json(serde_json::json!({ "status": "duplicate" }))).into_response()
        }
        pending => error(
            StatusCode::CONFLICT,
            format!(
                "stale trial {}: pending trial is {}",
                ans.trial_id,
                pending.map_or("none".to_string(), |p| p.trial_id.to_string())
            ),
        ),
    }
}

async fn results(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    let sessions = state.inner.sessions.lock().expect("poisoned");
    let Some(s) = sessions.get(&id) else {
        return not_found(&id);
    };
    let complete = s.complete();
    let (estimate, err) = if complete {
        match chsh(&s.table, &state.inner.cfg.settings) {
            Ok(b) => (Some(EstimateView::from(&b)), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    Json(ResultsView {
        answered: s.answered,
        total_trials: s.run.total_trials(),
        complete,
        estimate,
        error: err,
    })
    .into_response()
}

/// Serves until the process is stopped.
pub async fn serve(state: AppState, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("observer service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
