use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::OpenOptions;
use std::io::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use parking_lot::{Mutex, RwLock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uuid::Uuid;

use super::protocol::decode_image;
use super::{
    Clock, ClientMessage, CreateSessionRequest, ServerMessage, ServiceConfig, ServiceError,
    SessionMetrics, SessionMode,
};
use crate::dialogue::{DialogueEngine, DialogueError, DialogueState, Transcript};
use crate::evaluation::{
    recommendation_effect, session_seed, ImpressionResponse, MetricsAccumulator, SCALE_MAX,
    SCALE_MIN,
};
use crate::multimodal::SystemAction;
use crate::personality::{
    EstimationHandle, EstimationStatus, Level, SimulatedEstimator, TraitEstimator, TraitLabels,
    CAPTURES_PER_PROFILE,
};
use crate::spots::SpotId;

struct Session {
    id: Uuid,
    mode: SessionMode,
    created_at_ms: u64,
    last_activity_ms: u64,
    state: DialogueState,
    transcript: Transcript,
    /// The most recent system turn, replayed on `start`.
    last_actions: Vec<SystemAction>,
    captures: Vec<Vec<u8>>,
    estimation: Option<EstimationHandle>,
    pre_intent: BTreeMap<SpotId, u8>,
    post_intent: Option<u8>,
    impressions: Option<ImpressionResponse>,
    bound: bool,
    logged: bool,
}

impl Session {
    fn emit(&mut self, actions: Vec<SystemAction>) -> Vec<ServerMessage> {
        if actions.is_empty() {
            return Vec::new();
        }
        let mut out: Vec<ServerMessage> = actions.iter().map(ServerMessage::action).collect();
        for a in &actions {
            self.transcript.record_system(a);
        }
        self.last_actions = actions;
        out.push(self.phase_message());
        out
    }

    fn phase_message(&self) -> ServerMessage {
        ServerMessage::Phase {
            phase: self.state.phase,
            turn: self.state.turn_count,
        }
    }

    fn refresh_estimate(&mut self) {
        if let Some(handle) = &mut self.estimation {
            if let EstimationStatus::Ready(profile) = handle.poll() {
                self.state.deliver_estimate(profile);
            }
        }
    }

    fn effect(&self) -> Option<i8> {
        let pre = *self.pre_intent.get(self.state.recommended.as_ref()?)?;
        recommendation_effect(pre, self.post_intent?).ok()
    }
}

/// Live sessions keyed by random 128-bit ids.
///
/// Create, dispatch, tick and expire may be called concurrently from any
/// thread. Work on one session is serialized by its lock, and messages come
/// back in emission order.
#[derive(Debug)]
pub struct SessionRegistry {
    engine: DialogueEngine,
    estimator: Option<Arc<dyn TraitEstimator>>,
    config: ServiceConfig,
    clock: Arc<dyn Clock>,
    sessions: RwLock<HashMap<Uuid, Arc<Mutex<Session>>>>,
    tombstones: Mutex<HashSet<Uuid>>,
    persona_count: AtomicU64,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("phase", &self.state.phase)
            .finish_non_exhaustive()
    }
}

impl SessionRegistry {
    /// `estimator` serves live-mode captures; without one, live sessions
    /// run on the deadline fallback.
    pub fn new(
        engine: DialogueEngine,
        estimator: Option<Arc<dyn TraitEstimator>>,
        config: ServiceConfig,
        clock: Arc<dyn Clock>,
    ) -> Self {
        Self {
            engine,
            estimator,
            config,
            clock,
            sessions: RwLock::new(HashMap::new()),
            tombstones: Mutex::new(HashSet::new()),
            persona_count: AtomicU64::new(0),
        }
    }

    pub fn engine(&self) -> &DialogueEngine {
        &self.engine
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses a session id; anything malformed cannot name a session.
    pub fn parse_id(raw: &str) -> Result<Uuid, ServiceError> {
        Uuid::parse_str(raw).map_err(|_| ServiceError::NotFound(raw.to_string()))
    }

    /// Registers a session and returns its id with the greeting messages.
    /// Invalid pairs create nothing.
    pub fn create_session(
        &self,
        request: &CreateSessionRequest,
    ) -> Result<(Uuid, Vec<ServerMessage>), ServiceError> {
        let id = Uuid::new_v4();
        let (state, greeting) = self
            .engine
            .start_session(id.to_string(), request.preselected.clone())
            .map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let estimation = match request.mode {
            SessionMode::Persona => Some(self.persona_estimation()?),
            SessionMode::Live => None,
        };
        let now = self.clock.now_ms();
        let mut session = Session {
            id,
            mode: request.mode,
            created_at_ms: now,
            last_activity_ms: now,
            state,
            transcript: Transcript::new(),
            last_actions: Vec::new(),
            captures: Vec::new(),
            estimation,
            pre_intent: BTreeMap::new(),
            post_intent: None,
            impressions: None,
            bound: false,
            logged: false,
        };
        let messages = session.emit(vec![greeting]);
        self.sessions
            .write()
            .insert(id, Arc::new(Mutex::new(session)));
        Ok((id, messages))
    }

    fn persona_estimation(&self) -> Result<EstimationHandle, ServiceError> {
        let n = self.persona_count.fetch_add(1, Ordering::Relaxed);
        let seed = session_seed(self.config.seed, n as usize);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = TraitLabels::new(std::array::from_fn(|_| {
            if rng.random_bool(0.5) {
                Level::High
            } else {
                Level::Low
            }
        }));
        let estimator = SimulatedEstimator::new(truth, self.config.noise.reseeded(seed))
            .map_err(|e| ServiceError::Invalid(e.to_string()))?
            .with_latency(Duration::from_millis(self.config.persona_capture_latency_ms));
        Ok(EstimationHandle::spawn(
            Arc::new(estimator),
            vec![vec![0u8]; CAPTURES_PER_PROFILE],
            self.config.threshold,
        ))
    }

    fn lookup(&self, id: Uuid) -> Result<Arc<Mutex<Session>>, ServiceError> {
        if let Some(s) = self.sessions.read().get(&id) {
            return Ok(Arc::clone(s));
        }
        if self.tombstones.lock().contains(&id) {
            Err(ServiceError::Gone(id.to_string()))
        } else {
            Err(ServiceError::NotFound(id.to_string()))
        }
    }

    /// Routes one client message and returns the replies in order.
    pub fn dispatch(
        &self,
        id: Uuid,
        message: ClientMessage,
    ) -> Result<Vec<ServerMessage>, ServiceError> {
        let handle = self.lookup(id)?;
        let mut s = handle.lock();
        let now = self.clock.now_ms();
        s.last_activity_ms = now;
        let clock_ms = now.saturating_sub(s.created_at_ms);
        let out = match message {
            ClientMessage::Start => {
                let mut out: Vec<ServerMessage> =
                    s.last_actions.iter().map(ServerMessage::action).collect();
                out.push(s.phase_message());
                out
            }
            ClientMessage::UserText { text } => {
                s.refresh_estimate();
                let phase = s.state.phase;
                let (next, actions) = self
                    .engine
                    .advance(&s.state, &text, clock_ms)
                    .map_err(|e| dialogue_error(id, e))?;
                s.transcript.record_user(phase, &text);
                s.state = next;
                let mut out = s.emit(actions);
                if out.is_empty() {
                    // Parked waiting for the estimate; tell the client.
                    out.push(s.phase_message());
                }
                out
            }
            ClientMessage::Capture { image } => {
                let bytes = decode_image(&image)?;
                self.take_capture(&mut s, bytes)?;
                Vec::new()
            }
            ClientMessage::PreIntent { spot_id, value } => {
                let (a, b) = &s.state.preselected;
                if spot_id != *a && spot_id != *b {
                    return Err(ServiceError::Invalid(format!(
                        "{spot_id} is not one of the preselected spots"
                    )));
                }
                check_intent(value)?;
                if s.impressions.is_some() {
                    return Err(ServiceError::Protocol("questionnaire already submitted".into()));
                }
                s.pre_intent.insert(spot_id, value);
                Vec::new()
            }
            ClientMessage::Questionnaire { items, post_intent } => {
                if !s.state.is_closed() {
                    return Err(ServiceError::Protocol(
                        "questionnaire is accepted once the dialogue has closed".into(),
                    ));
                }
                if s.impressions.is_some() {
                    return Err(ServiceError::Protocol("questionnaire already submitted".into()));
                }
                let response = ImpressionResponse::new(items)
                    .map_err(|e| ServiceError::Invalid(e.to_string()))?;
                if let Some(post) = post_intent {
                    check_intent(post)?;
                    let has_pre = s
                        .state
                        .recommended
                        .as_ref()
                        .is_some_and(|r| s.pre_intent.contains_key(r));
                    if !has_pre {
                        return Err(ServiceError::Protocol(
                            "post_intent needs a pre_intent for the recommended spot".into(),
                        ));
                    }
                }
                s.impressions = Some(response);
                s.post_intent = post_intent;
                vec![ServerMessage::Metrics(metrics_of(&s))]
            }
        };
        self.log_if_closed(&mut s);
        Ok(out)
    }

    /// Like [`dispatch`](Self::dispatch) on raw JSON, with failures turned
    /// into error messages for the client.
    pub fn dispatch_json(&self, id: Uuid, text: &str) -> Vec<ServerMessage> {
        ClientMessage::from_json(text)
            .and_then(|m| self.dispatch(id, m))
            .unwrap_or_else(|e| vec![e.to_message()])
    }

    fn take_capture(&self, s: &mut Session, bytes: Vec<u8>) -> Result<(), ServiceError> {
        if s.mode == SessionMode::Persona {
            return Err(ServiceError::Protocol("persona-mode sessions take no captures".into()));
        }
        if s.captures.len() >= CAPTURES_PER_PROFILE {
            return Err(ServiceError::Protocol(format!(
                "all {CAPTURES_PER_PROFILE} captures already received"
            )));
        }
        let Some(estimator) = &self.estimator else {
            return Err(ServiceError::Protocol("no estimator is configured".into()));
        };
        s.captures.push(bytes);
        if s.captures.len() == CAPTURES_PER_PROFILE {
            s.estimation = Some(EstimationHandle::spawn(
                Arc::clone(estimator),
                s.captures.clone(),
                self.config.threshold,
            ));
        }
        Ok(())
    }

    /// Advances a session parked at the branch point if its estimate has
    /// arrived or its deadline has passed. Idle sessions are left alone.
    pub fn tick(&self, id: Uuid) -> Result<Vec<ServerMessage>, ServiceError> {
        let handle = self.lookup(id)?;
        let mut s = handle.lock();
        s.refresh_estimate();
        let clock_ms = self.clock.now_ms().saturating_sub(s.created_at_ms);
        let (next, actions) = self
            .engine
            .tick(&s.state, clock_ms)
            .map_err(|e| dialogue_error(id, e))?;
        s.state = next;
        Ok(s.emit(actions))
    }

    /// Closes and releases every session idle past the deadline. Their ids
    /// answer `Gone` from then on.
    pub fn expire_idle(&self) -> Vec<Uuid> {
        let now = self.clock.now_ms();
        let candidates: Vec<(Uuid, Arc<Mutex<Session>>)> = self
            .sessions
            .read()
            .iter()
            .map(|(id, s)| (*id, Arc::clone(s)))
            .collect();
        let mut expired = Vec::new();
        for (id, handle) in candidates {
            let mut s = handle.lock();
            if now.saturating_sub(s.last_activity_ms) < self.config.idle_timeout_ms {
                continue;
            }
            s.state.phase = crate::dialogue::Phase::Closing;
            s.estimation = None;
            self.log_if_closed(&mut s);
            drop(s);
            self.tombstones.lock().insert(id);
            self.sessions.write().remove(&id);
            expired.push(id);
        }
        expired
    }

    pub fn metrics(&self, id: Uuid) -> Result<SessionMetrics, ServiceError> {
        Ok(metrics_of(&self.lookup(id)?.lock()))
    }

    pub fn state(&self, id: Uuid) -> Result<DialogueState, ServiceError> {
        Ok(self.lookup(id)?.lock().state.clone())
    }

    pub fn transcript(&self, id: Uuid) -> Result<Transcript, ServiceError> {
        Ok(self.lookup(id)?.lock().transcript.clone())
    }

    /// Whether the session's estimate has been computed; `None` before any
    /// estimation has started.
    pub fn estimation_status(&self, id: Uuid) -> Result<Option<EstimationStatus>, ServiceError> {
        let handle = self.lookup(id)?;
        let mut s = handle.lock();
        Ok(s.estimation.as_mut().map(EstimationHandle::poll))
    }

    /// Claims the single transport slot of a session until the returned
    /// binding is dropped.
    pub fn bind(self: &Arc<Self>, id: Uuid) -> Result<TransportBinding, ServiceError> {
        let handle = self.lookup(id)?;
        let mut s = handle.lock();
        if s.bound {
            return Err(ServiceError::AlreadyBound(id.to_string()));
        }
        s.bound = true;
        Ok(TransportBinding {
            registry: Arc::clone(self),
            id,
        })
    }

    fn log_if_closed(&self, s: &mut Session) {
        if s.logged || !s.state.is_closed() {
            return;
        }
        s.logged = true;
        let Some(path) = &self.config.transcript_log else {
            return;
        };
        // Logging is best effort; a full disk must not take sessions down.
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(path) {
            let _ = write!(f, "# session {}\n{}", s.id, s.transcript.render());
        }
    }
}

/// Holds a session's transport slot; dropping it frees the slot.
#[derive(Debug)]
pub struct TransportBinding {
    registry: Arc<SessionRegistry>,
    id: Uuid,
}

impl TransportBinding {
    pub fn id(&self) -> Uuid {
        self.id
    }
}

impl Drop for TransportBinding {
    fn drop(&mut self) {
        // Release the map lock before taking the session lock.
        let session = self.registry.sessions.read().get(&self.id).cloned();
        if let Some(s) = session {
            s.lock().bound = false;
        }
    }
}

fn check_intent(value: u8) -> Result<(), ServiceError> {
    if (SCALE_MIN..=SCALE_MAX).contains(&value) {
        Ok(())
    } else {
        Err(ServiceError::Invalid(format!("intent {value} is outside 1..=7")))
    }
}

fn dialogue_error(id: Uuid, e: DialogueError) -> ServiceError {
    match e {
        DialogueError::SessionClosed => ServiceError::Gone(id.to_string()),
        other => ServiceError::Invalid(other.to_string()),
    }
}

fn metrics_of(s: &Session) -> SessionMetrics {
    let recommended = s.state.recommended.clone();
    let pre_intent = recommended.as_ref().and_then(|r| s.pre_intent.get(r).copied());
    let effect = s.effect();
    let report = s.impressions.as_ref().and_then(|r| {
        let mut acc = MetricsAccumulator::default();
        acc.add_impression(r);
        if let Some(e) = effect {
            acc.add_effect(e);
        }
        acc.add_session();
        acc.report().ok()
    });
    SessionMetrics {
        session_id: s.id.to_string(),
        phase: s.state.phase,
        recommended,
        pre_intent,
        post_intent: s.post_intent,
        effect,
        impression_total: s.impressions.as_ref().map(ImpressionResponse::total),
        report,
    }
}
