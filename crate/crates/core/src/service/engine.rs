use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};

use super::config::{ClockMode, ConfigError, LoadedConfig, Procedure, ServiceConfig};
use super::exception::{ExceptionCode, ServiceException};
use crate::asset::{
    check_feasibility, execution_plan, AssetProfile, CapacityLedger, ExecutionStep, Infeasibility, ResultReference,
    ResultStore, END_FIELD,
};
use crate::notify::{EventKind, MessageType, NotificationHub, Payload};
use crate::semantic::{translate_request, translate_task, OntologySchema, SemanticStore};
use crate::swe::{decode_parameter_data, encode_parameter_data, CodecError, ParameterData, TextEncoding, Value};
use crate::task::{
    format_instant, request_report, status_report, Clock, Command, EncodedParameters, RequestKind, RequestStatus,
    ReservationReport, StatusReport, StoreError, SystemClock, Task, TaskKind, TaskState, TaskStore, TaskingRequest, TimerQueue,
    TransitionError, UpdateRejection, VirtualClock,
};
use crate::xml::{XmlWriter, SPS_NS};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Timer {
    Step { task_id: String, step: ExecutionStep },
    ReservationExpiry,
    Decision { request_id: String },
}

/// What a GetFeasibility, Submit or Reserve produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskingOutcome {
    pub request: TaskingRequest,
    pub task: Option<Task>,
    /// Only for GetFeasibility.
    pub feasible: Option<bool>,
    pub message: String,
    pub alternatives: Vec<EncodedParameters>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskCommand {
    Confirm,
    Cancel,
    Update { encoding: TextEncoding, values: String },
}

struct Assessment {
    asset: Option<String>,
    alternatives: Vec<ParameterData>,
    reason: String,
    only_capacity: bool,
}

/// All mutable service state. Callers serialize access.
pub struct Engine {
    config: ServiceConfig,
    procedures: BTreeMap<String, Procedure>,
    assets: Vec<AssetProfile>,
    ledger: CapacityLedger,
    store: TaskStore,
    results: ResultStore,
    hub: Arc<NotificationHub>,
    semantic: SemanticStore,
    clock: Arc<dyn Clock>,
    virtual_clock: Option<Arc<VirtualClock>>,
    timers: TimerQueue<Timer>,
}

fn codec_exception(e: CodecError) -> ServiceException {
    let texts = match &e {
        CodecError::ValidationFailure(r) => r.violations.iter().map(|v| v.to_string()).collect(),
        other => vec![other.to_string()],
    };
    ServiceException::new(ExceptionCode::ValidationFailure, "").with_texts(texts).at("taskingParameters")
}

fn latest_end(data: &ParameterData) -> Option<DateTime<Utc>> {
    data.blocks
        .iter()
        .filter_map(|b| b.get(END_FIELD).and_then(Value::as_time).map(|t| t.utc()))
        .max()
}

impl Engine {
    pub fn new(cfg: LoadedConfig, hub: Arc<NotificationHub>) -> Result<Self, ConfigError> {
        let (clock, virtual_clock): (Arc<dyn Clock>, _) = match cfg.service.clock.mode {
            ClockMode::Virtual => {
                let start = cfg
                    .service
                    .clock
                    .start
                    .ok_or_else(|| ConfigError::Invalid("virtual clock needs a start instant".into()))?;
                let vc = Arc::new(VirtualClock::new(start));
                (vc.clone(), Some(vc))
            }
            ClockMode::System => (Arc::new(SystemClock::default()), None),
        };
        let ledger = CapacityLedger::new(cfg.assets.iter().map(|a| (a.asset_id.clone(), a.capacity)));
        let semantic = SemanticStore::new(OntologySchema::sps()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Engine {
            store: TaskStore::new(Duration::seconds(cfg.service.reservation_lifetime_s as i64)),
            config: cfg.service,
            procedures: cfg.procedures,
            assets: cfg.assets,
            ledger,
            results: ResultStore::new(),
            hub,
            semantic,
            clock,
            virtual_clock,
            timers: TimerQueue::default(),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn is_virtual(&self) -> bool {
        self.virtual_clock.is_some()
    }

    pub fn procedures(&self) -> impl Iterator<Item = &Procedure> {
        self.procedures.values()
    }

    pub fn assets(&self) -> &[AssetProfile] {
        &self.assets
    }

    pub fn semantic(&self) -> &SemanticStore {
        &self.semantic
    }

    pub fn store(&self) -> &TaskStore {
        &self.store
    }

    pub fn ledger(&self) -> &CapacityLedger {
        &self.ledger
    }

    pub fn procedure(&self, id: &str) -> Result<&Procedure, ServiceException> {
        self.procedures.get(id).ok_or_else(|| {
            ServiceException::new(ExceptionCode::InvalidParameterValue, format!("unknown procedure '{id}'")).at("procedure")
        })
    }

    fn assets_for(&self, procedure_id: &str) -> Vec<&AssetProfile> {
        self.assets.iter().filter(|a| a.procedure_id == procedure_id).collect()
    }

    fn profile(&self, asset_id: &str) -> Option<&AssetProfile> {
        self.assets.iter().find(|a| a.asset_id == asset_id)
    }

    pub fn decode(&self, procedure_id: &str, enc: &TextEncoding, values: &str) -> Result<ParameterData, ServiceException> {
        let p = self.procedure(procedure_id)?;
        decode_parameter_data(&p.description, enc, values).map_err(codec_exception)
    }

    fn encode_all(&self, procedure_id: &str, data: &[ParameterData]) -> Vec<EncodedParameters> {
        let Some(p) = self.procedures.get(procedure_id) else { return Vec::new() };
        data.iter()
            .filter_map(|d| {
                encode_parameter_data(&p.description, d).ok().map(|values| EncodedParameters {
                    encoding: d.encoding.clone(),
                    values,
                })
            })
            .collect()
    }

    pub fn encode(&self, procedure_id: &str, data: &ParameterData) -> Option<EncodedParameters> {
        self.encode_all(procedure_id, std::slice::from_ref(data)).pop()
    }

    /// Runs feasibility on every asset of the procedure; the first feasible
    /// asset wins. `exclude` discounts one task's own capacity hold.
    fn assess(&self, procedure_id: &str, params: &ParameterData, exclude: Option<&Task>) -> Assessment {
        let assets = self.assets_for(procedure_id);
        if assets.is_empty() {
            return Assessment {
                asset: None,
                alternatives: Vec::new(),
                reason: format!("no asset serves procedure '{procedure_id}'"),
                only_capacity: false,
            };
        }
        let mut alternatives = Vec::new();
        let mut reasons = Vec::new();
        let mut only_capacity = true;
        for a in assets {
            let mut blocked = self.ledger.blocked(&a.asset_id);
            if let Some(t) = exclude {
                if t.asset_id == a.asset_id && self.ledger.holds(&a.asset_id, &t.id) {
                    blocked -= 1;
                }
            }
            match check_feasibility(a, procedure_id, params, blocked) {
                Ok(r) if r.feasible => {
                    return Assessment {
                        asset: r.asset_id,
                        alternatives: Vec::new(),
                        reason: r.reason,
                        only_capacity: false,
                    }
                }
                Ok(r) => {
                    if r.cause != Some(Infeasibility::CapacityExhausted) {
                        only_capacity = false;
                    }
                    if alternatives.is_empty() {
                        alternatives = r.alternatives;
                    }
                    reasons.push(format!("{}: {}", a.asset_id, r.reason));
                }
                Err(e) => {
                    only_capacity = false;
                    reasons.push(e.to_string());
                }
            }
        }
        Assessment {
            asset: None,
            alternatives,
            reason: reasons.join("; "),
            only_capacity,
        }
    }

    fn publish(&self, kind: EventKind, payload: Payload, now: DateTime<Utc>) {
        if let Err(e) = self.hub.publish(kind, payload, now) {
            log::error!("dropping {kind} event: {e}");
        }
    }

    fn task_report(&self, task: &Task, now: DateTime<Utc>) -> StatusReport {
        let data = self.results.result_references(&task.id).is_ok_and(|r| !r.is_empty());
        status_report(task, now, data)
    }

    fn publish_task(&self, kind: EventKind, task: &Task, now: DateTime<Utc>) {
        let status = self.task_report(task, now);
        let payload = match kind.message_type() {
            MessageType::StatusReport => Payload::Status(status),
            MessageType::ReservationReport => Payload::Reservation(ReservationReport {
                status,
                reservation_expiration: task.reservation_deadline().unwrap_or(now),
            }),
        };
        self.publish(kind, payload, now);
    }

    fn publish_request(&self, kind: EventKind, req: &TaskingRequest, now: DateTime<Utc>) {
        let alts = self.encode_all(&req.procedure_id, req.alternatives());
        self.publish(kind, Payload::Status(request_report(req, now, alts)), now);
    }

    fn sync_semantic(&mut self, request_ids: &[String], task_ids: &[String]) {
        let mut batch = Vec::new();
        for id in request_ids {
            if let Some(req) = self.store.request(id) {
                if let Some(p) = self.procedures.get(&req.procedure_id) {
                    batch.push((format!("request/{id}"), translate_request(req, &p.description)));
                }
            }
        }
        for id in task_ids {
            if let Some(task) = self.store.task(id) {
                let refs = self.results.result_references(id).unwrap_or_default();
                let updated = task.history().last().map_or(task.created_at, |h| h.at);
                batch.push((format!("task/{id}"), translate_task(task, &refs, updated)));
            }
        }
        self.semantic.replace_batch(batch);
    }

    /// Handles GetFeasibility, Submit and Reserve.
    pub fn tasking_request(
        &mut self,
        kind: RequestKind,
        procedure_id: &str,
        encoding: &TextEncoding,
        values: &str,
        feasibility_id: Option<&str>,
    ) -> Result<TaskingOutcome, ServiceException> {
        self.procedure(procedure_id)?;
        if let Some(fid) = feasibility_id {
            return Err(match self.store.task(fid) {
                Some(t) if t.kind == TaskKind::FeasibilityStudy => ServiceException::new(
                    ExceptionCode::FeasibilityIdNotReusable,
                    format!("{fid} identifies a feasibility study and cannot be used to task the sensor"),
                ),
                _ => ServiceException::new(
                    ExceptionCode::InvalidParameterValue,
                    format!("'{fid}' does not identify a feasibility study"),
                ),
            }
            .at("feasibilityID"));
        }
        let params = self.decode(procedure_id, encoding, values)?;
        let now = self.now();
        let req_id = self.store.new_request(kind, procedure_id, params, now).id.clone();
        let delay = self
            .assets_for(procedure_id)
            .iter()
            .filter_map(|a| a.decision_delay_s)
            .max()
            .filter(|_| kind != RequestKind::Feasibility);
        match delay {
            Some(d) => {
                self.timers.schedule(
                    now + Duration::seconds(d as i64),
                    Timer::Decision {
                        request_id: req_id.clone(),
                    },
                );
                let req = self.store.request(&req_id).unwrap().clone();
                self.publish_request(EventKind::TaskingRequestPending, &req, now);
                self.sync_semantic(std::slice::from_ref(&req_id), &[]);
                Ok(TaskingOutcome {
                    message: format!("decision due in {d} s"),
                    request: req,
                    task: None,
                    feasible: None,
                    alternatives: Vec::new(),
                })
            }
            None => self.decide(&req_id, now, true),
        }
    }

    fn decide(&mut self, req_id: &str, now: DateTime<Utc>, synchronous: bool) -> Result<TaskingOutcome, ServiceException> {
        let req = self
            .store
            .request(req_id)
            .cloned()
            .ok_or_else(|| ServiceException::new(ExceptionCode::UnknownRequest, req_id))?;
        if !synchronous && latest_end(&req.parameters).is_some_and(|end| now > end) {
            let r = self.store.request_mut(req_id).unwrap();
            let _ = r.expire("requested measurement interval passed before a decision was reached");
            let req = r.clone();
            self.publish_request(EventKind::TaskingRequestExpiration, &req, now);
            self.sync_semantic(&[req_id.to_string()], &[]);
            return Ok(TaskingOutcome {
                message: req.message.clone(),
                request: req,
                task: None,
                feasible: None,
                alternatives: Vec::new(),
            });
        }
        let a = self.assess(&req.procedure_id, &req.parameters, None);
        let fallback_asset = self
            .assets_for(&req.procedure_id)
            .first()
            .map_or_else(|| "none".to_string(), |p| p.asset_id.clone());

        if req.kind == RequestKind::Feasibility {
            let _ = self.store.request_mut(req_id).unwrap().accept();
            let feasible = a.asset.is_some();
            let asset = a.asset.clone().unwrap_or(fallback_asset);
            let task = self
                .store
                .create_task(req_id, feasible, &asset, now, &self.ledger)
                .map_err(|e| ServiceException::new(ExceptionCode::InvalidRequest, e.to_string()))?
                .clone();
            self.results.register(&task.id);
            let req = self.store.request(req_id).unwrap().clone();
            self.publish_request(EventKind::TaskingRequestAcceptance, &req, now);
            self.sync_semantic(&[req_id.to_string()], std::slice::from_ref(&task.id));
            let alternatives = self.encode_all(&req.procedure_id, &a.alternatives);
            return Ok(TaskingOutcome {
                request: req,
                task: Some(task),
                feasible: Some(feasible),
                message: a.reason,
                alternatives,
            });
        }

        let created = match &a.asset {
            Some(asset) => {
                let _ = self.store.request_mut(req_id).unwrap().accept();
                match self.store.create_task(req_id, true, asset, now, &self.ledger) {
                    Ok(t) => Some(t.clone()),
                    // The assessment above saw free capacity under the same lock.
                    Err(e) => return Err(self.store_exception(e)),
                }
            }
            None => {
                let _ = self
                    .store
                    .request_mut(req_id)
                    .unwrap()
                    .reject(a.alternatives.clone(), a.reason.clone());
                None
            }
        };

        let req = self.store.request(req_id).unwrap().clone();
        match created {
            Some(task) => {
                self.results.register(&task.id);
                self.publish_request(EventKind::TaskingRequestAcceptance, &req, now);
                let event = if req.kind == RequestKind::Reserve {
                    EventKind::TaskReservation
                } else {
                    EventKind::TaskSubmission
                };
                self.publish_task(event, &task, now);
                if let Some(deadline) = task.reservation_expiration {
                    self.timers.schedule(deadline, Timer::ReservationExpiry);
                } else {
                    self.start_execution(&task.id, now);
                }
                self.sync_semantic(&[req_id.to_string()], std::slice::from_ref(&task.id));
                let task = self.store.task(&task.id).cloned();
                Ok(TaskingOutcome {
                    request: req,
                    task,
                    feasible: None,
                    message: a.reason,
                    alternatives: Vec::new(),
                })
            }
            None => {
                self.publish_request(EventKind::TaskingRequestRejection, &req, now);
                self.sync_semantic(&[req_id.to_string()], &[]);
                let alternatives = self.encode_all(&req.procedure_id, req.alternatives());
                if synchronous && a.only_capacity {
                    return Err(ServiceException::new(ExceptionCode::CapacityExhausted, req.message.clone())
                        .at(req.id.clone()));
                }
                Ok(TaskingOutcome {
                    message: req.message.clone(),
                    request: req,
                    task: None,
                    feasible: None,
                    alternatives,
                })
            }
        }
    }

    fn start_execution(&mut self, task_id: &str, now: DateTime<Utc>) {
        let Some(task) = self.store.task(task_id) else { return };
        let Some(profile) = self.profile(&task.asset_id) else { return };
        match execution_plan(task, profile, now, self.config.seed) {
            Ok(steps) => {
                for s in steps {
                    self.timers.schedule(
                        s.at,
                        Timer::Step {
                            task_id: task_id.to_string(),
                            step: s.step,
                        },
                    );
                }
            }
            Err(e) => log::error!("cannot execute {task_id}: {e}"),
        }
    }

    fn result_document(&self, task: &Task, n: usize, at: DateTime<Utc>, partial: bool) -> String {
        let mut w = XmlWriter::new();
        w.start("sps:Result")
            .attr("xmlns:sps", SPS_NS)
            .attr("task", &task.id)
            .attr("n", &n.to_string())
            .attr("producedAt", &format_instant(at))
            .attr("partial", if partial { "true" } else { "false" });
        w.leaf("sps:procedure", &task.procedure_id);
        w.leaf("sps:asset", &task.asset_id);
        w.leaf("sps:coverage", &format!("{}%", if partial { task.progress } else { 100 }));
        if let Some(enc) = self.encode(&task.procedure_id, &task.parameters) {
            crate::swe::write_encoded_values(&mut w, &enc.encoding, &enc.values);
        }
        w.end();
        w.finish()
    }

    fn publish_result(&mut self, task_id: &str, now: DateTime<Utc>, partial: bool) -> Option<ResultReference> {
        let task = self.store.task(task_id)?.clone();
        let n = self.results.result_references(task_id).map_or(0, |r| r.len()) + 1;
        let doc = self.result_document(&task, n, now, partial);
        let description = if partial {
            format!("partial data from {} ({}% acquired)", task.asset_id, task.progress)
        } else {
            format!("data acquired by {}", task.asset_id)
        };
        Some(self.results.publish(task_id, now, partial, &description, doc))
    }

    /// Applies a terminal execution command, publishing data first.
    fn finish(&mut self, task_id: &str, command: Command, now: DateTime<Utc>) -> Result<Task, StoreError> {
        let state = self.store.task(task_id).map(|t| (t.state, t.progress));
        let completing = command == Command::ExecutionCompleted;
        let partial = !completing
            && matches!(state, Some((TaskState::InExecution, p)) if p >= 50);
        let t = self
            .store
            .apply(task_id, command, now, &crate::task::AcceptUpdates, &self.ledger)?;
        if completing || partial {
            self.publish_result(task_id, now, partial);
            self.publish_task(EventKind::DataPublication, &t.task, now);
        }
        for e in &t.events {
            self.publish_task(*e, &t.task, now);
        }
        Ok(t.task)
    }

    fn fire(&mut self, timer: Timer, now: DateTime<Utc>) {
        match timer {
            Timer::Step { task_id, step } => {
                let running = self
                    .store
                    .task(&task_id)
                    .is_some_and(|t| t.state == TaskState::InExecution);
                if !running {
                    return;
                }
                let outcome = match step {
                    ExecutionStep::Progress(p) => self.store.set_progress(&task_id, p).map(|_| ()),
                    ExecutionStep::Completed => self.finish(&task_id, Command::ExecutionCompleted, now).map(|_| ()),
                    ExecutionStep::Failed => self.finish(&task_id, Command::ExecutionFailed, now).map(|_| ()),
                };
                if let Err(e) = outcome {
                    log::error!("execution step on {task_id}: {e}");
                }
                let req = self.store.task(&task_id).map(|t| t.request_id.clone());
                self.sync_semantic(&req.into_iter().collect::<Vec<_>>(), &[task_id]);
            }
            Timer::ReservationExpiry => {
                let swept = crate::task::expiration_sweep(&mut self.store, now, &self.ledger);
                let ids: Vec<String> = swept.iter().map(|(t, _)| t.id.clone()).collect();
                for (task, event) in &swept {
                    self.publish_task(*event, task, now);
                }
                self.sync_semantic(&[], &ids);
            }
            Timer::Decision { request_id } => {
                let pending = self
                    .store
                    .request(&request_id)
                    .is_some_and(|r| r.status() == RequestStatus::Pending);
                if pending {
                    if let Err(e) = self.decide(&request_id, now, false) {
                        log::error!("deferred decision on {request_id}: {e}");
                    }
                }
            }
        }
    }

    fn fire_due(&mut self, now: DateTime<Utc>) {
        while let Some((_, timer)) = self.timers.pop_due(now) {
            self.fire(timer, now);
        }
    }

    /// Moves the virtual clock forward, firing every timer on the way at
    /// its own instant. `None` under the system clock.
    pub fn advance(&mut self, by: Duration) -> Option<DateTime<Utc>> {
        let vc = self.virtual_clock.clone()?;
        let target = vc.now() + by.max(Duration::zero());
        while let Some(at) = self.timers.next_due().filter(|at| *at <= target) {
            let now = vc.advance_to(at);
            self.fire_due(now);
        }
        Some(vc.advance_to(target))
    }

    /// Fires timers due at the current instant.
    pub fn tick(&mut self) {
        let now = self.now();
        self.fire_due(now);
    }

    fn known_task(&self, id: &str) -> Result<&Task, ServiceException> {
        self.store
            .task(id)
            .ok_or_else(|| ServiceException::new(ExceptionCode::UnknownTask, format!("unknown task '{id}'")).at("task"))
    }

    /// Confirm, Cancel or Update.
    pub fn command(&mut self, task_id: &str, cmd: TaskCommand) -> Result<Task, ServiceException> {
        let now = self.now();
        let task = self.known_task(task_id)?.clone();
        let result = match cmd {
            TaskCommand::Confirm => self
                .store
                .apply(task_id, Command::Confirm, now, &crate::task::AcceptUpdates, &self.ledger)
                .map(|t| {
                    for e in &t.events {
                        self.publish_task(*e, &t.task, now);
                    }
                    self.start_execution(task_id, now);
                    t.task
                }),
            TaskCommand::Cancel => self.finish(task_id, Command::Cancel, now),
            TaskCommand::Update { encoding, values } => {
                let params = self.decode(&task.procedure_id, &encoding, &values)?;
                let desc = &self.procedures[&task.procedure_id].description;
                let check = |t: &Task, p: &ParameterData| -> Result<(), UpdateRejection> {
                    if p.blocks.len() != t.parameters.blocks.len() {
                        return Err(UpdateRejection {
                            reason: format!(
                                "update carries {} block(s), task has {}",
                                p.blocks.len(),
                                t.parameters.blocks.len()
                            ),
                            alternatives: Vec::new(),
                        });
                    }
                    for (old, new) in t.parameters.blocks.iter().zip(&p.blocks) {
                        for f in desc.fields() {
                            if !desc.is_updatable(&f.name) && old.get(&f.name) != new.get(&f.name) {
                                return Err(UpdateRejection {
                                    reason: format!(
                                        "field '{}' is not updatable (updatable: {})",
                                        f.name,
                                        desc.updatable_field_names().join(", ")
                                    ),
                                    alternatives: Vec::new(),
                                });
                            }
                        }
                    }
                    let a = self.assess(&t.procedure_id, p, Some(t));
                    match a.asset {
                        Some(ref asset) if *asset == t.asset_id => Ok(()),
                        Some(asset) => Err(UpdateRejection {
                            reason: format!("only feasible on {asset}, task is bound to {}", t.asset_id),
                            alternatives: Vec::new(),
                        }),
                        None => Err(UpdateRejection {
                            reason: a.reason,
                            alternatives: a.alternatives,
                        }),
                    }
                };
                let applied = {
                    let verdict = check(&task, &params);
                    let fixed = move |_: &Task, _: &ParameterData| verdict.clone();
                    self.store.apply(task_id, Command::Update(params), now, &fixed, &self.ledger)
                };
                applied.map(|t| {
                    for e in &t.events {
                        self.publish_task(*e, &t.task, now);
                    }
                    t.task
                })
            }
        };
        let out = result.map_err(|e| self.store_exception(e))?;
        self.sync_semantic(std::slice::from_ref(&out.request_id), std::slice::from_ref(&out.id));
        Ok(out)
    }

    fn store_exception(&self, e: StoreError) -> ServiceException {
        match e {
            StoreError::UnknownTask(id) => {
                ServiceException::new(ExceptionCode::UnknownTask, format!("unknown task '{id}'")).at("task")
            }
            StoreError::UnknownRequest(id) => {
                ServiceException::new(ExceptionCode::UnknownRequest, format!("unknown request '{id}'")).at("request")
            }
            StoreError::Transition(TransitionError::UpdateNotFeasible { task, rejection }) => {
                let procedure = self.store.task(&task).map(|t| t.procedure_id.clone()).unwrap_or_default();
                ServiceException::new(ExceptionCode::UpdateNotFeasible, rejection.reason.clone())
                    .at(task)
                    .with_alternatives(self.encode_all(&procedure, &rejection.alternatives))
            }
            StoreError::Transition(t @ TransitionError::IllegalTransition { .. }) => {
                let task = match &t {
                    TransitionError::IllegalTransition { task, .. } => task.clone(),
                    _ => unreachable!(),
                };
                ServiceException::new(ExceptionCode::IllegalTransition, t.to_string()).at(task)
            }
            StoreError::Transition(t) => ServiceException::new(ExceptionCode::IllegalTransition, t.to_string()),
            StoreError::Capacity(c) => ServiceException::new(ExceptionCode::CapacityExhausted, c.to_string()),
            StoreError::Rejected(r) => ServiceException::new(ExceptionCode::InvalidRequest, r.to_string()),
        }
    }

    pub fn task(&self, id: &str) -> Result<&Task, ServiceException> {
        self.known_task(id)
    }

    /// Status of a task, or of a request when `id` names one.
    pub fn status(&self, id: &str) -> Result<StatusReport, ServiceException> {
        let now = self.now();
        if let Some(t) = self.store.task(id) {
            return Ok(self.task_report(t, now));
        }
        if let Some(r) = self.store.request(id) {
            let alts = self.encode_all(&r.procedure_id, r.alternatives());
            return Ok(request_report(r, now, alts));
        }
        let code = if id.starts_with("req_") {
            ExceptionCode::UnknownRequest
        } else {
            ExceptionCode::UnknownTask
        };
        Err(ServiceException::new(code, format!("unknown task or request '{id}'")).at(id))
    }

    pub fn result_references(&self, task_id: &str) -> Result<Vec<ResultReference>, ServiceException> {
        self.known_task(task_id)?;
        Ok(self.results.result_references(task_id).unwrap_or_default())
    }

    pub fn result_content(&self, task_id: &str, n: usize) -> Option<String> {
        self.results.document(task_id, n).map(str::to_string)
    }

    /// Debug rendering of all stored state, for before/after comparisons.
    pub fn fingerprint(&self) -> String {
        format!(
            "{:?}\n{:?}\n{:?}\n{}\n{}",
            self.store,
            self.results,
            self.timers,
            self.semantic.base().dump(),
            self.hub.published()
        )
    }
}
