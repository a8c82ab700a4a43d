//! Discrete-period execution of a chronology over many things.
//!
//! Each created thing is a [`Token`] that walks the chronology. Timed events
//! occupy it for whole periods; zero-duration events fire immediately. An
//! event that sets a state flag is gated: the thing waits in the station's
//! queue (or, when there is no room, at a release stage) until the flag is
//! clear, then takes the flag and passes.

mod config;
mod guard;
mod table;
mod trace;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::eventing::{flag_path, Chronology, Event, FlagKey};
use crate::model::{Model, QueueCapacity, Resolved, Scalar, StageKey, StageKind};

pub use config::{Arrival, SimConfig};
pub use guard::{evaluate_guard, GuardState};
pub use table::{schedule_table, ScheduleRow, ScheduleTable};
pub use trace::{ActiveRecord, EventInfo, FlagChange, Firing, GuardRecord, InstanceInfo, Move, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("CONFIG_MISMATCH: {0}")]
    ConfigMismatch(String),
    #[error("ZERO_DURATION_CYCLE: instance {instance} loops through zero-duration events {}", .events.join(" -> "))]
    ZeroDurationCycle { instance: u32, events: Vec<String> },
    #[error("HORIZON_EXCEEDED: cannot step past period {0}")]
    HorizonExceeded(u32),
    #[error("MISSING_ATTRIBUTE: instance {instance} has no integer `{attribute}` for guard `{guard}`")]
    MissingAttribute { instance: u32, guard: String, attribute: String },
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::ConfigMismatch(_) => "CONFIG_MISMATCH",
            SimError::ZeroDurationCycle { .. } => "ZERO_DURATION_CYCLE",
            SimError::HorizonExceeded(_) => "HORIZON_EXCEEDED",
            SimError::MissingAttribute { .. } => "MISSING_ATTRIBUTE",
        }
    }
}

/// Where a token is.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Location {
    Stage(StageKey),
    Queue(StageKey),
    ReleaseBuffer(StageKey),
    Sink,
}

/// A thing at run time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub instance: u32,
    pub sort: String,
    pub attributes: BTreeMap<String, Scalar>,
    pub location: Location,
}

/// Countdown of a timed event in progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timer {
    pub duration: u32,
    pub remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateFlag {
    pub name: String,
    pub value: bool,
}

/// FIFO waiting line in front of a station, attached to a Receive stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueBuffer {
    pub stage: StageKey,
    pub capacity: QueueCapacity,
    pub contents: VecDeque<u32>,
}

impl QueueBuffer {
    fn has_room(&self) -> bool {
        self.capacity.admits(self.contents.len())
    }
}

/// What one call to [`SimState::step`] did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepResult {
    pub period: u32,
    pub fired: Vec<(u32, String)>,
    pub moves: Vec<Move>,
    pub flag_changes: Vec<FlagChange>,
    pub created: u32,
    pub sunk: u32,
    /// Tokens not at SINK before and after the step.
    pub live_before: u32,
    pub live_after: u32,
}

#[derive(Debug, Clone)]
struct Waiter {
    instance: u32,
    since: u32,
    rank: usize,
}

#[derive(Debug, Clone)]
struct Station {
    flag: FlagKey,
    path: String,
    value: bool,
    holder: Option<u32>,
    queue: Option<QueueBuffer>,
    waiters: Vec<Waiter>,
}

#[derive(Debug, Clone)]
struct Runner {
    token: Token,
    current: Option<(usize, Timer)>,
    /// The gated event this token waits to pass.
    waiting: Option<usize>,
    last_anchor: Option<StageKey>,
    /// Zero-duration events fired since the last timed one.
    zero_seen: Vec<usize>,
    /// Created but not yet placed anywhere.
    fresh: bool,
}

/// A running simulation. Single owner; `step` and `run` mutate it.
#[derive(Debug, Clone)]
pub struct SimState {
    model: Model,
    chron: Chronology,
    config: SimConfig,
    period: u32,
    runners: Vec<Runner>,
    stations: Vec<Station>,
    /// Per chronology event: the station whose flag it sets or clears.
    effect_station: Vec<Option<(usize, bool)>>,
    guards: GuardState,
    sort: String,
    trace: Trace,
}

impl SimState {
    /// Checks the configuration, creates the period-0 arrivals and routes
    /// them through any leading zero-duration events.
    pub fn new(model: &Model, chron: &Chronology, config: SimConfig) -> Result<SimState, SimError> {
        let mismatch = |m: String| Err(SimError::ConfigMismatch(m));
        if config.horizon == 0 {
            return mismatch("horizon must be at least 1".into());
        }
        let fp = model.fingerprint();
        for ev in chron.events() {
            if ev.model_fingerprint != fp {
                return mismatch(format!("event `{}` was carved from a different model", ev.id));
            }
            if ev.anchor.is_none() {
                return mismatch(format!("event `{}` has no stage to run at", ev.id));
            }
        }
        for (gid, script) in &config.scripts {
            let Some(g) = model.guard(gid) else {
                return mismatch(format!("script for undeclared guard `{gid}`"));
            };
            if script.is_empty() {
                return mismatch(format!("script for guard `{gid}` is empty"));
            }
            let outcomes = g.outcomes();
            if let Some(bad) = script.iter().find(|o| !outcomes.contains(o)) {
                return mismatch(format!("`{bad}` is not an outcome of guard `{gid}`"));
            }
        }
        if let Some(s) = &config.sort {
            if !model.sorts.is_empty() && model.sort(s).is_none() {
                return mismatch(format!("undeclared sort `{s}`"));
            }
        }

        let mut stations: Vec<Station> = Vec::new();
        let mut effect_station = Vec::new();
        for ev in chron.events() {
            effect_station.push(match &ev.effect {
                None => None,
                Some((flag, set)) => {
                    let idx = match stations.iter().position(|s| &s.flag == flag) {
                        Some(i) => i,
                        None => {
                            stations.push(Station {
                                flag: flag.clone(),
                                path: flag_path(model, flag),
                                value: false,
                                holder: None,
                                queue: None,
                                waiters: Vec::new(),
                            });
                            stations.len() - 1
                        }
                    };
                    Some((idx, *set))
                }
            });
        }
        for path in config.queues.keys() {
            let id = match model.resolve_path(path) {
                Ok(Resolved::Machine(id)) => id,
                _ => return mismatch(format!("queue for unknown machine `{path}`")),
            };
            if !stations.iter().any(|s| s.flag.machine == id) {
                return mismatch(format!("queue for `{path}`, which has no state flag used by the chronology"));
            }
            if !model.machine(id).stages.iter().any(|s| s.kind == StageKind::Receive) {
                return mismatch(format!("queue for `{path}`, which has no receive stage"));
            }
        }
        for st in &mut stations {
            let m = model.machine(st.flag.machine);
            let path = model.machine_path(st.flag.machine);
            let annotated = m.stages.iter().find(|s| s.kind == StageKind::Receive && s.queue.is_some());
            let receive = annotated.or_else(|| m.stages.iter().find(|s| s.kind == StageKind::Receive));
            let capacity = config.queues.get(&path).copied().or_else(|| annotated.and_then(|s| s.queue));
            if let (Some(capacity), Some(stage)) = (capacity, receive) {
                st.queue = Some(QueueBuffer {
                    stage: StageKey { machine: st.flag.machine, kind: stage.kind, lane: stage.lane.clone() },
                    capacity,
                    contents: VecDeque::new(),
                });
            }
        }

        let initial_lane = chron.initial().anchor.as_ref().map(|k| k.lane.clone());
        let sort = config
            .sort
            .clone()
            .or_else(|| initial_lane.filter(|l| !l.is_default()).map(|l| l.as_str().to_string()))
            .or_else(|| model.sorts.first().map(|s| s.name.clone()))
            .unwrap_or_else(|| "thing".to_string());

        let trace = Trace {
            chronology: chron.name().to_string(),
            seed: config.seed,
            periods: 0,
            instance_label: sort.clone(),
            events: chron
                .events()
                .iter()
                .map(|e| EventInfo { id: e.id.clone(), name: e.name.clone(), duration: e.duration })
                .collect(),
            ..Trace::default()
        };

        let mut state = SimState {
            model: model.clone(),
            chron: chron.clone(),
            guards: GuardState::new(config.seed, config.scripts.clone()),
            config,
            period: 0,
            runners: Vec::new(),
            stations,
            effect_station,
            sort,
            trace,
        };
        let mut res = StepResult::default();
        state.arrive(0, 0, &mut res)?;
        Ok(state)
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn horizon(&self) -> u32 {
        self.config.horizon
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.runners.iter().map(|r| &r.token)
    }

    pub fn token(&self, instance: u32) -> Option<&Token> {
        self.runners.get(instance.checked_sub(1)? as usize).map(|r| &r.token)
    }

    /// The event an instance is in and its countdown, if any.
    pub fn current_event(&self, instance: u32) -> Option<(&Event, Timer)> {
        let r = self.runners.get(instance.checked_sub(1)? as usize)?;
        r.current.map(|(ei, t)| (&self.chron.events()[ei], t))
    }

    pub fn live_count(&self) -> u32 {
        self.runners.iter().filter(|r| r.token.location != Location::Sink).count() as u32
    }

    pub fn flags(&self) -> Vec<StateFlag> {
        self.stations.iter().map(|s| StateFlag { name: s.path.clone(), value: s.value }).collect()
    }

    pub fn flag(&self, path: &str) -> Option<bool> {
        self.stations.iter().find(|s| s.path == path).map(|s| s.value)
    }

    pub fn queues(&self) -> Vec<(&str, &QueueBuffer)> {
        self.stations.iter().filter_map(|s| s.queue.as_ref().map(|q| (s.path.as_str(), q))).collect()
    }

    pub fn describe(&self, loc: &Location) -> String {
        match loc {
            Location::Stage(k) => format!("stage:{}", self.model.stage_path(k)),
            Location::Queue(k) => format!("queue:{}", self.model.stage_path(k)),
            Location::ReleaseBuffer(k) => format!("release:{}", self.model.stage_path(k)),
            Location::Sink => "sink".to_string(),
        }
    }

    /// True once every token is at SINK and no arrivals remain.
    pub fn finished(&self) -> bool {
        self.runners.iter().all(|r| r.token.location == Location::Sink)
            && !self.config.arrivals.iter().any(|a| a.period > self.period && a.count > 0)
    }

    /// Steps until the horizon or until [`finished`](Self::finished).
    pub fn run(&mut self) -> Result<&Trace, SimError> {
        while self.period < self.config.horizon && !self.finished() {
            self.step()?;
        }
        Ok(&self.trace)
    }

    /// Advances one period: arrivals, admissions to free stations, one
    /// period of timed work, then completions and routing.
    pub fn step(&mut self) -> Result<StepResult, SimError> {
        if self.period >= self.config.horizon {
            return Err(SimError::HorizonExceeded(self.config.horizon));
        }
        let mut res = StepResult { live_before: self.live_count(), ..StepResult::default() };
        let p = self.period + 1;
        res.period = p;

        if self.period > 0 {
            self.arrive(self.period, p, &mut res)?;
        }
        self.admit(p, &mut res)?;

        self.period = p;
        self.trace.periods = p;
        let mut done = Vec::new();
        for (i, r) in self.runners.iter_mut().enumerate() {
            if let Some((ei, timer)) = &mut r.current {
                self.trace.active.push(ActiveRecord {
                    period: p,
                    instance: r.token.instance,
                    event: self.chron.events()[*ei].id.clone(),
                });
                timer.remaining -= 1;
                if timer.remaining == 0 {
                    done.push((i, *ei));
                }
            }
        }
        for (i, ei) in done {
            self.runners[i].current = None;
            let next = self.next_event(i, ei, p)?;
            self.route(i, next, false, p, &mut res)?;
        }
        res.live_after = self.live_count();
        Ok(res)
    }

    fn arrive(&mut self, period: u32, p: u32, res: &mut StepResult) -> Result<(), SimError> {
        let batches: Vec<Arrival> = self.config.arrivals.iter().filter(|a| a.period == period).cloned().collect();
        let initial = self.chron.position(&self.chron.initial().id).expect("initial event");
        for a in batches {
            for _ in 0..a.count {
                let instance = self.runners.len() as u32 + 1;
                self.runners.push(Runner {
                    token: Token {
                        instance,
                        sort: self.sort.clone(),
                        attributes: a.attributes.clone(),
                        location: Location::Sink,
                    },
                    current: None,
                    waiting: None,
                    last_anchor: None,
                    zero_seen: Vec::new(),
                    fresh: true,
                });
                self.trace.instances.push(InstanceInfo { instance, sort: self.sort.clone(), created: period });
                res.created += 1;
                self.route((instance - 1) as usize, Some(initial), false, p, res)?;
            }
        }
        Ok(())
    }

    /// Lets waiting tokens through stations whose flag is clear, until
    /// nothing changes.
    fn admit(&mut self, p: u32, res: &mut StepResult) -> Result<(), SimError> {
        loop {
            let mut changed = false;
            for s in 0..self.stations.len() {
                if self.stations[s].value {
                    continue;
                }
                let st = &mut self.stations[s];
                st.waiters.sort_by_key(|w| (w.since, w.rank, w.instance));
                let mut refill = Vec::new();
                if let Some(q) = &mut st.queue {
                    while !st.waiters.is_empty() && q.has_room() {
                        let w = st.waiters.remove(0);
                        q.contents.push_back(w.instance);
                        refill.push((w.instance, q.stage.clone()));
                    }
                }
                for (instance, stage) in refill {
                    self.relocate((instance - 1) as usize, Location::Queue(stage), p, res);
                    changed = true;
                }
                let st = &mut self.stations[s];
                let next = match &mut st.queue {
                    Some(q) if !q.contents.is_empty() => q.contents.pop_front(),
                    _ if !st.waiters.is_empty() => Some(st.waiters.remove(0).instance),
                    _ => None,
                };
                if let Some(instance) = next {
                    let i = (instance - 1) as usize;
                    let ei = self.runners[i].waiting.take().expect("waiting token");
                    self.route(i, Some(ei), true, p, res)?;
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn relocate(&mut self, i: usize, to: Location, p: u32, res: &mut StepResult) {
        let r = &self.runners[i];
        if r.token.location == to && !r.fresh {
            return;
        }
        let from = if r.fresh { "source".to_string() } else { self.describe(&r.token.location) };
        let mv = Move { period: p, instance: r.token.instance, from, to: self.describe(&to) };
        self.trace.moves.push(mv.clone());
        res.moves.push(mv);
        self.runners[i].token.location = to;
        self.runners[i].fresh = false;
    }

    /// Chooses the successor of a completed event, evaluating its guard.
    fn next_event(&mut self, i: usize, ei: usize, p: u32) -> Result<Option<usize>, SimError> {
        let ev = &self.chron.events()[ei];
        let outcome = match &ev.guard {
            Some(gid) => {
                let guard = self.model.guard(gid).expect("carved events name declared guards");
                let o = evaluate_guard(guard, &self.runners[i].token, &mut self.guards)?;
                self.trace.guards.push(GuardRecord {
                    period: p,
                    instance: self.runners[i].token.instance,
                    event: ev.id.clone(),
                    guard: gid.clone(),
                    outcome: o.clone(),
                });
                Some(o)
            }
            None => None,
        };
        let edge = self.chron.successors(&ev.id).find(|e| outcome.is_none() || e.outcome == outcome);
        Ok(edge.map(|e| self.chron.position(&e.to).expect("edges join declared events")))
    }

    /// Walks a token from event `next` through zero-duration events until it
    /// starts a timed event, waits at a gate, or reaches SINK.
    fn route(
        &mut self,
        i: usize,
        mut next: Option<usize>,
        mut admitted: bool,
        p: u32,
        res: &mut StepResult,
    ) -> Result<(), SimError> {
        while let Some(ei) = next {
            if let Some((s, true)) = self.effect_station[ei] {
                let instance = self.runners[i].token.instance;
                if !admitted && self.stations[s].holder != Some(instance) {
                    self.wait(i, ei, s, p, res);
                    return Ok(());
                }
            }
            admitted = false;
            let ev = &self.chron.events()[ei];
            let anchor = ev.anchor.clone().expect("anchors checked at init");
            let duration = ev.duration;
            let id = ev.id.clone();
            let instance = self.runners[i].token.instance;

            let fired_at = if duration > 0 && p == self.period { p + 1 } else { p };
            self.trace.firings.push(Firing { period: fired_at, instance, event: id.clone(), duration });
            res.fired.push((instance, id));
            self.relocate(i, Location::Stage(anchor.clone()), p, res);
            self.runners[i].last_anchor = Some(anchor);

            if let Some((s, set)) = self.effect_station[ei] {
                let st = &mut self.stations[s];
                if st.value != set || (set && st.holder != Some(instance)) {
                    st.value = set;
                    st.holder = if set { Some(instance) } else { None };
                    let fc = FlagChange { period: p, instance, flag: st.path.clone(), value: set };
                    self.trace.flags.push(fc.clone());
                    res.flag_changes.push(fc);
                }
            }

            if duration > 0 {
                let r = &mut self.runners[i];
                r.current = Some((ei, Timer { duration, remaining: duration }));
                r.zero_seen.clear();
                return Ok(());
            }
            let r = &mut self.runners[i];
            if r.zero_seen.contains(&ei) {
                let start = r.zero_seen.iter().position(|&e| e == ei).unwrap_or(0);
                let mut events: Vec<String> =
                    r.zero_seen[start..].iter().map(|&e| self.chron.events()[e].id.clone()).collect();
                events.push(self.chron.events()[ei].id.clone());
                return Err(SimError::ZeroDurationCycle { instance: r.token.instance, events });
            }
            r.zero_seen.push(ei);
            next = self.next_event(i, ei, p)?;
        }
        self.relocate(i, Location::Sink, p, res);
        res.sunk += 1;
        Ok(())
    }

    /// Puts a token in line for station `s`: in its queue when there is room
    /// and nobody waits at a release stage ahead of it, else at a release
    /// stage.
    fn wait(&mut self, i: usize, ei: usize, s: usize, p: u32, res: &mut StepResult) {
        let instance = self.runners[i].token.instance;
        self.runners[i].waiting = Some(ei);
        let st = &mut self.stations[s];
        if let Some(q) = &mut st.queue {
            if q.has_room() && st.waiters.is_empty() {
                q.contents.push_back(instance);
                let stage = q.stage.clone();
                self.relocate(i, Location::Queue(stage), p, res);
                return;
            }
        }
        let anchor = self.runners[i]
            .last_anchor
            .clone()
            .or_else(|| self.chron.events()[ei].anchor.clone())
            .expect("anchors checked at init");
        let buffer = self
            .model
            .machine(anchor.machine)
            .stages
            .iter()
            .find(|st| st.kind == StageKind::Release && st.lane == anchor.lane)
            .map(|st| StageKey { machine: anchor.machine, kind: st.kind, lane: st.lane.clone() })
            .unwrap_or(anchor);
        let rank = self.feed_rank(&buffer, self.stations[s].flag.machine);
        self.stations[s].waiters.push(Waiter { instance, since: p, rank });
        self.relocate(i, Location::ReleaseBuffer(buffer), p, res);
    }

    /// Declaration index of the first flow from the buffer's machine into
    /// the station's machine.
    fn feed_rank(&self, buffer: &StageKey, station: crate::model::MachineId) -> usize {
        let inside = |key: &StageKey, root| {
            let mut cur = Some(key.machine);
            while let Some(m) = cur {
                if m == root {
                    return true;
                }
                cur = self.model.machine(m).parent;
            }
            false
        };
        self.model
            .flows
            .iter()
            .position(|f| {
                let (Ok(a), Ok(b)) = (self.model.resolve_stage(&f.from), self.model.resolve_stage(&f.to)) else {
                    return false;
                };
                a.machine == buffer.machine && inside(&b, station)
            })
            .unwrap_or(usize::MAX)
    }
}

/// Builds a state from `config` and runs it to completion.
pub fn simulate(model: &Model, chron: &Chronology, config: SimConfig) -> Result<Trace, SimError> {
    let mut st = SimState::new(model, chron, config)?;
    st.run()?;
    Ok(st.into_trace())
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.sort, self.instance)
    }
}
