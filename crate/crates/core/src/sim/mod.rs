//! Event-driven execution of a [`Network`] under the nonpreemptive static
//! buffer priority policy.
//!
//! Time advances between instants by draining busy servers linearly. At
//! each instant [`SimState::resolve_instant`] fires due completions and
//! arrivals, then repeatedly processes deliveries and idle-server
//! selections until every server is busy or has nothing waiting.

mod engine;
mod observe;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::model::{Capacity, ClassId, InitialCondition, Network, ServerId};
use crate::rational::Rational;

pub use observe::{Observation, Observer, ProbeSchedule, RunStats, TraceRecorder};

/// Where a job entered the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Initial,
    /// External arrival process attached to this class.
    External(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Job {
    pub id: u64,
    pub origin: Origin,
    pub class: usize,
}

/// The job a server is working on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InService {
    pub job: Job,
    pub remaining: Rational,
    pub started_at: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    ExternalArrival,
    RoutedArrival,
    Admit,
    Drop,
    ServiceStart,
    ServiceComplete,
    Depart,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::ExternalArrival => "EXTERNAL_ARRIVAL",
            EventKind::RoutedArrival => "ROUTED_ARRIVAL",
            EventKind::Admit => "ADMIT",
            EventKind::Drop => "DROP",
            EventKind::ServiceStart => "SERVICE_START",
            EventKind::ServiceComplete => "SERVICE_COMPLETE",
            EventKind::Depart => "DEPART",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One ledger entry. `class` and `server` are network indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventRecord {
    pub time: Rational,
    pub seq: u64,
    pub kind: EventKind,
    pub class: usize,
    pub server: usize,
    pub job: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounters {
    pub external_arrivals: u64,
    pub routed_arrivals: u64,
    pub admitted: u64,
    pub dropped: u64,
    pub completed: u64,
    pub departed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("initial condition puts two jobs in service at server {server}")]
    InitConflict { server: ServerId },
    #[error("initial condition: {0}")]
    BadInitial(String),
    #[error("cannot advance to {target}: next event is at {next}")]
    Overshoot { target: Rational, next: Rational },
    #[error("cannot move the clock backwards from {clock} to {target}")]
    Backwards { clock: Rational, target: Rational },
    #[error("instant {time} exceeded {limit} deliveries")]
    NonTermination { time: Rational, limit: u64 },
    #[error("{live} live jobs at time {time} exceed the limit of {limit}")]
    JobLimit { time: Rational, live: u64, limit: u64 },
}

/// Queue contents at one moment. `counts` include the job in service.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueueSnapshot {
    pub time: Rational,
    pub counts: BTreeMap<ClassId, u64>,
    pub busy: BTreeMap<ServerId, bool>,
    pub total: u64,
}

#[derive(Clone, Debug)]
pub struct SimState {
    net: Arc<Network>,
    clock: Rational,
    needs_resolution: bool,
    queues: Vec<VecDeque<Job>>,
    servers: Vec<Option<InService>>,
    /// Next arrival index per class; `None` once exhausted or absent.
    cursors: Vec<Option<u64>>,
    counters: Vec<ClassCounters>,
    next_job_id: u64,
    next_seq: u64,
    job_limit: Option<u64>,
}

impl SimState {
    /// Loads `init` at time 0. The time-0 instant is left unresolved so the
    /// first [`step`](Self::step) processes time-0 arrivals.
    pub fn new(net: Arc<Network>, init: &InitialCondition) -> Result<Self, SimError> {
        let nc = net.num_classes();
        let mut state = SimState {
            clock: Rational::ZERO,
            needs_resolution: true,
            queues: vec![VecDeque::new(); nc],
            servers: vec![None; net.num_servers()],
            cursors: (0..nc)
                .map(|c| net.class(c).arrival.as_ref().and_then(|a| a.first_index()))
                .collect(),
            counters: vec![ClassCounters::default(); nc],
            next_job_id: 0,
            next_seq: 0,
            job_limit: None,
            net,
        };
        for e in &init.in_service {
            let c = state
                .net
                .class_idx(&e.class)
                .ok_or_else(|| SimError::BadInitial(format!("unknown class {}", e.class)))?;
            let svc = state.net.service(c);
            if !e.remaining.is_positive() || e.remaining > svc {
                return Err(SimError::BadInitial(format!(
                    "remaining {} for class {} must lie in (0, {svc}]",
                    e.remaining, e.class
                )));
            }
            let s = state.net.server_of(c);
            if state.servers[s].is_some() {
                return Err(SimError::InitConflict {
                    server: state.net.server(s).id.clone(),
                });
            }
            let job = state.new_job(Origin::Initial, c);
            state.servers[s] = Some(InService {
                job,
                remaining: e.remaining,
                started_at: e.remaining - svc,
            });
            state.counters[c].admitted += 1;
        }
        for (id, &n) in &init.queued {
            let c = state
                .net
                .class_idx(id)
                .ok_or_else(|| SimError::BadInitial(format!("unknown class {id}")))?;
            if matches!(state.net.capacity(c), Capacity::Finite(b) if n > b) {
                return Err(SimError::BadInitial(format!(
                    "{n} jobs exceed the capacity of class {id}"
                )));
            }
            for _ in 0..n {
                let job = state.new_job(Origin::Initial, c);
                state.queues[c].push_back(job);
                state.counters[c].admitted += 1;
            }
        }
        Ok(state)
    }

    fn new_job(&mut self, origin: Origin, class: usize) -> Job {
        let id = self.next_job_id;
        self.next_job_id += 1;
        Job { id, origin, class }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_arc(&self) -> &Arc<Network> {
        &self.net
    }

    pub fn clock(&self) -> Rational {
        self.clock
    }

    /// Abort with [`SimError::JobLimit`] once live jobs exceed `limit`.
    pub fn set_job_limit(&mut self, limit: Option<u64>) {
        self.job_limit = limit;
    }

    pub fn queue(&self, class: usize) -> &VecDeque<Job> {
        &self.queues[class]
    }

    pub fn in_service(&self, server: usize) -> Option<&InService> {
        self.servers[server].as_ref()
    }

    /// A server is busy while its job has positive remaining service.
    pub fn is_busy(&self, server: usize) -> bool {
        self.servers[server]
            .as_ref()
            .is_some_and(|s| s.remaining.is_positive())
    }

    pub fn counters(&self, class: usize) -> &ClassCounters {
        &self.counters[class]
    }

    /// Jobs of `class`, waiting or in service.
    pub fn class_count(&self, class: usize) -> u64 {
        let s = self.net.server_of(class);
        let serving = self.servers[s].as_ref().is_some_and(|j| j.job.class == class);
        self.queues[class].len() as u64 + serving as u64
    }

    pub fn total_jobs(&self) -> u64 {
        let waiting: usize = self.queues.iter().map(VecDeque::len).sum();
        waiting as u64 + self.servers.iter().flatten().count() as u64
    }

    /// Time of the next external arrival into `class`, if any.
    pub fn next_arrival(&self, class: usize) -> Option<Rational> {
        let n = self.cursors[class]?;
        self.net.class(class).arrival.as_ref()?.instant(n)
    }

    pub fn next_event_time(&self) -> Option<Rational> {
        if self.needs_resolution {
            return Some(self.clock);
        }
        self.earliest_pending()
    }

    fn earliest_pending(&self) -> Option<Rational> {
        let arrivals = (0..self.net.num_classes()).filter_map(|c| self.next_arrival(c));
        let completions = self
            .servers
            .iter()
            .flatten()
            .map(|s| self.clock + s.remaining);
        arrivals.chain(completions).min()
    }

    /// Drains every busy server by `t - clock`. No discrete change happens.
    pub fn advance_to(&mut self, t: Rational) -> Result<(), SimError> {
        if t < self.clock {
            return Err(SimError::Backwards {
                clock: self.clock,
                target: t,
            });
        }
        if t == self.clock {
            return Ok(());
        }
        if let Some(next) = self.next_event_time() {
            if t > next {
                return Err(SimError::Overshoot { target: t, next });
            }
        }
        let dt = t - self.clock;
        for s in self.servers.iter_mut().flatten() {
            s.remaining -= dt;
        }
        self.clock = t;
        self.needs_resolution = self.earliest_pending() == Some(t);
        Ok(())
    }

    /// Advances to the next event instant and resolves it. Returns `None`
    /// when nothing is left to happen.
    pub fn step(&mut self) -> Result<Option<Vec<EventRecord>>, SimError> {
        match self.next_event_time() {
            None => Ok(None),
            Some(t) => {
                self.advance_to(t)?;
                self.resolve_instant().map(Some)
            }
        }
    }

    /// Total service still owed to classes in `v` by jobs now present,
    /// following each job's remaining route.
    pub fn workload(&self, v: &[usize]) -> Rational {
        let net = &*self.net;
        let in_v = |c: usize| v.contains(&c);
        let future = |c: usize| -> Rational {
            net.route_from(c)
                .filter(|&d| in_v(d))
                .map(|d| net.service(d))
                .sum()
        };
        let mut w = Rational::ZERO;
        for (c, q) in self.queues.iter().enumerate() {
            if !q.is_empty() {
                w += future(c) * Rational::from(q.len() as u64);
            }
        }
        for s in self.servers.iter().flatten() {
            let c = s.job.class;
            if in_v(c) {
                w += s.remaining;
            }
            if let Some(n) = net.next_of(c) {
                w += future(n);
            }
        }
        w
    }

    pub fn queue_snapshot(&self) -> QueueSnapshot {
        let net = &*self.net;
        let counts = (0..net.num_classes())
            .map(|c| (net.class(c).id.clone(), self.class_count(c)))
            .collect();
        let busy = (0..net.num_servers())
            .map(|s| (net.server(s).id.clone(), self.is_busy(s)))
            .collect();
        QueueSnapshot {
            time: self.clock,
            counts,
            busy,
            total: self.total_jobs(),
        }
    }

    /// Ids for a class set given by name.
    pub fn class_set(&self, ids: &[ClassId]) -> Option<Vec<usize>> {
        ids.iter().map(|id| self.net.class_idx(id)).collect()
    }
}
