//! Within-instant resolution.
//!
//! After completions and external arrivals are collected, the instant is a
//! worklist of actions: deliveries of a job to a class, and selections by
//! idle servers that have something waiting. An action at server `S` is
//! held back while some action at another server could still send a job
//! to `S` during this instant. Among the remaining actions the least of
//! (server, delivery-before-selection, priority, class, seq) goes first.

use super::{EventKind, EventRecord, InService, Job, Origin, SimError, SimState};
use crate::model::Capacity;

#[derive(Clone, Copy, Debug)]
struct Delivery {
    job: Job,
    class: usize,
    seq: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    Deliver(usize),
    Select(usize),
}

impl SimState {
    fn emit(&mut self, out: &mut Vec<EventRecord>, kind: EventKind, class: usize, job: u64) {
        let seq = self.next_seq;
        self.next_seq += 1;
        out.push(EventRecord {
            time: self.clock,
            seq,
            kind,
            class,
            server: self.net.server_of(class),
            job,
        });
    }

    /// Processes everything due at the current clock and leaves the state
    /// quiescent: every server is busy or has no waiting jobs.
    pub fn resolve_instant(&mut self) -> Result<Vec<EventRecord>, SimError> {
        let mut out = Vec::new();
        let mut pending: Vec<Delivery> = Vec::new();

        // completions, in server order
        for s in 0..self.servers.len() {
            let done = matches!(&self.servers[s], Some(j) if j.remaining.is_zero());
            if done {
                let j = self.servers[s].take().unwrap();
                self.finish(j.job, &mut pending, &mut out);
            }
        }

        // external arrivals due now, in class order
        for c in 0..self.net.num_classes() {
            while self.next_arrival(c) == Some(self.clock) {
                self.cursors[c] = self.cursors[c].map(|n| n + 1);
                let job = self.new_job(Origin::External(c), c);
                self.counters[c].external_arrivals += 1;
                self.emit(&mut out, EventKind::ExternalArrival, c, job.id);
                let seq = out.last().unwrap().seq;
                pending.push(Delivery { job, class: c, seq });
            }
        }

        let live = self.total_jobs() + pending.len() as u64;
        let limit = (live + 1) * (self.net.num_classes() as u64 + 1);
        let mut processed = 0u64;

        while let Some(action) = self.choose(&pending) {
            match action {
                Action::Deliver(k) => {
                    processed += 1;
                    if processed > limit {
                        return Err(SimError::NonTermination {
                            time: self.clock,
                            limit,
                        });
                    }
                    let d = pending.remove(k);
                    self.deliver(d, &mut pending, &mut out);
                }
                Action::Select(s) => self.select(s, &mut pending, &mut out),
            }
        }

        self.needs_resolution = false;
        if let Some(limit) = self.job_limit {
            let live = self.total_jobs();
            if live > limit {
                return Err(SimError::JobLimit {
                    time: self.clock,
                    live,
                    limit,
                });
            }
        }
        Ok(out)
    }

    /// A job has finished service at its current class.
    fn finish(&mut self, job: Job, pending: &mut Vec<Delivery>, out: &mut Vec<EventRecord>) {
        let c = job.class;
        self.counters[c].completed += 1;
        self.emit(out, EventKind::ServiceComplete, c, job.id);
        match self.net.next_of(c) {
            Some(n) => {
                let job = Job { class: n, ..job };
                self.counters[n].routed_arrivals += 1;
                self.emit(out, EventKind::RoutedArrival, n, job.id);
                let seq = out.last().unwrap().seq;
                pending.push(Delivery { job, class: n, seq });
            }
            None => {
                self.counters[c].departed += 1;
                self.emit(out, EventKind::Depart, c, job.id);
            }
        }
    }

    fn start(&mut self, job: Job, pending: &mut Vec<Delivery>, out: &mut Vec<EventRecord>) {
        let c = job.class;
        self.emit(out, EventKind::ServiceStart, c, job.id);
        let svc = self.net.service(c);
        if svc.is_zero() {
            self.finish(job, pending, out);
        } else {
            self.servers[self.net.server_of(c)] = Some(InService {
                job,
                remaining: svc,
                started_at: self.clock,
            });
        }
    }

    fn deliver(&mut self, d: Delivery, pending: &mut Vec<Delivery>, out: &mut Vec<EventRecord>) {
        let c = d.class;
        let s = self.net.server_of(c);
        let cap = self.net.capacity(c);
        let accepted = if cap.is_zero() {
            // only if service can begin right now
            let rank = self.net.rank_in_server(c);
            !self.is_busy(s)
                && self.net.server(s).classes[..rank]
                    .iter()
                    .all(|&p| self.queues[p].is_empty())
        } else {
            cap.has_room(self.queues[c].len())
        };
        if !accepted {
            self.counters[c].dropped += 1;
            self.emit(out, EventKind::Drop, c, d.job.id);
            return;
        }
        self.counters[c].admitted += 1;
        self.emit(out, EventKind::Admit, c, d.job.id);
        if cap == Capacity::Finite(0) {
            self.start(d.job, pending, out);
        } else {
            self.queues[c].push_back(d.job);
        }
    }

    fn select(&mut self, s: usize, pending: &mut Vec<Delivery>, out: &mut Vec<EventRecord>) {
        let Some(c) = self.head_class(s) else { return };
        let job = self.queues[c].pop_front().unwrap();
        self.start(job, pending, out);
    }

    /// Highest-priority nonempty class of server `s`.
    fn head_class(&self, s: usize) -> Option<usize> {
        self.net.server(s)
            .classes
            .iter()
            .copied()
            .find(|&c| !self.queues[c].is_empty())
    }

    fn choose(&self, pending: &[Delivery]) -> Option<Action> {
        let net = &*self.net;
        // (action, server, source classes that may feed other servers now)
        let mut actions: Vec<(Action, usize, Vec<usize>)> = pending
            .iter()
            .enumerate()
            .map(|(k, d)| (Action::Deliver(k), net.server_of(d.class), vec![d.class]))
            .collect();
        for s in 0..net.num_servers() {
            if self.servers[s].is_none() && self.head_class(s).is_some() {
                let sources = net
                    .server(s)
                    .classes
                    .iter()
                    .copied()
                    .filter(|&c| !self.queues[c].is_empty())
                    .collect();
                actions.push((Action::Select(s), s, sources));
            }
        }
        if actions.is_empty() {
            return None;
        }

        let key = |a: &Action, s: usize| match *a {
            Action::Deliver(k) => {
                let c = pending[k].class;
                (s, 0, net.class(c).priority, net.rank_in_server(c), pending[k].seq)
            }
            Action::Select(_) => (s, 1, 0, 0, 0),
        };
        let feeds = |sources: &[usize], target: usize| {
            sources
                .iter()
                .any(|&c| net.downstream_servers(c).binary_search(&target).is_ok())
        };
        let ready = actions
            .iter()
            .filter(|(_, s, _)| {
                !actions
                    .iter()
                    .any(|(_, s2, src)| s2 != s && feeds(src, *s))
            })
            .min_by_key(|(a, s, _)| key(a, *s));
        let pick = ready.or_else(|| actions.iter().min_by_key(|(a, s, _)| key(a, *s)));
        pick.map(|(a, _, _)| *a)
    }
}
