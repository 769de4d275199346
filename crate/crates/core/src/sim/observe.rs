use super::{EventRecord, SimError, SimState};
use crate::rational::Rational;

/// What an observer sees at one instant.
///
/// `pre` is the state after time has advanced but before the instant is
/// resolved (left limits); `post` is the resolved state. At a probe time
/// with no event both refer to the same state and `events` is empty.
pub struct Observation<'a> {
    pub time: Rational,
    pub pre: &'a SimState,
    pub post: &'a SimState,
    pub events: &'a [EventRecord],
    pub probe: bool,
}

pub trait Observer {
    fn observe(&mut self, obs: &Observation<'_>);

    /// Return false to skip cloning the pre-instant state; `pre` then
    /// aliases `post`.
    fn needs_pre(&self) -> bool {
        true
    }
}

impl<F: FnMut(&Observation<'_>)> Observer for F {
    fn observe(&mut self, obs: &Observation<'_>) {
        self(obs)
    }
}

/// Collects every event record.
#[derive(Default, Debug, Clone)]
pub struct TraceRecorder {
    pub events: Vec<EventRecord>,
}

impl Observer for TraceRecorder {
    fn observe(&mut self, obs: &Observation<'_>) {
        self.events.extend_from_slice(obs.events);
    }

    fn needs_pre(&self) -> bool {
        false
    }
}

/// Extra observation times besides event instants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ProbeSchedule {
    #[default]
    None,
    /// `offset + k * period` for k >= 0.
    Every { period: Rational, offset: Rational },
    /// Sorted explicit times.
    At(Vec<Rational>),
}

impl ProbeSchedule {
    pub fn every(period: Rational) -> Self {
        assert!(period.is_positive(), "probe period must be positive");
        ProbeSchedule::Every {
            period,
            offset: Rational::ZERO,
        }
    }

    pub fn at(mut times: Vec<Rational>) -> Self {
        times.sort();
        times.dedup();
        ProbeSchedule::At(times)
    }

    /// First probe time `>= t` (or `> t` when `strict`).
    pub fn next_from(&self, t: Rational, strict: bool) -> Option<Rational> {
        match self {
            ProbeSchedule::None => None,
            ProbeSchedule::Every { period, offset } => {
                let k = ((t - *offset) / *period).ceil().max(0);
                let mut p = *offset + *period * Rational::from_integer(k);
                if strict && p <= t {
                    p += *period;
                }
                Some(p)
            }
            ProbeSchedule::At(times) => times
                .iter()
                .copied()
                .find(|&p| if strict { p > t } else { p >= t }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub instants: u64,
    pub events: u64,
    pub probes: u64,
}

impl SimState {
    /// Steps through every event instant up to and including `horizon`,
    /// reporting each instant and each probe time to `observer`. The clock
    /// ends at `horizon`.
    pub fn run_until(
        &mut self,
        horizon: Rational,
        probes: &ProbeSchedule,
        observer: &mut dyn Observer,
    ) -> Result<RunStats, SimError> {
        let mut stats = RunStats::default();
        if horizon < self.clock {
            return Ok(stats);
        }
        let mut next_probe = probes.next_from(self.clock, false);
        if !self.needs_resolution && next_probe == Some(self.clock) {
            // the current instant is already resolved; report it as is
            self.probe_only(observer, &mut stats);
            next_probe = probes.next_from(self.clock, true);
        }
        loop {
            let ev = self.next_event_time().filter(|&t| t <= horizon);
            let pr = next_probe.filter(|&t| t <= horizon);
            match (ev, pr) {
                (None, None) => break,
                (Some(e), p) if p.is_none_or(|p| e <= p) => {
                    self.advance_to(e)?;
                    let pre = observer.needs_pre().then(|| self.clone());
                    let events = self.resolve_instant()?;
                    let probe = p == Some(e);
                    if probe {
                        next_probe = probes.next_from(e, true);
                        stats.probes += 1;
                    }
                    stats.instants += 1;
                    stats.events += events.len() as u64;
                    observer.observe(&Observation {
                        time: e,
                        pre: pre.as_ref().unwrap_or(self),
                        post: self,
                        events: &events,
                        probe,
                    });
                }
                (_, Some(p)) => {
                    self.advance_to(p)?;
                    self.probe_only(observer, &mut stats);
                    next_probe = probes.next_from(p, true);
                }
                (Some(_), None) => unreachable!(),
            }
        }
        if self.clock < horizon {
            self.advance_to(horizon)?;
        }
        Ok(stats)
    }

    fn probe_only(&self, observer: &mut dyn Observer, stats: &mut RunStats) {
        stats.probes += 1;
        observer.observe(&Observation {
            time: self.clock,
            pre: self,
            post: self,
            events: &[],
            probe: true,
        });
    }
}
