//! Timing invariants of a compiled network, checked instant by instant.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{Layout, StatusReport, Violation};
use crate::rational::Rational;
use crate::sim::{EventKind, Observation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Lemma {
    /// `i12` and `i21` are never both occupied.
    L1,
    /// Crossing-network completions inside `[3t+1, 3t+3)` fall on half-integers.
    L3,
    /// Just before `3t+3` exactly one `S4_j` server is idle.
    L7,
    /// Counter-changing admissions happen only at `3t+3`, at most one per cycle.
    L9,
    /// Decoded counters move by the change the main network dispatched.
    L10,
    /// Crossing-network workload drains at rate one while served, else is flat.
    Slope,
}

#[derive(Default)]
pub(super) struct Checker {
    found: Vec<Violation>,
    /// cycle -> (counter index, +1 or -1)
    dispatched: BTreeMap<u64, Vec<(usize, i64)>>,
    /// per counter: time, workload and serving count after the last instant
    last: [Option<(Rational, Rational, u64)>; 2],
}

fn cycle_of(time: Rational) -> Option<(u64, Rational)> {
    if time < Rational::ONE {
        return None;
    }
    let t = ((time - Rational::ONE) / Rational::from(3u64)).floor() as u64;
    Some((t, time - Rational::from(3 * t + 1)))
}

impl Checker {
    fn flag(&mut self, lemma: Lemma, cycle: u64, time: Rational, detail: String) {
        self.found.push(Violation {
            lemma,
            cycle,
            time,
            detail,
        });
    }

    pub(super) fn observe(&mut self, l: &Layout, o: &Observation<'_>) {
        let cyc = cycle_of(o.time);
        let cycle = cyc.map_or(0, |c| c.0);
        let two = Rational::from(2u64);

        for i in 0..2 {
            let [_, i12, i21, _] = l.rs[i];
            let (a, b) = (o.post.class_count(i12), o.post.class_count(i21));
            if a * b != 0 {
                self.flag(Lemma::L1, cycle, o.time, format!("SN{}: {a} jobs in i12 and {b} in i21", i + 1));
            }
        }

        let Some((t, phase)) = cyc else { return };
        let in_window = phase < two;

        if in_window {
            for e in o.events {
                if e.kind == EventKind::ServiceComplete {
                    for i in 0..2 {
                        if [l.rs[i][1], l.rs[i][2]].contains(&e.class) && !(o.time * two).is_integer() {
                            self.flag(Lemma::L3, t, o.time, format!("SN{} completion off the half-integer grid", i + 1));
                        }
                    }
                }
            }
        }

        if phase == two {
            let idle = l.s4.iter().filter(|&&s| !o.pre.is_busy(s)).count();
            if idle != 1 {
                self.flag(Lemma::L7, t, o.time, format!("{idle} idle S4 servers"));
            }
        }

        for e in o.events.iter().filter(|e| e.kind == EventKind::Admit) {
            for i in 0..2 {
                let sign = if e.class == l.dec[i] {
                    -1
                } else if l.inc[i].contains(&e.class) {
                    1
                } else {
                    continue;
                };
                if phase != two {
                    self.flag(Lemma::L9, t, o.time, format!("SN{} admission outside 3t+3", i + 1));
                }
                let list = self.dispatched.entry(t).or_default();
                list.push((i, sign));
                if list.len() > 1 {
                    self.flag(Lemma::L9, t, o.time, "more than one counter change in a cycle".into());
                }
            }
        }

        for i in 0..2 {
            let set = l.workload_set(i + 1);
            let [_, i12, i21, _] = l.rs[i];
            if in_window {
                if let Some((t0, w0, serving)) = self.last[i] {
                    let want = w0 - (o.time - t0) * Rational::from(serving);
                    let got = o.pre.workload(&set);
                    if got != want {
                        self.flag(Lemma::Slope, t, o.time, format!("SN{} workload {got}, expected {want}", i + 1));
                    }
                }
            }
            // the window's last instant still seeds the next comparison only if inside it
            self.last[i] = if in_window {
                let serving = [i12, i21]
                    .iter()
                    .filter(|&&c| {
                        let s = o.post.network().server_of(c);
                        o.post.in_service(s).is_some_and(|j| j.job.class == c && j.remaining.is_positive())
                    })
                    .count() as u64;
                Some((o.time, o.post.workload(&set), serving))
            } else {
                None
            };
        }
    }

    pub(super) fn finish(mut self, _l: &Layout, reports: &[StatusReport], cycles: u64) -> Vec<Violation> {
        for w in reports.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let t = a.cycle;
            if t >= cycles {
                break;
            }
            let changes = self.dispatched.get(&t).cloned().unwrap_or_default();
            for (i, (before, after)) in [(a.status_sn1, b.status_sn1), (a.status_sn2, b.status_sn2)].into_iter().enumerate() {
                let want: i64 = changes.iter().filter(|c| c.0 == i).map(|c| c.1).sum();
                if before < 0 || after < 0 || after - before != want {
                    self.flag(
                        Lemma::L10,
                        t,
                        Rational::from(3 * t + 4),
                        format!("SN{}: status {before} -> {after}, dispatched change {want}", i + 1),
                    );
                }
            }
        }
        self.found
    }
}
