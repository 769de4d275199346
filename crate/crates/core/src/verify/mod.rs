//! Mechanical checks that a compiled network tracks its machine.
//!
//! Every three time units, at `3t + 1`, the network is decoded: the main
//! network should hold a single job that started service in `02_k` at
//! `3t` (state `k`), and twice the crossing-network workload of each
//! subnetwork should equal the counter. [`verify_compiled`] runs the
//! network alongside the machine and compares cycle by cycle while also
//! checking a set of timing invariants of the construction.

mod lemmas;
mod rs;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::compile::{compile_scm, normalize_loads, CompileError, CompiledNetwork};
use crate::machine::{scm_run, Config, MachineError, Outcome, Scm};
use crate::model::{load_factors, ClassId, Network, NetworkDoc, ServerId};
use crate::rational::Rational;
use crate::sim::{Observation, Observer, ProbeSchedule, SimError, SimState};

pub use lemmas::Lemma;
pub use rs::{rs_network, rs_periodicity, RsReport};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("machine failed at cycle {cycle}: {source}")]
    Oracle { cycle: u64, source: MachineError },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Class and server indices of a compiled network that the decoders use.
#[derive(Clone, Debug)]
pub struct Layout {
    /// 0 for the main network, `i` for subnetwork `i`, per class.
    part: Vec<u8>,
    /// `[i11, i12, i21, i22]` per subnetwork.
    rs: [[usize; 4]; 2],
    i31: [usize; 2],
    /// `02_k` class index to `k`.
    token: BTreeMap<usize, usize>,
    s4: Vec<usize>,
    /// Classes whose admission decrements / increments counter `i`.
    dec: [usize; 2],
    inc: [Vec<usize>; 2],
}

impl Layout {
    pub fn new(cn: &CompiledNetwork, net: &Network) -> Self {
        let idx = |key: &str| net.class_idx(cn.class(key)).expect("directory entry is a class");
        let mut part = vec![0u8; net.num_classes()];
        for (key, id) in &cn.doc.directory {
            let c = net.class_idx(id).expect("directory entry is a class");
            part[c] = match &key[..4] {
                "SN1." => 1,
                "SN2." => 2,
                _ => 0,
            };
        }
        let rs = [1, 2].map(|i| ["11", "12", "21", "22"].map(|sk| idx(&format!("SN{i}.i{sk}"))));
        let i31 = [1, 2].map(|i| idx(&format!("SN{i}.i31")));
        let m = cn.m();
        let token = (1..=m).map(|k| (idx(&format!("MN.02j[{k}]")), k)).collect();
        let s4 = (1..=m).map(|j| net.server_of(idx(&format!("MN.4j1[{j}]")))).collect();
        let dec = [1, 2].map(|i| idx(&format!("SN{i}.i41")));
        let inc = [1, 2].map(|i| {
            if cn.normalized {
                cn.part(i)
                    .filter(|(k, _)| k.contains(".g["))
                    .map(|(_, id)| net.class_idx(id).unwrap())
                    .filter(|&c| net.class(c).arrival.is_none())
                    .collect()
            } else {
                vec![idx(&format!("SN{i}.i51"))]
            }
        });
        Layout {
            part,
            rs,
            i31,
            token,
            s4,
            dec,
            inc,
        }
    }

    /// `[i12, i21]` of subnetwork `i` (1-based).
    pub fn workload_set(&self, i: usize) -> [usize; 2] {
        [self.rs[i - 1][1], self.rs[i - 1][2]]
    }

    fn jobs_in_part(&self, s: &SimState, part: u8) -> u64 {
        (0..self.part.len())
            .filter(|&c| self.part[c] == part)
            .map(|c| s.class_count(c))
            .sum()
    }
}

/// State number `k` if, at `3t + 1`, the main network holds exactly one
/// job and it began service in `02_k` at `3t`; otherwise -1.
pub fn status_mn(layout: &Layout, post: &SimState, t: u64) -> i64 {
    if layout.jobs_in_part(post, 0) != 1 {
        return -1;
    }
    let start = Rational::from(3 * t);
    for (&c, &k) in &layout.token {
        let s = post.network().server_of(c);
        if let Some(j) = post.in_service(s) {
            if j.job.class == c && j.started_at == start {
                return k as i64;
            }
        }
    }
    -1
}

/// Twice the crossing-network workload of subnetwork `i` just before
/// `3t + 1`, provided the two long classes are not both occupied after the
/// instant and no other job of the subnetwork was present; otherwise -1.
pub fn status_sn(layout: &Layout, pre: &SimState, post: &SimState, i: usize) -> i64 {
    let [i11, i12, i21, i22] = layout.rs[i - 1];
    if post.class_count(i12) * post.class_count(i21) != 0 {
        return -1;
    }
    let outside = (0..layout.part.len())
        .filter(|&c| layout.part[c] == i as u8 && ![i11, i12, i21, i22].contains(&c))
        .any(|c| pre.class_count(c) > 0 || post.class_count(c) > 0 && c == layout.i31[i - 1]);
    if outside {
        return -1;
    }
    let w2 = pre.workload(&layout.workload_set(i)) * Rational::from(2u64);
    if w2.is_integer() {
        w2.numer() as i64
    } else {
        -1
    }
}

/// Jobs present just before an instant, not counting jobs whose service
/// ends exactly then.
pub fn jobs_before(pre: &SimState) -> u64 {
    let finishing = (0..pre.network().num_servers())
        .filter(|&s| pre.in_service(s).is_some_and(|j| j.remaining.is_zero()))
        .count() as u64;
    pre.total_jobs() - finishing
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatusReport {
    pub cycle: u64,
    pub status_mn: i64,
    pub status_sn1: i64,
    pub status_sn2: i64,
    /// Machine state number (1-based) and counters after `cycle` steps.
    pub expected_state: usize,
    pub expected_z1: u64,
    pub expected_z2: u64,
    #[serde(rename = "match")]
    pub matched: bool,
}

/// Job counts of one cycle. These depend on how simultaneous work at
/// different servers is ordered, so they are kept apart from the statuses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Occupancy {
    pub cycle: u64,
    /// Jobs just before `3t + 1`.
    pub jobs_at_start: u64,
    /// Largest job count over instants in `[3t + 1, 3t + 4)`.
    pub max_jobs_in_cycle: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub lemma: Lemma,
    pub cycle: u64,
    pub time: Rational,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub network: String,
    pub normalized: bool,
    pub cycles: u64,
    pub first_mismatch: Option<u64>,
    pub violations: Vec<Violation>,
    pub max_total_jobs: u64,
    pub reports: Vec<StatusReport>,
    pub occupancy: Vec<Occupancy>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none() && self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Abort the simulation when live jobs exceed this.
    pub job_limit: Option<u64>,
}

struct CycleObserver<'a> {
    layout: &'a Layout,
    cycles: u64,
    statuses: Vec<(i64, i64, i64, u64)>,
    max_in_cycle: Vec<u64>,
    max_total: u64,
    lemmas: lemmas::Checker,
}

impl Observer for CycleObserver<'_> {
    fn observe(&mut self, o: &Observation<'_>) {
        let total = o.post.total_jobs();
        self.max_total = self.max_total.max(total);
        if o.time >= Rational::ONE {
            let t = ((o.time - Rational::ONE) / Rational::from(3u64)).floor() as u64;
            if t as usize >= self.max_in_cycle.len() {
                self.max_in_cycle.resize(t as usize + 1, 0);
            }
            let slot = &mut self.max_in_cycle[t as usize];
            *slot = (*slot).max(total);
            if o.time == Rational::from(3 * t + 1) && t <= self.cycles {
                let l = self.layout;
                self.statuses.push((
                    status_mn(l, o.post, t),
                    status_sn(l, o.pre, o.post, 1),
                    status_sn(l, o.pre, o.post, 2),
                    jobs_before(o.pre),
                ));
            }
        }
        self.lemmas.observe(self.layout, o);
    }
}

/// Runs `cn` for `cycles` cycles next to the machine and compares.
pub fn verify_compiled(scm: &Scm, cn: &CompiledNetwork, cycles: u64, opts: VerifyOptions) -> Result<VerifyReport, VerifyError> {
    let run = scm_run(scm, scm.start(), cycles);
    let oracle = match run.outcome {
        Outcome::Error(e) => {
            let cycle = match &e {
                MachineError::NegativeCounter { step, .. } => *step,
                _ => run.trajectory.len() as u64,
            };
            return Err(VerifyError::Oracle { cycle, source: e });
        }
        _ => run.trajectory,
    };

    let net = Arc::new(cn.doc.spec.clone().validate()?);
    let layout = Layout::new(cn, &net);
    let mut sim = SimState::new(net.clone(), &cn.doc.initial)?;
    sim.set_job_limit(opts.job_limit);
    let mut obs = CycleObserver {
        layout: &layout,
        cycles,
        statuses: Vec::new(),
        max_in_cycle: Vec::new(),
        max_total: 0,
        lemmas: lemmas::Checker::default(),
    };
    sim.run_until(Rational::from(3 * cycles + 1), &ProbeSchedule::None, &mut obs)?;

    let mut reports = Vec::new();
    let mut occupancy = Vec::new();
    let mut first_mismatch = None;
    for (t, &(mn, s1, s2, jobs)) in obs.statuses.iter().enumerate() {
        let want: &Config = &oracle[t];
        let matched = mn == want.state as i64 + 1 && s1 == want.z1 as i64 && s2 == want.z2 as i64;
        if !matched && first_mismatch.is_none() {
            first_mismatch = Some(t as u64);
        }
        reports.push(StatusReport {
            cycle: t as u64,
            status_mn: mn,
            status_sn1: s1,
            status_sn2: s2,
            expected_state: want.state + 1,
            expected_z1: want.z1,
            expected_z2: want.z2,
            matched,
        });
        occupancy.push(Occupancy {
            cycle: t as u64,
            jobs_at_start: jobs,
            max_jobs_in_cycle: obs.max_in_cycle.get(t).copied().unwrap_or(0),
        });
    }
    let mut violations = obs.lemmas.finish(&layout, &reports, cycles);
    violations.sort_by_key(|v| (v.cycle, v.time, v.lemma));
    Ok(VerifyReport {
        network: cn.doc.spec.name.clone(),
        normalized: cn.normalized,
        cycles,
        first_mismatch,
        violations,
        max_total_jobs: obs.max_total,
        reports,
        occupancy,
    })
}

/// Compiles `scm` (optionally normalized) and verifies it.
pub fn verify_theorem4(scm: &Scm, cycles: u64, normalized: bool) -> Result<VerifyReport, VerifyError> {
    let mut cn = compile_scm(scm)?;
    if normalized {
        cn = normalize_loads(&cn)?;
    }
    verify_compiled(scm, &cn, cycles, VerifyOptions::default())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Boundedness {
    /// Largest counter value seen by the machine.
    pub max_counter: u64,
    /// Every `jobs_at_start` is at most `2M + 1`.
    pub start_bound_holds: bool,
    /// Largest excess of in-cycle jobs over the current counter sum.
    pub intra_cycle_constant: u64,
    /// `jobs_at_start - (z1 + z2)` is the same in every cycle.
    pub start_offset: Option<u64>,
    /// Job count at cycle starts grows by at least one per cycle over the
    /// last half of the run.
    pub growing: bool,
}

pub fn verify_boundedness(report: &VerifyReport) -> Boundedness {
    let r = &report.reports;
    let occ = &report.occupancy;
    let max_counter = r.iter().map(|s| s.expected_z1.max(s.expected_z2)).max().unwrap_or(0);
    let start_bound_holds = occ.iter().all(|o| o.jobs_at_start <= 2 * max_counter + 1);
    let sums: Vec<u64> = r.iter().map(|s| s.expected_z1 + s.expected_z2).collect();
    // the last cycle is cut short at 3T + 1, so it is left out
    let intra_cycle_constant = occ
        .iter()
        .zip(&sums)
        .take(occ.len().saturating_sub(1))
        .map(|(o, z)| o.max_jobs_in_cycle.saturating_sub(*z))
        .max()
        .unwrap_or(0);
    let offsets: Vec<i128> = occ.iter().zip(&sums).map(|(o, z)| o.jobs_at_start as i128 - *z as i128).collect();
    let start_offset = match offsets.first() {
        Some(&o) if o >= 0 && offsets.iter().all(|&x| x == o) => Some(o as u64),
        _ => None,
    };
    let half = &occ[occ.len() / 2..];
    let growing = half.len() >= 2 && half.windows(2).all(|w| w[1].jobs_at_start > w[0].jobs_at_start);
    Boundedness {
        max_counter,
        start_bound_holds,
        intra_cycle_constant,
        start_offset,
        growing,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoadAudit {
    pub load: Rational,
    pub below_one: bool,
}

pub fn audit_loads(net: &Network) -> BTreeMap<ServerId, LoadAudit> {
    load_factors(net)
        .into_iter()
        .map(|(s, load)| {
            let below_one = load < Rational::ONE;
            (s, LoadAudit { load, below_one })
        })
        .collect()
}

/// Renames every server through `f(rank, id)`, where `rank` is the
/// server's position in sorted id order. Used to perturb the order in
/// which simultaneous work at different servers is processed.
pub fn relabel_servers(doc: &NetworkDoc, f: impl Fn(usize, &ServerId) -> ServerId) -> NetworkDoc {
    let ids = doc.spec.server_ids();
    let map: BTreeMap<&ServerId, ServerId> = ids.iter().enumerate().map(|(r, s)| (s, f(r, s))).collect();
    let mut out = doc.clone();
    for c in &mut out.spec.classes {
        c.server = map[&c.server].clone();
    }
    out
}

/// Relabeling that reverses the sorted server order.
pub fn reverse_servers(doc: &NetworkDoc) -> NetworkDoc {
    let n = doc.spec.server_ids().len();
    relabel_servers(doc, |r, s| ServerId(format!("{:05}:{s}", n - 1 - r)))
}

/// Class ids of the main network's token classes, by state number.
pub fn token_classes(cn: &CompiledNetwork) -> Vec<ClassId> {
    (1..=cn.m()).map(|k| cn.class(&format!("MN.02j[{k}]")).clone()).collect()
}

#[cfg(test)]
mod tests;
