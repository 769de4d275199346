//! Two-counter machines (CM) and simplified counter machines (SCM).
//!
//! A CM maps `(state, z1 > 0, z2 > 0)` to a next state and a counter
//! change. In an SCM the change is a function of the new state alone:
//! `s' = alpha(s, b1, b2)` followed by `z += beta(s')`.

mod file;
pub mod library;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use file::{parse_cm, parse_scm, serialize_cm, serialize_scm};

/// A counter change `(d1, d2)` with each component in {-1, 0, 1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i8; 2]", into = "[i8; 2]")]
pub struct Delta(i8, i8);

impl Delta {
    pub const DEC1: Delta = Delta(-1, 0);
    pub const DEC2: Delta = Delta(0, -1);
    pub const NONE: Delta = Delta(0, 0);
    pub const INC1: Delta = Delta(1, 0);
    pub const INC2: Delta = Delta(0, 1);

    /// The five changes a machine may request.
    pub const STANDARD: [Delta; 5] = [Delta::DEC1, Delta::DEC2, Delta::NONE, Delta::INC1, Delta::INC2];

    pub fn new(d1: i8, d2: i8) -> Option<Delta> {
        ((-1..=1).contains(&d1) && (-1..=1).contains(&d2)).then_some(Delta(d1, d2))
    }

    /// All nine changes in {-1,0,1}^2, row-major.
    pub fn all() -> impl Iterator<Item = Delta> {
        (-1..=1).flat_map(|a| (-1..=1).map(move |b| Delta(a, b)))
    }

    pub fn d1(&self) -> i8 {
        self.0
    }

    pub fn d2(&self) -> i8 {
        self.1
    }

    pub fn is_standard(&self) -> bool {
        Delta::STANDARD.contains(self)
    }
}

impl TryFrom<[i8; 2]> for Delta {
    type Error = String;
    fn try_from(v: [i8; 2]) -> Result<Self, String> {
        Delta::new(v[0], v[1]).ok_or_else(|| format!("delta components must be in {{-1,0,1}}, got {v:?}"))
    }
}

impl From<Delta> for [i8; 2] {
    fn from(d: Delta) -> Self {
        [d.0, d.1]
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// `(state index, z1, z2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Config {
    pub state: usize,
    pub z1: u64,
    pub z2: u64,
}

impl Config {
    pub fn new(state: usize, z1: u64, z2: u64) -> Self {
        Config { state, z1, z2 }
    }

    /// Index into a 4-row transition block: `2*b1 + b2`.
    pub fn flags(&self) -> usize {
        2 * (self.z1 > 0) as usize + (self.z2 > 0) as usize
    }

    fn apply(&self, next: usize, d: Delta, step: u64) -> Result<Config, MachineError> {
        let z1 = self.z1 as i128 + d.0 as i128;
        let z2 = self.z2 as i128 + d.1 as i128;
        if z1 < 0 || z2 < 0 {
            return Err(MachineError::NegativeCounter { step, from: *self, delta: d });
        }
        Ok(Config::new(next, z1 as u64, z2 as u64))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("step {step}: delta {delta} from state {} with counters ({}, {}) makes a counter negative", from.state, from.z1, from.z2)]
    NegativeCounter { step: u64, from: Config, delta: Delta },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("transition table has no row for ({state}, {b1}, {b2})")]
    Partial { state: String, b1: u8, b2: u8 },
    #[error("transition table has two rows for ({state}, {b1}, {b2})")]
    DuplicateRow { state: String, b1: u8, b2: u8 },
    #[error("{table} has no entry for state {state:?}")]
    MissingBeta { table: &'static str, state: String },
    #[error("delta {delta} for {state:?} is not one of the five allowed changes")]
    NonStandardDelta { state: String, delta: Delta },
    #[error("flag values must be 0 or 1, got {0}")]
    BadFlag(u8),
    #[error("machine has no states")]
    Empty,
    #[error("parse error at line {line}, column {column} ({path}): {message}")]
    Parse {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },
}

/// Counter machine with transition function `gamma[state][2*b1 + b2]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterMachine {
    pub states: Vec<String>,
    pub gamma: Vec<[(usize, Delta); 4]>,
    pub initial: usize,
    pub halting: Config,
}

/// Simplified counter machine: `alpha[state][2*b1 + b2]` and `beta[state]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scm {
    pub states: Vec<String>,
    pub alpha: Vec<[usize; 4]>,
    pub beta: Vec<Delta>,
    pub initial: usize,
}

impl CounterMachine {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
}

impl Scm {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// `(s', beta(s'))`, the transition induced on a CM.
    pub fn gamma(&self, state: usize, flags: usize) -> (usize, Delta) {
        let next = self.alpha[state][flags];
        (next, self.beta[next])
    }

    /// States reachable from the initial state in the transition graph,
    /// ignoring counter values.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for &n in &self.alpha[s] {
                if !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        seen
    }

    pub fn start(&self) -> Config {
        Config::new(self.initial, 0, 0)
    }
}

pub fn cm_step(cm: &CounterMachine, c: &Config) -> Result<Config, MachineError> {
    cm_step_at(cm, c, 0)
}

fn cm_step_at(cm: &CounterMachine, c: &Config, step: u64) -> Result<Config, MachineError> {
    let (next, d) = cm.gamma[c.state][c.flags()];
    c.apply(next, d, step)
}

pub fn scm_step(scm: &Scm, c: &Config) -> Result<Config, MachineError> {
    scm_step_at(scm, c, 0)
}

fn scm_step_at(scm: &Scm, c: &Config, step: u64) -> Result<Config, MachineError> {
    let (next, d) = scm.gamma(c.state, c.flags());
    c.apply(next, d, step)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Halted,
    Running,
    Error(MachineError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    /// Configurations visited, starting with the initial one.
    pub trajectory: Vec<Config>,
    pub outcome: Outcome,
}

impl Run {
    pub fn final_config(&self) -> &Config {
        self.trajectory.last().expect("trajectory holds the start")
    }

    pub fn into_result(self) -> Result<Vec<Config>, MachineError> {
        match self.outcome {
            Outcome::Error(e) => Err(e),
            _ => Ok(self.trajectory),
        }
    }
}

/// Runs up to `budget` steps, stopping once a step lands on the halting
/// configuration.
pub fn cm_run(cm: &CounterMachine, start: Config, budget: u64) -> Run {
    let mut trajectory = vec![start];
    for k in 1..=budget {
        let cur = *trajectory.last().unwrap();
        match cm_step_at(cm, &cur, k) {
            Ok(next) => {
                trajectory.push(next);
                if next == cm.halting {
                    return Run { trajectory, outcome: Outcome::Halted };
                }
            }
            Err(e) => return Run { trajectory, outcome: Outcome::Error(e) },
        }
    }
    Run { trajectory, outcome: Outcome::Running }
}

pub fn scm_run(scm: &Scm, start: Config, budget: u64) -> Run {
    scm_run_until(scm, start, budget, None)
}

/// Like [`scm_run`] with an optional halting configuration.
pub fn scm_run_until(scm: &Scm, start: Config, budget: u64, halting: Option<Config>) -> Run {
    let mut trajectory = vec![start];
    for k in 1..=budget {
        let cur = *trajectory.last().unwrap();
        match scm_step_at(scm, &cur, k) {
            Ok(next) => {
                trajectory.push(next);
                if Some(next) == halting {
                    return Run { trajectory, outcome: Outcome::Halted };
                }
            }
            Err(e) => return Run { trajectory, outcome: Outcome::Error(e) },
        }
    }
    Run { trajectory, outcome: Outcome::Running }
}

/// Name of the odd copy of a CM state.
pub fn odd_name(s: &str) -> String {
    format!("{s}.odd")
}

/// Name of the even copy of a CM state tagged with `d`.
pub fn even_name(s: &str, d: Delta) -> String {
    format!("{s}.even[{},{}]", d.0, d.1)
}

/// Each CM step becomes two SCM steps: first into an even copy of the
/// target state tagged with the change (so beta can apply it), then into
/// the target's odd copy with no change. Odd copies come first, in CM state
/// order, followed by the nine even copies of each state.
pub fn cm_to_scm(cm: &CounterMachine) -> Scm {
    let m = cm.num_states();
    let tags: Vec<Delta> = Delta::all().collect();
    let even = |l: usize, d: Delta| m + 9 * l + tags.iter().position(|&t| t == d).unwrap();

    let mut states: Vec<String> = cm.states.iter().map(|s| odd_name(s)).collect();
    let mut alpha = Vec::with_capacity(10 * m);
    let mut beta = Vec::with_capacity(10 * m);
    for j in 0..m {
        alpha.push(cm.gamma[j].map(|(l, d)| even(l, d)));
        beta.push(Delta::NONE);
    }
    for (l, s) in cm.states.iter().enumerate() {
        for &d in &tags {
            states.push(even_name(s, d));
            alpha.push([l; 4]);
            beta.push(d);
        }
    }
    Scm {
        states,
        alpha,
        beta,
        initial: cm.initial,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    pub max_z1: u64,
    pub max_z2: u64,
    pub halted: bool,
    pub steps: u64,
}

/// Counter maxima along at most `budget` steps. Only a semi-decision: a
/// machine that has not halted may still grow later.
pub fn bounded_probe(scm: &Scm, start: Config, budget: u64, halting: Option<Config>) -> Result<ProbeResult, MachineError> {
    let run = scm_run_until(scm, start, budget, halting);
    let halted = run.outcome == Outcome::Halted;
    let traj = run.into_result()?;
    Ok(ProbeResult {
        max_z1: traj.iter().map(|c| c.z1).max().unwrap(),
        max_z2: traj.iter().map(|c| c.z2).max().unwrap(),
        halted,
        steps: traj.len() as u64 - 1,
    })
}

#[cfg(test)]
mod tests;
