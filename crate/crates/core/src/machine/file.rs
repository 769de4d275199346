//! JSON forms of machines.
//!
//! CM:
//! ```json
//! {"states": ["a", "b"],
//!  "gamma": [{"state": "a", "b1": 0, "b2": 0, "next": "b", "delta": [1, 0]}, ...],
//!  "initial": "a",
//!  "halting": {"state": "b", "z1": 0, "z2": 0}}
//! ```
//! SCM:
//! ```json
//! {"states": ["inc", "dec"],
//!  "alpha": [{"state": "inc", "b1": 0, "b2": 0, "next": "dec"}, ...],
//!  "beta": [{"state": "inc", "delta": [1, 0]}, ...],
//!  "initial": "inc"}
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Config, CounterMachine, Delta, MachineError, Scm};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GammaRow {
    state: String,
    b1: u8,
    b2: u8,
    next: String,
    delta: Delta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HaltRow {
    state: String,
    z1: u64,
    z2: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CmFile {
    states: Vec<String>,
    gamma: Vec<GammaRow>,
    initial: String,
    halting: HaltRow,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaRow {
    state: String,
    b1: u8,
    b2: u8,
    next: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaRow {
    state: String,
    delta: Delta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScmFile {
    states: Vec<String>,
    alpha: Vec<AlphaRow>,
    beta: Vec<BetaRow>,
    initial: String,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, MachineError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        MachineError::Parse {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })
}

struct Names<'a>(HashMap<&'a str, usize>);

impl<'a> Names<'a> {
    fn new(states: &'a [String]) -> Result<Self, MachineError> {
        if states.is_empty() {
            return Err(MachineError::Empty);
        }
        let mut map = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if map.insert(s.as_str(), i).is_some() {
                return Err(MachineError::DuplicateState(s.clone()));
            }
        }
        Ok(Names(map))
    }

    fn get(&self, s: &str) -> Result<usize, MachineError> {
        self.0
            .get(s)
            .copied()
            .ok_or_else(|| MachineError::UnknownState(s.to_string()))
    }
}

fn flag_slot(b1: u8, b2: u8) -> Result<usize, MachineError> {
    for b in [b1, b2] {
        if b > 1 {
            return Err(MachineError::BadFlag(b));
        }
    }
    Ok(2 * b1 as usize + b2 as usize)
}

/// Fills a total table from rows, rejecting gaps and duplicates.
fn fill<T: Copy>(
    states: &[String],
    names: &Names<'_>,
    rows: impl Iterator<Item = (String, u8, u8, T)>,
) -> Result<Vec<[T; 4]>, MachineError> {
    let mut table: Vec<[Option<T>; 4]> = vec![[None; 4]; states.len()];
    for (state, b1, b2, v) in rows {
        let s = names.get(&state)?;
        let slot = &mut table[s][flag_slot(b1, b2)?];
        if slot.is_some() {
            return Err(MachineError::DuplicateRow { state, b1, b2 });
        }
        *slot = Some(v);
    }
    table
        .into_iter()
        .enumerate()
        .map(|(s, row)| {
            let mut out = [None; 4];
            for (k, v) in row.into_iter().enumerate() {
                out[k] = Some(v.ok_or_else(|| MachineError::Partial {
                    state: states[s].clone(),
                    b1: (k / 2) as u8,
                    b2: (k % 2) as u8,
                })?);
            }
            Ok(out.map(Option::unwrap))
        })
        .collect()
}

pub fn parse_cm(text: &str) -> Result<CounterMachine, MachineError> {
    let f: CmFile = from_json(text)?;
    let names = Names::new(&f.states)?;
    let mut rows = Vec::new();
    for r in f.gamma {
        if !r.delta.is_standard() {
            return Err(MachineError::NonStandardDelta {
                state: r.state,
                delta: r.delta,
            });
        }
        let next = names.get(&r.next)?;
        rows.push((r.state, r.b1, r.b2, (next, r.delta)));
    }
    let gamma = fill(&f.states, &names, rows.into_iter())?;
    let initial = names.get(&f.initial)?;
    let halting = Config::new(names.get(&f.halting.state)?, f.halting.z1, f.halting.z2);
    Ok(CounterMachine {
        states: f.states,
        gamma,
        initial,
        halting,
    })
}

pub fn parse_scm(text: &str) -> Result<Scm, MachineError> {
    let f: ScmFile = from_json(text)?;
    let names = Names::new(&f.states)?;
    let mut rows = Vec::new();
    for r in f.alpha {
        let next = names.get(&r.next)?;
        rows.push((r.state, r.b1, r.b2, next));
    }
    let alpha = fill(&f.states, &names, rows.into_iter())?;
    let mut beta: Vec<Option<Delta>> = vec![None; f.states.len()];
    for r in f.beta {
        let s = names.get(&r.state)?;
        if beta[s].replace(r.delta).is_some() {
            return Err(MachineError::DuplicateState(r.state));
        }
    }
    let beta = beta
        .into_iter()
        .enumerate()
        .map(|(s, d)| {
            d.ok_or_else(|| MachineError::MissingBeta {
                table: "beta",
                state: f.states[s].clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let initial = names.get(&f.initial)?;
    Ok(Scm {
        states: f.states,
        alpha,
        beta,
        initial,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("machine serializes");
    s.push('\n');
    s
}

pub fn serialize_cm(cm: &CounterMachine) -> String {
    let mut gamma = Vec::new();
    for (s, row) in cm.gamma.iter().enumerate() {
        for (k, &(next, delta)) in row.iter().enumerate() {
            gamma.push(GammaRow {
                state: cm.states[s].clone(),
                b1: (k / 2) as u8,
                b2: (k % 2) as u8,
                next: cm.states[next].clone(),
                delta,
            });
        }
    }
    to_json(&CmFile {
        states: cm.states.clone(),
        gamma,
        initial: cm.states[cm.initial].clone(),
        halting: HaltRow {
            state: cm.states[cm.halting.state].clone(),
            z1: cm.halting.z1,
            z2: cm.halting.z2,
        },
    })
}

pub fn serialize_scm(scm: &Scm) -> String {
    let mut alpha = Vec::new();
    for (s, row) in scm.alpha.iter().enumerate() {
        for (k, &next) in row.iter().enumerate() {
            alpha.push(AlphaRow {
                state: scm.states[s].clone(),
                b1: (k / 2) as u8,
                b2: (k % 2) as u8,
                next: scm.states[next].clone(),
            });
        }
    }
    let beta = scm
        .beta
        .iter()
        .enumerate()
        .map(|(s, &delta)| BetaRow {
            state: scm.states[s].clone(),
            delta,
        })
        .collect();
    to_json(&ScmFile {
        states: scm.states.clone(),
        alpha,
        beta,
        initial: scm.states[scm.initial].clone(),
    })
}
