//! Compiles a simplified counter machine into a queueing network whose
//! queue contents, read every three time units, reproduce the machine's
//! configuration.
//!
//! Each counter `i` lives in a subnetwork `SN{i}` as the workload of a
//! two-server crossing network. The main network `MN` carries one token
//! job whose class encodes the machine state; on its way it probes both
//! subnetworks for emptiness and is steered to the next state's servers.
//!
//! Class ids: `{i}{s}{k}` in `SN{i}` (e.g. `112`), and in `MN` `011`, `012`,
//! `02_{j}`, `03_{j}`, `3_{k}_{c}`, `3_{j}_5`, `4_{j}_{1,2,3}` with 1-based
//! state numbers. Servers: `S{i}{s}`, `S01`, `S02`, `S3_{j}`, `S4_{j}`.

mod normalize;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::machine::{Delta, Scm};
use crate::model::{
    ArrivalProcess, Capacity, ClassId, ClassSpec, InServiceEntry, InitialCondition, NetworkDoc,
    NetworkSpec,
};
use crate::rational::{rat, Rational};

pub use normalize::normalize_loads;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("state {state:?} is reachable and has counter change {delta}, which the network cannot apply")]
    NonStandardBeta { state: String, delta: Delta },
    #[error("network is already normalized")]
    AlreadyNormalized,
    #[error("machine has no states")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledNetwork {
    pub doc: NetworkDoc,
    /// SCM state name to its 1-based number `j`.
    pub scm_state_index: BTreeMap<String, usize>,
    pub normalized: bool,
}

impl CompiledNetwork {
    pub fn m(&self) -> usize {
        self.scm_state_index.len()
    }

    /// Class id behind a directory key such as `SN1.i12` or `MN.02j[3]`.
    pub fn class(&self, key: &str) -> &ClassId {
        self.doc
            .directory
            .get(key)
            .unwrap_or_else(|| panic!("no directory entry {key}"))
    }

    /// Directory keys of subnetwork `i` (1 or 2), or of the main network for 0.
    pub fn part(&self, i: usize) -> impl Iterator<Item = (&String, &ClassId)> {
        let prefix = if i == 0 { "MN.".to_string() } else { format!("SN{i}.") };
        self.doc
            .directory
            .iter()
            .filter(move |(k, _)| k.starts_with(&prefix))
    }
}

pub(crate) struct Builder {
    pub classes: Vec<ClassSpec>,
    pub directory: BTreeMap<String, ClassId>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    pub fn add(
        &mut self,
        key: String,
        id: String,
        server: String,
        service: Rational,
        capacity: Capacity,
        priority: i64,
        next: Option<String>,
    ) -> &mut ClassSpec {
        let id = ClassId(id);
        self.directory.insert(key, id.clone());
        self.classes.push(ClassSpec {
            id,
            server: server.as_str().into(),
            service,
            capacity,
            next: next.map(ClassId),
            priority,
            arrival: None,
        });
        self.classes.last_mut().unwrap()
    }
}

const INF: Capacity = Capacity::Infinite;
const ZERO: Capacity = Capacity::Finite(0);

fn every(period: i128, offset: Rational, start: u64) -> Option<ArrivalProcess> {
    Some(ArrivalProcess::periodic(Rational::from_integer(period), offset, start))
}

/// `alpha(s_k, b1, b2)` for chain stage `c`: (1,1), (0,1), (1,0), (0,0).
pub(crate) const CHAIN_FLAGS: [usize; 4] = [3, 1, 2, 0];

pub(crate) fn mn_key(name: &str, j: usize) -> String {
    format!("MN.{name}[{j}]")
}

pub(crate) fn chain_key(k: usize, c: usize) -> String {
    format!("MN.3k{c}[k={k}]")
}

pub fn compile_scm(scm: &Scm) -> Result<CompiledNetwork, CompileError> {
    let m = scm.num_states();
    if m == 0 {
        return Err(CompileError::Empty);
    }
    let reachable = scm.reachable();
    for (s, &live) in reachable.iter().enumerate() {
        if live && !scm.beta[s].is_standard() {
            return Err(CompileError::NonStandardBeta {
                state: scm.states[s].clone(),
                delta: scm.beta[s],
            });
        }
    }

    let mut b = Builder {
        classes: Vec::new(),
        directory: BTreeMap::new(),
    };
    for i in 1..=2 {
        add_subnetwork(&mut b, i);
    }

    b.add("MN.011".into(), "011".into(), "S01".into(), rat(9, 100), INF, 1, None);
    b.add("MN.012".into(), "012".into(), "S01".into(), rat(18, 100), INF, 2, None);
    for j in 1..=m {
        b.add(mn_key("03j", j), format!("03_{j}"), "S01".into(), Rational::ZERO, INF, 3, Some(format!("3_{j}_1")));
        b.add(mn_key("02j", j), format!("02_{j}"), "S02".into(), rat(271, 100), INF, 1, Some(format!("03_{j}")));
    }
    for k in 1..=m {
        for c in 1..=4 {
            let target = scm.alpha[k - 1][CHAIN_FLAGS[c - 1]] + 1;
            let next = (c < 4).then(|| format!("3_{k}_{}", c + 1));
            b.add(chain_key(k, c), format!("3_{k}_{c}"), format!("S3_{target}"), rat(9, 100), INF, 1, next);
        }
    }
    for j in 1..=m {
        b.add(mn_key("3j5", j), format!("3_{j}_5"), format!("S3_{j}"), Rational::ZERO, ZERO, 2, Some(format!("4_{j}_1")))
            .arrival = every(3, rat(-1, 100), 1);
        let s4 = format!("S4_{j}");
        b.add(mn_key("4j1", j), format!("4_{j}_1"), s4.clone(), rat(1, 50), INF, 1, None);
        b.add(mn_key("4j2", j), format!("4_{j}_2"), s4.clone(), Rational::ZERO, ZERO, 2, Some(format!("02_{j}")))
            .arrival = every(3, Rational::ZERO, 1);
        let exit = match scm.beta[j - 1] {
            Delta::DEC1 => Some("141"),
            Delta::INC1 => Some("151"),
            Delta::DEC2 => Some("241"),
            Delta::INC2 => Some("251"),
            // (0,0), and changes the network cannot apply on unreachable states
            _ => None,
        };
        b.add(mn_key("4j3", j), format!("4_{j}_3"), s4, Rational::ZERO, ZERO, 3, exit.map(String::from))
            .arrival = every(3, Rational::ZERO, 1);
    }

    let initial = InitialCondition {
        queued: BTreeMap::new(),
        in_service: vec![InServiceEntry {
            class: ClassId(format!("02_{}", scm.initial + 1)),
            remaining: rat(271, 100),
        }],
    };
    let doc = NetworkDoc {
        spec: NetworkSpec {
            name: format!("compiled-{m}"),
            classes: b.classes,
        },
        initial,
        directory: b.directory,
    };
    Ok(CompiledNetwork {
        doc,
        scm_state_index: scm
            .states
            .iter()
            .enumerate()
            .map(|(j, s)| (s.clone(), j + 1))
            .collect(),
        normalized: false,
    })
}

fn add_subnetwork(b: &mut Builder, i: usize) {
    let id = |s: usize, k: usize| format!("{i}{s}{k}");
    let key = |s: usize, k: usize| format!("SN{i}.i{s}{k}");
    let server = |s: usize| format!("S{i}{s}");
    let z = Rational::ZERO;
    let half = rat(1, 2);

    b.add(key(1, 1), id(1, 1), server(1), z, INF, 2, Some(id(2, 1)));
    b.add(key(1, 2), id(1, 2), server(1), half, INF, 1, None);
    b.add(key(1, 3), id(1, 3), server(1), z, ZERO, 3, Some(id(3, 1))).arrival = every(3, rat(16, 10), 0);
    b.add(key(1, 4), id(1, 4), server(1), z, ZERO, 4, Some(id(3, 1))).arrival = every(3, rat(26, 10), 0);

    b.add(key(2, 1), id(2, 1), server(2), half, INF, 1, None);
    b.add(key(2, 2), id(2, 2), server(2), z, INF, 2, Some(id(1, 2))).arrival = every(1, z, 0);
    b.add(key(2, 3), id(2, 3), server(2), z, ZERO, 3, Some(id(3, 1))).arrival = every(3, rat(21, 10), 0);

    b.add(key(3, 1), id(3, 1), server(3), rat(1, 25), INF, 2, None);
    b.add(key(3, 2), id(3, 2), server(3), rat(11, 10), INF, 1, None).arrival = every(3, rat(3, 2), 0);
    b.add(key(3, 3), id(3, 3), server(3), z, ZERO, 3, Some(format!("01{i}"))).arrival = every(3, rat(27, 10), 0);

    b.add(key(4, 1), id(4, 1), server(4), rat(1, 5), INF, 1, None);
    b.add(key(4, 2), id(4, 2), server(4), z, ZERO, 2, Some(id(1, 1))).arrival = every(1, rat(2, 100), 0);

    b.add(key(5, 1), id(5, 1), server(5), rat(1, 50), INF, 1, Some(id(1, 1)));
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetworkStats {
    pub servers: usize,
    pub classes: usize,
    /// Class ids grouped by part: `SN1`, `SN2`, `MN`.
    pub parts: BTreeMap<String, Vec<ClassId>>,
}

pub fn network_stats(cn: &CompiledNetwork) -> NetworkStats {
    let spec = &cn.doc.spec;
    let mut parts: BTreeMap<String, Vec<ClassId>> = BTreeMap::new();
    for (key, id) in &cn.doc.directory {
        let part = key.split('.').next().unwrap_or("").to_string();
        parts.entry(part).or_default().push(id.clone());
    }
    for v in parts.values_mut() {
        v.sort();
    }
    NetworkStats {
        servers: spec.server_ids().len(),
        classes: spec.classes.len(),
        parts,
    }
}
