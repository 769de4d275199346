//! Network description types: classes, servers, arrival processes and
//! initial conditions, plus validation into an indexed [`Network`].

mod format;
mod network;
mod traffic;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::Rational;

pub use format::{parse_network, serialize_network, NetworkDoc};
pub use network::{Network, ServerInfo};
pub use traffic::{load_factors, solve_traffic};

/// Identifier of a job class (and of its buffer).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub String);

/// Identifier of a single-server station.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServerId(pub String);

macro_rules! string_id {
    ($t:ident) => {
        impl $t {
            pub fn new(s: impl Into<String>) -> Self {
                $t(s.into())
            }
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", self.0)
            }
        }
        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                $t(s.to_string())
            }
        }
    };
}

string_id!(ClassId);
string_id!(ServerId);

/// Waiting room of a buffer, not counting the job in service.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Capacity {
    Finite(u64),
    Infinite,
}

impl Capacity {
    pub fn is_zero(&self) -> bool {
        matches!(self, Capacity::Finite(0))
    }

    /// Whether a buffer holding `waiting` jobs can take one more.
    pub fn has_room(&self, waiting: usize) -> bool {
        match self {
            Capacity::Finite(b) => (waiting as u64) < *b,
            Capacity::Infinite => true,
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Capacity::Finite(b) => serializer.serialize_u64(*b),
            Capacity::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) if n >= 0 => Ok(Capacity::Finite(n as u64)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!(
                "capacity must be a nonnegative integer or \"inf\", got {n}"
            ))),
            Raw::Text(s) if s == "inf" => Ok(Capacity::Infinite),
            Raw::Text(s) => match s.parse::<u64>() {
                Ok(n) => Ok(Capacity::Finite(n)),
                Err(_) => Err(serde::de::Error::custom(format!(
                    "capacity must be a nonnegative integer or \"inf\", got {s:?}"
                ))),
            },
        }
    }
}

/// Interarrival period; `None` is an infinite period (no arrivals).
fn ser_period<S: Serializer>(p: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(r) => s.collect_str(r),
        None => s.serialize_str("inf"),
    }
}

fn de_period<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
    let s = String::deserialize(d)?;
    if s == "inf" {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

/// Deterministic external arrivals at `period * n + offset` for
/// `n >= start_index`, restricted to nonnegative times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrivalProcess {
    #[serde(serialize_with = "ser_period", deserialize_with = "de_period")]
    pub period: Option<Rational>,
    pub offset: Rational,
    #[serde(default)]
    pub start_index: u64,
}

impl ArrivalProcess {
    pub fn periodic(period: Rational, offset: Rational, start_index: u64) -> Self {
        ArrivalProcess {
            period: Some(period),
            offset,
            start_index,
        }
    }

    /// External arrival rate `1 / period` (zero for an infinite period).
    pub fn rate(&self) -> Rational {
        match self.period {
            Some(p) => p.recip(),
            None => Rational::ZERO,
        }
    }

    /// Index of the first arrival that is both allowed and at a time >= 0.
    pub fn first_index(&self) -> Option<u64> {
        let p = self.period?;
        let needed = (-self.offset / p).ceil().max(0) as u64;
        Some(needed.max(self.start_index))
    }

    pub fn instant(&self, n: u64) -> Option<Rational> {
        self.period
            .map(|p| p * Rational::from_integer(n as i128) + self.offset)
    }
}

/// Number of arrivals of `proc` in `[0, t]`.
pub fn count_arrivals(proc: &ArrivalProcess, t: Rational) -> u64 {
    let (Some(p), Some(first)) = (proc.period, proc.first_index()) else {
        return 0;
    };
    if t < self::Rational::ZERO {
        return 0;
    }
    let last = ((t - proc.offset) / p).floor();
    if last < first as i128 {
        0
    } else {
        (last - first as i128 + 1) as u64
    }
}

/// One job class: its server, service time, buffer, routing and priority.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub id: ClassId,
    pub server: ServerId,
    pub service: Rational,
    pub capacity: Capacity,
    #[serde(default)]
    pub next: Option<ClassId>,
    /// Smaller is served first; ties are broken by class id.
    pub priority: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<ArrivalProcess>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub classes: Vec<ClassSpec>,
}

impl NetworkSpec {
    pub fn class(&self, id: &ClassId) -> Option<&ClassSpec> {
        self.classes.iter().find(|c| &c.id == id)
    }

    pub fn class_mut(&mut self, id: &ClassId) -> Option<&mut ClassSpec> {
        self.classes.iter_mut().find(|c| &c.id == id)
    }

    /// Server ids in sorted order.
    pub fn server_ids(&self) -> Vec<ServerId> {
        let mut ids: Vec<ServerId> = self.classes.iter().map(|c| c.server.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn validate(self) -> Result<Network, ModelError> {
        Network::new(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InServiceEntry {
    pub class: ClassId,
    pub remaining: Rational,
}

/// Queue contents at time zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialCondition {
    #[serde(default)]
    pub queued: BTreeMap<ClassId, u64>,
    #[serde(default)]
    pub in_service: Vec<InServiceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("routing contains a cycle through class {class}")]
    CyclicRouting { class: ClassId },
    #[error("class {class} routes to unknown class {next}")]
    DanglingNextClass { class: ClassId, next: ClassId },
    #[error("class {class} has non-positive priority {priority}")]
    BadPriority { class: ClassId, priority: i64 },
    #[error("class {class}: {what}")]
    NegativeTime { class: ClassId, what: String },
    #[error("class {class} is defined more than once")]
    DuplicateClass { class: ClassId },
    #[error("initial condition: {0}")]
    BadInitial(String),
    #[error("parse error at line {line}, column {column} ({path}): {message}")]
    Parse {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },
}
