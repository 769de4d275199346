//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use qnet_core::compile::{compile_scm, normalize_loads};
use qnet_core::machine::Scm;
use qnet_core::sim::{ProbeSchedule, SimState, TraceRecorder};
use qnet_core::{InitialCondition, Network, NetworkDoc, Rational};

pub struct Fixture {
    pub net: Arc<Network>,
    pub initial: InitialCondition,
}

impl Fixture {
    pub fn from_doc(doc: &NetworkDoc) -> Self {
        Fixture {
            net: Arc::new(doc.spec.clone().validate().expect("fixture network is valid")),
            initial: doc.initial.clone(),
        }
    }

    pub fn compiled(scm: &Scm, normalized: bool) -> Self {
        let mut cn = compile_scm(scm).expect("fixture machine compiles");
        if normalized {
            cn = normalize_loads(&cn).unwrap();
        }
        Self::from_doc(&cn.doc)
    }

    /// Simulates to `horizon` and returns the number of events.
    pub fn run(&self, horizon: u64) -> usize {
        let mut sim = SimState::new(self.net.clone(), &self.initial).unwrap();
        let mut rec = TraceRecorder::default();
        sim.run_until(Rational::from(horizon), &ProbeSchedule::None, &mut rec).unwrap();
        rec.events.len()
    }
}
