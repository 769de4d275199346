//! Deterministic multiclass queueing networks with exact rational time,
//! two-counter machines, a compiler from simplified counter machines to
//! networks, and a harness that checks the compiled network tracks the
//! machine cycle by cycle.

pub mod compile;
pub mod machine;
pub mod model;
pub mod rational;
pub mod sim;
pub mod verify;

pub use model::{
    count_arrivals, load_factors, parse_network, serialize_network, solve_traffic,
    ArrivalProcess, Capacity, ClassId, ClassSpec, InServiceEntry, InitialCondition, ModelError,
    Network, NetworkDoc, NetworkSpec, ServerId,
};
pub use rational::{rat, Rational};

/// Any failure from the pipeline, for callers that do not care which stage.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Machine(#[from] machine::MachineError),
    #[error(transparent)]
    Compile(#[from] compile::CompileError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
}
