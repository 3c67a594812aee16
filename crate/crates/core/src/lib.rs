//! Markov jump process approximations of stochastic PDEs on the circle.
//!
//! A model ([`ModelSpec`]) is semi-discretized on a periodic grid
//! ([`Semidiscretization`]) and simulated exactly in continuous time by a
//! [`JumpKernel`] that moves the state by `±h` along eigenvectors of the
//! linear drift. [`oracles`] holds closed-form references, [`baselines`] the
//! classical comparison schemes and [`estimators`] the Monte Carlo drivers.

pub mod baselines;
pub mod basis;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod kernel;
pub mod model;
pub mod oracles;
pub mod problem;
pub mod rng;

pub use basis::{Mode, ModeShape, SpectralBasis, SpectralState};
pub use error::{Error, Result};
pub use grid::Grid;
pub use kernel::{
    EventLog, EventRecord, JumpKernel, JumpState, KernelOptions, Observer, RateTable,
    SimulationOutcome, Variant,
};
pub use model::{FourierCoeffs, InitialCondition, ModelKind, ModelSpec, Nonlinearity};
pub use oracles::LangevinTarget;
pub use problem::Semidiscretization;
pub use rng::RngStream;

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
