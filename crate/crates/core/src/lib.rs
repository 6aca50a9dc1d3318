//! Finite-population imitation dynamics with memory.
//!
//! The crate simulates a population of `N` agents that revise strategies one
//! at a time using payoffs computed from a delayed (or kernel-averaged) view
//! of the population, integrates the delayed replicator equation that the
//! process follows for large `N`, and measures how the two relate: deviation
//! tails, fixation-time scaling, time averages and the delay-induced loss of
//! stability of the mixed equilibrium.
//!
//! Module map:
//!
//! * [`game`] payoff matrices, delay kernels, fitness and 2×2 closed forms
//! * [`stochastic`] the non-Markovian imitation process
//! * [`dde`] explicit Euler integration of the delayed replicator equation
//! * [`analysis`] deviation, fixation, time-average and stability analysis
//! * [`config`] experiment configuration parsing and validation
//! * [`experiment`] experiment runner and presets writing CSV artifacts

pub mod analysis;
pub mod config;
pub mod dde;
mod error;
pub mod experiment;
pub mod game;
pub mod io;
mod simplex;
pub mod stochastic;
mod trajectory;

pub use error::{Error, Result};
pub use simplex::SimplexVector;
pub use trajectory::Trajectory;
