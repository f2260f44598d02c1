//! Solver and simulator for linear-quadratic pursuit-evasion games in which
//! looking at the opponent costs money.
//!
//! Both players steer a noisy linear relative state; neither sees it between
//! observation instants. An observation is an exact snapshot that is revealed
//! to *both* sides, and each player pays a fixed price per snapshot they
//! trigger. The library computes, for the side with the maneuverability
//! advantage, how many snapshots to buy and exactly when — then verifies the
//! answer by Monte Carlo simulation.
//!
//! Start with the `examples/` directory: each major capability (schedule
//! solving, path simulation, Monte Carlo validation, infinite-horizon
//! sampling, price sweeps) has a runnable walkthrough. The same pipelines are
//! exposed as subcommands of the thin `pursuit-evasion` binary via
//! [`cli::run_command`].

pub mod analysis;
pub mod ce;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod export;
pub mod lqg;
pub mod model;

#[cfg(test)]
pub(crate) mod testutil;

pub use analysis::{ClosedLoopReport, CostBreakdown, MonotonicityReport};
pub use ce::{CESolution, ObservationPlan, PeriodicSolution};
pub use config::RunConfig;
pub use export::{PlotStyle, SweepRow};
pub use engine::{MonteCarloSummary, TrajectoryRecord};
pub use error::{Error, Result};
pub use model::{Dominance, DominanceClass, GameSpec};
