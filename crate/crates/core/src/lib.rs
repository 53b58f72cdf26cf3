//! Self-stabilizing population protocols on arbitrary interaction graphs.
//!
//! This crate is `no_std` (it needs `alloc`) and holds everything that does
//! not touch the outside world:
//!
//! - [`graph`]: validated population graphs with cached hop metrics.
//! - [`engine`]: the uniformly random scheduler, configurations, token
//!   tracking and the run-to-safety loop.
//! - [`prank`]: the token-based self-stabilizing ranking protocol.
//! - [`pneighbor`]: neighbor recognition built on top of ranking.
//! - [`oracles`]: problem predicates, the closed safe sets, exact Markov
//!   chain solvers for token walks, Monte Carlo estimators and the label
//!   game.
//! - [`verifier`]: exhaustive final-set (bottom SCC) verification and the
//!   degree-recognition impossibility search.
//!
//! File formats, JSON/CSV records and the command-line front end live in the
//! `poplab` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod engine;
pub mod graph;
pub mod labelset;
pub mod oracles;
pub mod pneighbor;
pub mod prank;
pub mod strawman;
pub mod verifier;

pub use engine::{
    apply_interaction, draw_pair, run_until, sample_uniform_config, trial_seed, Configuration,
    EngineError, FiniteProtocol, InteractionTrace, Protocol, ProtocolParams, RunLimits, RunResult,
    TokenTracker,
};
pub use graph::{Graph, GraphError, GraphKind, GraphMetrics};
pub use labelset::LabelSet;
pub use pneighbor::{NeighborState, PNeighbor};
pub use prank::{AgentColor, PRank, RankState, TokenColor};
