//! Deterministic discrete-event simulator for leaderless DAG consensus:
//! approval-weight voting on a gossiped Tangle, an optional common-coin
//! tie breaker, and a Bait-and-Switch adversary.
//!
//! Weight bookkeeping is generic over [`Scalar`]; the aliases below fix the
//! two instantiations used in practice. Simulation runs use `f64`, while
//! exact rationals serve as a reference in tests.

pub mod agents;
pub mod config;
pub mod consensus;
pub mod engine;
pub mod ids;
pub mod ledger;
pub mod metrics;
pub mod scalar;
pub mod srrs;
pub mod tangle;
pub mod topology;

use num_rational::Rational64;

pub use config::{ConfigError, SimConfig};
pub use engine::{run, SimError, SimTime};
pub use ids::{BlockId, ColorId, ConflictSetId, NodeId};
pub use metrics::{BatchSpec, RunResult};
pub use scalar::Scalar;

pub type Weights = config::WeightTable<f64>;
pub type ExactWeights = config::WeightTable<Rational64>;
pub type Tracker = consensus::ApprovalTracker<f64>;
pub type ExactTracker = consensus::ApprovalTracker<Rational64>;
pub type Sim = engine::Simulator<f64>;
pub type ExactSim = engine::Simulator<Rational64>;
