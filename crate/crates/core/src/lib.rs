//! Load-rebalancing feasibility for consistent-hashing key-value stores that
//! scale out one node at a time under a sustained write load.
//!
//! * [`ring`]: token/partition ring with join, leave, lookup and balance
//!   statistics.
//! * [`bounds`]: closed-form write-rate limits for the four scale-out
//!   scenarios (increasing or stable writes, concurrent or clear
//!   stabilization) and the quantities they are built from.
//! * [`sim`]: fluid event-driven simulator that reproduces those limits
//!   independently and classifies breakdowns.
//! * [`cli`]: the `dht-rebalance` command line.

pub mod bounds;
pub mod cli;
pub mod ring;
pub mod sim;
pub mod units;

pub use bounds::{
    BoundKind, BoundReport, ClusterParams, Scenario, StabilizationMode, WorkloadKind, WritePattern,
};
pub use ring::{NodeId, RingState, Strategy};
pub use sim::{SimConfig, SimOutcome, SimRun};
