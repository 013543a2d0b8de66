//! Routing workbench for wireless mesh networks.
//!
//! Links are scored by a Mamdani fuzzy system over throughput, delay, jitter
//! and residual energy; source-to-terminal routes are then searched with the
//! Big Bang-Big Crunch metaheuristic and checked against exact oracles.
//!
//! * [`topology`] builds unit-disk graphs and applies node churn.
//! * [`fuzzy`] turns link metrics into a cost in `(0, 1)`.
//! * [`bbbc`] holds the optimizer, both the continuous form and the path form.
//! * [`oracle`] computes exact shortest paths for verification.
//! * [`sim`] drives multi-epoch scenarios and produces report rows.

pub mod bbbc;
pub mod error;
pub mod fuzzy;
pub mod oracle;
pub mod sim;
pub mod topology;

pub use bbbc::{
    center_of_mass, optimize_continuous, optimize_path, path_cost, random_path, BbbcConfig, ContinuousOutcome,
    GenerationRecord, Path, Termination, Trace,
};
pub use error::{Error, Result};
pub use fuzzy::{CostInputs, FuzzyInferenceSystem, RuleBase};
pub use oracle::{brute_force_shortest, dijkstra};
pub use sim::{compare_with_oracle, cost_all_links, run_scenario, EpochRecord, RoutingTable, ScenarioConfig};
pub use topology::{
    generate_random_topology, Area, ChurnEvent, LinkMetrics, MetricDistributions, Node, NodeId, Topology,
    TopologyParams,
};
