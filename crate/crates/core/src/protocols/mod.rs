//! Protocols built from lab operations: exact outcome trees, Monte Carlo
//! runs, superposition-versus-mixture discrimination, and the scenario catalog.

pub mod catalog;
mod discriminate;
mod montecarlo;
mod spec;
pub mod stats;
mod tree;

pub use catalog::{build_scenario, Scenario, ScenarioProtocol, SCENARIO_NAMES};
pub use discriminate::{discriminate, total_variation, DiscriminationReport};
pub use montecarlo::{run_monte_carlo, run_trials, Bin, Histogram};
pub use spec::{ProtocolSpec, Step, MAX_PROTOCOL_STEPS};
pub use tree::{enumerate, leaf_mass, LeafClass, OutcomeTree, TreeNode, MAX_TREE_NODES};
