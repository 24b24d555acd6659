//! Minimum shared backup provisioning for embedded service function chains,
//! so that every VNF survives the failure of any single physical node.
//!
//! The pipeline: build a [`PhysicalNetwork`], embed chains into an
//! [`EmbeddingState`], compute a [`BackupPlan`] with [`solve_exact`],
//! [`heuristics::bs_pull`] or [`heuristics::bs_push`], then check it with
//! [`check_plan`] and [`verify_all_failures`].

pub mod algorithm;
pub mod cli;
pub mod embedding;
pub mod heuristics;
pub mod ilp;
pub mod par;
pub mod scenario;
pub mod survivability;
pub mod testkit;
pub mod topology;

#[cfg(test)]
mod fixtures;

pub use algorithm::{run_algorithm, Algorithm, AlgorithmRun, RunStatus};
pub use embedding::{utilization, EmbedError, EmbeddingState, ServiceChain, TypeId};
pub use ilp::{check_plan, solve_exact, AllocationMode, BackupPlan, SolveConfig, SolveError};
pub use par::Execution;
pub use scenario::{run_suite, GeneratorConfig, SuiteConfig, SuiteOptions};
pub use survivability::{measure, simulate_failure, verify_all_failures, ScenarioReport, Verdict};
pub use topology::{NodeId, PhysicalNetwork, TopologyError};
