use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingState;
use crate::heuristics;
use crate::ilp::{solve_exact, BackupPlan, SolveConfig, SolveError};
use crate::topology::PhysicalNetwork;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// BS-Pull heuristic.
    Pull,
    /// BS-Push heuristic.
    Push,
    /// Branch-and-bound optimum.
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Pull, Algorithm::Push, Algorithm::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pull => "pull",
            Algorithm::Push => "push",
            Algorithm::Exact => "exact",
        }
    }

    pub fn is_heuristic(self) -> bool {
        !matches!(self, Algorithm::Exact)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Heuristic finished (possibly with unprotected VNFs).
    Complete,
    /// Exact search proved optimality.
    Optimal,
    /// Exact search ran out of budget holding a feasible plan.
    Feasible,
    /// Exact search proved that no plan protects every VNF.
    Infeasible,
    /// Exact search ran out of budget without any feasible plan.
    NoSolution,
}

impl RunStatus {
    /// `Some(proven)` for the exact solver, `None` for heuristics.
    pub fn optimal_flag(self) -> Option<bool> {
        match self {
            RunStatus::Complete => None,
            RunStatus::Optimal | RunStatus::Infeasible => Some(true),
            RunStatus::Feasible | RunStatus::NoSolution => Some(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub status: RunStatus,
    pub plan: Option<BackupPlan>,
    pub runtime: Duration,
    /// Branch-and-bound nodes, exact solver only.
    pub search_nodes: Option<u64>,
}

pub fn run_algorithm(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    cfg: &SolveConfig,
    algorithm: Algorithm,
) -> AlgorithmRun {
    let started = Instant::now();
    let (status, plan, search_nodes) = match algorithm {
        Algorithm::Pull => (RunStatus::Complete, Some(heuristics::bs_pull(net, state, cfg).plan), None),
        Algorithm::Push => (RunStatus::Complete, Some(heuristics::bs_push(net, state, cfg).plan), None),
        Algorithm::Exact => match solve_exact(net, state, cfg) {
            Ok(sol) => {
                let status = if sol.optimal {
                    RunStatus::Optimal
                } else {
                    RunStatus::Feasible
                };
                (status, Some(sol.plan), Some(sol.stats.nodes))
            }
            Err(SolveError::Infeasible { .. }) => (RunStatus::Infeasible, None, None),
            Err(SolveError::BudgetExceeded { nodes }) => (RunStatus::NoSolution, None, Some(nodes)),
        },
    };
    AlgorithmRun {
        algorithm,
        status,
        plan,
        runtime: started.elapsed(),
        search_nodes,
    }
}
