//! The backup provisioning integer model: plan representation and constraint
//! checking, an exact branch-and-bound solver, a brute-force oracle, and an LP
//! exporter for external MILP solvers.

mod exact;
mod lp;
mod oracle;
mod plan;

pub use exact::{solve_exact, ExactSolution, SearchStats, SolveError};
pub use lp::{export_lp, write_lp, LpError, LpOptions};
pub use oracle::{assignment_count, oracle_enumerate, OracleError, OracleOutcome, ORACLE_LIMIT};
pub use plan::{
    check_plan, AllocationMode, Assignment, BackupPlan, PlanCheck, SolveConfig, TieBreak,
    Unprotected, Violation, DEFAULT_BIG_M,
};
