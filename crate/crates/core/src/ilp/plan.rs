use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingState, TypeId};
use crate::topology::{NodeId, PhysicalNetwork};

/// Default big-M constant for the linearized conditionals.
pub const DEFAULT_BIG_M: u32 = 10_000;

/// How a heuristic sizes a pool when the same host is picked again for a type.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMode {
    /// Grow the existing pool to `max(pool, s)`.
    #[default]
    Pool,
    /// Add `s` fresh backups on every selection.
    Fresh,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    LowestNodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Maximum hop distance between a VNF and its backup pool.
    pub d_max: u32,
    /// Big-M constant, used only by the LP exporter.
    pub big_m: u32,
    /// Wall-clock cap for the exact solver, in seconds.
    pub time_budget: Option<f64>,
    /// Cap on branch-and-bound nodes. Unlike the wall-clock cap this keeps
    /// budget-limited results reproducible.
    pub node_budget: Option<u64>,
    pub allocation_mode: AllocationMode,
    pub tie_break: TieBreak,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            d_max: 2,
            big_m: DEFAULT_BIG_M,
            time_budget: None,
            node_budget: Some(2_000_000),
            allocation_mode: AllocationMode::Pool,
            tie_break: TieBreak::LowestNodeId,
        }
    }
}

impl SolveConfig {
    pub fn with_d_max(d_max: u32) -> Self {
        Self {
            d_max,
            ..Self::default()
        }
    }
}

/// Backup host chosen for all type-`ty` VNFs on node `src`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub src: NodeId,
    #[serde(rename = "type")]
    pub ty: TypeId,
    pub host: NodeId,
}

/// An active pair left without a backup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Unprotected {
    pub node: NodeId,
    #[serde(rename = "type")]
    pub ty: TypeId,
    pub count: u32,
}

/// Backup pool sizes (`x`, node×type), the host of every protected active
/// pair, and the pairs left unprotected.
///
/// Serializes as `{"x": [[...]], "assignments": [{"src","type","host"}], "unprotected": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackupPlan {
    pub x: Vec<Vec<u32>>,
    pub assignments: Vec<Assignment>,
    #[serde(default)]
    pub unprotected: Vec<Unprotected>,
}

impl BackupPlan {
    /// Builds a plan with assignments and unprotected entries in canonical
    /// (sorted) order.
    pub fn new(
        x: Vec<Vec<u32>>,
        mut assignments: Vec<Assignment>,
        mut unprotected: Vec<Unprotected>,
    ) -> Self {
        assignments.sort_unstable();
        unprotected.sort_unstable();
        Self {
            x,
            assignments,
            unprotected,
        }
    }

    pub fn empty(node_count: usize, type_count: usize) -> Self {
        Self::new(vec![vec![0; type_count]; node_count], Vec::new(), Vec::new())
    }

    /// Objective value: total provisioned backups.
    pub fn total_backups(&self) -> u64 {
        self.x.iter().flatten().map(|&v| u64::from(v)).sum()
    }

    pub fn unprotected_vnfs(&self) -> u64 {
        self.unprotected.iter().map(|u| u64::from(u.count)).sum()
    }

    pub fn pool(&self, n: NodeId, j: TypeId) -> u32 {
        self.x
            .get(n)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0)
    }

    /// First host assigned to `(src, ty)`, if any.
    pub fn host_of(&self, src: NodeId, ty: TypeId) -> Option<NodeId> {
        self.assignments
            .iter()
            .find(|a| a.src == src && a.ty == ty)
            .map(|a| a.host)
    }

    pub fn is_unprotected(&self, node: NodeId, ty: TypeId) -> bool {
        self.unprotected.iter().any(|u| u.node == node && u.ty == ty)
    }
}

/// One violated constraint, tagged with the offending indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// `x` does not have one row per node and one column per type.
    Shape {
        expected_nodes: usize,
        expected_types: usize,
    },
    /// An assignment references a node or type that does not exist.
    OutOfRange { src: NodeId, ty: TypeId, host: NodeId },
    /// Backups hosted on the node they protect.
    SelfHosting { src: NodeId, ty: TypeId },
    /// Active pair with more than one host.
    DuplicateAssignment { src: NodeId, ty: TypeId },
    /// Active pair with neither a host nor an unprotected entry.
    MissingAssignment { src: NodeId, ty: TypeId },
    PoolTooSmall {
        src: NodeId,
        ty: TypeId,
        host: NodeId,
        needed: u32,
        pool: u32,
    },
    CapacityExceeded { node: NodeId, used: u64, capacity: u32 },
    HopBound {
        src: NodeId,
        ty: TypeId,
        host: NodeId,
        hops: Option<u32>,
        d_max: u32,
    },
    /// Unprotected entry that is inactive, miscounted, or also assigned.
    BadUnprotectedEntry {
        node: NodeId,
        ty: TypeId,
        count: u32,
        actual: u32,
    },
    /// Active pair the plan declares unprotected.
    Unprotected { node: NodeId, ty: TypeId, count: u32 },
}

impl Violation {
    pub fn is_unprotected(&self) -> bool {
        matches!(self, Violation::Unprotected { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PlanCheck {
    pub violations: Vec<Violation>,
}

impl PlanCheck {
    /// All constraints hold and every active pair is protected.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// All constraints hold for the assigned pairs; unprotected pairs are
    /// the only complaint, if any.
    pub fn assigned_pairs_valid(&self) -> bool {
        self.violations.iter().all(Violation::is_unprotected)
    }
}

/// Checks a plan against self-hosting, one-host-per-active-pair, pool sizing,
/// node capacity and the hop bound.
pub fn check_plan(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    plan: &BackupPlan,
    cfg: &SolveConfig,
) -> PlanCheck {
    let nodes = net.node_count();
    let types = state.type_count();
    let mut violations = Vec::new();

    if plan.x.len() != nodes || plan.x.iter().any(|row| row.len() != types) {
        violations.push(Violation::Shape {
            expected_nodes: nodes,
            expected_types: types,
        });
        return PlanCheck { violations };
    }

    let mut hosts: BTreeMap<(NodeId, TypeId), Vec<NodeId>> = BTreeMap::new();
    for a in &plan.assignments {
        if a.src >= nodes || a.host >= nodes || a.ty >= types {
            violations.push(Violation::OutOfRange {
                src: a.src,
                ty: a.ty,
                host: a.host,
            });
            continue;
        }
        hosts.entry((a.src, a.ty)).or_default().push(a.host);
    }

    let mut declared: BTreeMap<(NodeId, TypeId), u32> = BTreeMap::new();
    for u in &plan.unprotected {
        let actual = if u.node < nodes && u.ty < types {
            state.m(u.node, u.ty)
        } else {
            0
        };
        let assigned = hosts.contains_key(&(u.node, u.ty));
        if actual == 0 || u.count != actual || assigned || declared.contains_key(&(u.node, u.ty)) {
            violations.push(Violation::BadUnprotectedEntry {
                node: u.node,
                ty: u.ty,
                count: u.count,
                actual,
            });
        }
        declared.insert((u.node, u.ty), u.count);
    }

    for (src, ty) in state.active_pairs() {
        let needed = state.m(src, ty);
        let Some(hs) = hosts.get(&(src, ty)) else {
            if declared.contains_key(&(src, ty)) {
                violations.push(Violation::Unprotected {
                    node: src,
                    ty,
                    count: needed,
                });
            } else {
                violations.push(Violation::MissingAssignment { src, ty });
            }
            continue;
        };
        if hs.len() > 1 {
            violations.push(Violation::DuplicateAssignment { src, ty });
        }
        for &host in hs {
            if host == src {
                violations.push(Violation::SelfHosting { src, ty });
            }
            let pool = plan.x[host][ty];
            if pool < needed {
                violations.push(Violation::PoolTooSmall {
                    src,
                    ty,
                    host,
                    needed,
                    pool,
                });
            }
            let hops = net.hop(src, host);
            if !matches!(hops, Some(d) if d <= cfg.d_max) {
                violations.push(Violation::HopBound {
                    src,
                    ty,
                    host,
                    hops,
                    d_max: cfg.d_max,
                });
            }
        }
    }

    for n in 0..nodes {
        let used = u64::from(state.load(n)) + plan.x[n].iter().map(|&v| u64::from(v)).sum::<u64>();
        if used > u64::from(net.capacity(n)) {
            violations.push(Violation::CapacityExceeded {
                node: n,
                used,
                capacity: net.capacity(n),
            });
        }
    }

    PlanCheck { violations }
}
