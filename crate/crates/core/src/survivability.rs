//! Single-node failure simulation over a backup plan, and the per-run metrics
//! reported by the experiment suite.

use std::collections::BTreeSet;
use std::time::Duration;

use serde::Serialize;

use crate::algorithm::{Algorithm, RunStatus};
use crate::embedding::{EmbeddingState, TypeId};
use crate::ilp::{BackupPlan, SolveConfig, Unprotected};
use crate::par::{self, Execution};
use crate::topology::{NodeId, PhysicalNetwork, TopologyError};

/// Why a broken group found no backup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UncoveredReason {
    NoAssignment,
    /// Cannot happen for plans that pass the self-hosting check.
    HostIsFailedNode,
    PoolTooSmall,
    OutOfRange,
    /// The host's primaries plus pools exceed its capacity, so its pools
    /// cannot all exist.
    HostOverCapacity,
}

/// VNFs of one type lost with the failed node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BrokenGroup {
    pub node: NodeId,
    #[serde(rename = "type")]
    pub ty: TypeId,
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Takeover {
    pub group: BrokenGroup,
    pub host: NodeId,
    pub pool: u32,
    pub hops: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Uncovered {
    pub group: BrokenGroup,
    pub reason: UncoveredReason,
}

/// A backup pool that went down with the failed node. Informational only: its
/// primaries are still running.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LostPool {
    #[serde(rename = "type")]
    pub ty: TypeId,
    pub pool: u32,
    pub dependents: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailureReport {
    pub failed_node: NodeId,
    pub broken_groups: Vec<BrokenGroup>,
    pub covered: Vec<Takeover>,
    pub uncovered: Vec<Uncovered>,
    pub lost_backups: Vec<LostPool>,
}

/// Fails `failed` and checks that each of its VNF groups has a live, in-range
/// backup pool large enough to take over.
pub fn simulate_failure(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    plan: &BackupPlan,
    failed: NodeId,
    cfg: &SolveConfig,
) -> Result<FailureReport, TopologyError> {
    net.check_node(failed)?;
    let mut report = FailureReport {
        failed_node: failed,
        broken_groups: Vec::new(),
        covered: Vec::new(),
        uncovered: Vec::new(),
        lost_backups: Vec::new(),
    };

    for ty in 0..state.type_count() {
        let count = state.m(failed, ty);
        if count == 0 {
            continue;
        }
        let group = BrokenGroup {
            node: failed,
            ty,
            count,
        };
        report.broken_groups.push(group);
        let Some(host) = plan.host_of(failed, ty) else {
            report.uncovered.push(Uncovered {
                group,
                reason: UncoveredReason::NoAssignment,
            });
            continue;
        };
        let pool = plan.pool(host, ty);
        let hops = if host < net.node_count() {
            net.hop(failed, host)
        } else {
            None
        };
        let reason = if host == failed {
            Some(UncoveredReason::HostIsFailedNode)
        } else if !matches!(hops, Some(d) if d <= cfg.d_max) {
            Some(UncoveredReason::OutOfRange)
        } else if pool < count {
            Some(UncoveredReason::PoolTooSmall)
        } else if over_capacity(net, state, plan, host) {
            Some(UncoveredReason::HostOverCapacity)
        } else {
            None
        };
        match reason {
            Some(reason) => report.uncovered.push(Uncovered { group, reason }),
            None => report.covered.push(Takeover {
                group,
                host,
                pool,
                hops: hops.expect("in range"),
            }),
        }
    }

    for ty in 0..state.type_count() {
        let pool = plan.pool(failed, ty);
        if pool > 0 {
            let dependents = plan
                .assignments
                .iter()
                .filter(|a| a.host == failed && a.ty == ty)
                .map(|a| a.src)
                .collect();
            report.lost_backups.push(LostPool {
                ty,
                pool,
                dependents,
            });
        }
    }
    Ok(report)
}

fn over_capacity(net: &PhysicalNetwork, state: &EmbeddingState, plan: &BackupPlan, n: NodeId) -> bool {
    let backups: u64 = plan
        .x
        .get(n)
        .map_or(0, |row| row.iter().map(|&v| u64::from(v)).sum());
    u64::from(state.load(n)) + backups > u64::from(net.capacity(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "failures", rename_all = "snake_case")]
pub enum Verdict {
    Survivable,
    /// Reports of every failure that leaves some group uncovered.
    NotSurvivable(Vec<FailureReport>),
}

impl Verdict {
    pub fn is_survivable(&self) -> bool {
        matches!(self, Verdict::Survivable)
    }

    /// All uncovered groups, as `(node, type, count)` entries.
    pub fn uncovered_groups(&self) -> Vec<Unprotected> {
        match self {
            Verdict::Survivable => Vec::new(),
            Verdict::NotSurvivable(reports) => reports
                .iter()
                .flat_map(|r| &r.uncovered)
                .map(|u| Unprotected {
                    node: u.group.node,
                    ty: u.group.ty,
                    count: u.group.count,
                })
                .collect(),
        }
    }
}

/// Simulates every single-node failure.
pub fn verify_all_failures(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    plan: &BackupPlan,
    cfg: &SolveConfig,
    exec: Execution,
) -> Verdict {
    let nodes: Vec<NodeId> = (0..net.node_count()).collect();
    let failing: Vec<FailureReport> = par::map(&nodes, exec, |&n| {
        simulate_failure(net, state, plan, n, cfg).expect("node ids come from the network")
    })
    .into_iter()
    .filter(|r| !r.uncovered.is_empty())
    .collect();
    if failing.is_empty() {
        Verdict::Survivable
    } else {
        Verdict::NotSurvivable(failing)
    }
}

/// Plan-level metrics. Sync-hop statistics cover assigned pairs only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanMetrics {
    pub total_backups: u64,
    pub unprotected_vnfs: u64,
    pub protected_vnfs: u64,
    pub assigned_pairs: usize,
    /// Mean hop distance from each protected VNF to its backup pool. Zero
    /// when nothing is assigned.
    pub mean_sync_hops: f64,
    /// Same, averaged over assigned (node, type) pairs instead of VNFs.
    pub mean_sync_hops_per_pair: f64,
    pub max_sync_hops: u32,
    #[serde(serialize_with = "as_millis")]
    pub runtime: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

pub fn measure(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    plan: &BackupPlan,
    runtime: Duration,
) -> PlanMetrics {
    let mut weighted = 0u64;
    let mut vnfs = 0u64;
    let mut pair_hops = 0u64;
    let mut pairs = 0usize;
    let mut max_hops = 0u32;
    // dedupe in case a malformed plan repeats an assignment
    let assigned: BTreeSet<_> = plan.assignments.iter().map(|a| (a.src, a.ty, a.host)).collect();
    for (src, ty, host) in assigned {
        let Some(h) = (host < net.node_count() && src < net.node_count())
            .then(|| net.hop(src, host))
            .flatten()
        else {
            continue;
        };
        let m = u64::from(state.m(src, ty));
        weighted += m * u64::from(h);
        vnfs += m;
        pair_hops += u64::from(h);
        pairs += 1;
        max_hops = max_hops.max(h);
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    PlanMetrics {
        total_backups: plan.total_backups(),
        unprotected_vnfs: plan.unprotected_vnfs(),
        protected_vnfs: vnfs,
        assigned_pairs: pairs,
        mean_sync_hops: ratio(weighted, vnfs),
        mean_sync_hops_per_pair: ratio(pair_hops, pairs as u64),
        max_sync_hops: max_hops,
        runtime,
    }
}

/// One (scenario, algorithm) cell of an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub utilization: f64,
    pub algorithm: Algorithm,
    pub status: RunStatus,
    /// `None` when the run produced no plan.
    pub metrics: Option<PlanMetrics>,
    #[serde(serialize_with = "as_millis")]
    pub runtime: Duration,
    pub optimal: Option<bool>,
    /// Outcome of the all-failures sweep, when a plan exists.
    pub survivable: Option<bool>,
    /// Uncovered groups found by the sweep equal the plan's unprotected list.
    pub sweep_matches_plan: Option<bool>,
    /// Branch-and-bound nodes, exact solver only.
    pub search_nodes: Option<u64>,
}

/// Tidy CSV row; header
/// `scenario,utilization,algorithm,total_backups,unprotected,mean_sync_hops,max_sync_hops,runtime_ms,optimal`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub scenario: String,
    pub utilization: String,
    pub algorithm: Algorithm,
    pub total_backups: Option<u64>,
    pub unprotected: Option<u64>,
    pub mean_sync_hops: Option<String>,
    pub max_sync_hops: Option<u32>,
    pub runtime_ms: String,
    pub optimal: Option<bool>,
}

impl ScenarioReport {
    /// CSV row; `with_timing = false` writes `0` for the runtime so output
    /// is reproducible byte for byte.
    pub fn csv_row(&self, with_timing: bool) -> CsvRow {
        let m = self.metrics.as_ref();
        CsvRow {
            scenario: self.scenario.clone(),
            utilization: format!("{:.4}", self.utilization),
            algorithm: self.algorithm,
            total_backups: m.map(|m| m.total_backups),
            unprotected: m.map(|m| m.unprotected_vnfs),
            mean_sync_hops: m.map(|m| format!("{:.4}", m.mean_sync_hops)),
            max_sync_hops: m.map(|m| m.max_sync_hops),
            runtime_ms: if with_timing {
                format!("{:.3}", self.runtime.as_secs_f64() * 1e3)
            } else {
                "0".to_owned()
            },
            optimal: self.optimal,
        }
    }
}

pub const CSV_HEADER: &str =
    "scenario,utilization,algorithm,total_backups,unprotected,mean_sync_hops,max_sync_hops,runtime_ms,optimal";

/// Writes reports as CSV with [`CSV_HEADER`].
pub fn write_csv<W: std::io::Write>(
    out: W,
    reports: &[ScenarioReport],
    with_timing: bool,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r.csv_row(with_timing))?;
    }
    if reports.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}
