//! Greedy backup placement: BS-Pull picks, per round, the host that can back
//! the most VNFs; BS-Push picks the host that can back the most source nodes.
//! Both share the source-neighbour engine below and process one VNF type at a
//! time, leaving pairs unprotected once no host has room for them.

use serde::Serialize;

use crate::embedding::{EmbeddingState, TypeId};
use crate::ilp::{AllocationMode, Assignment, BackupPlan, SolveConfig, Unprotected};
use crate::topology::{NodeId, PhysicalNetwork};

/// How the next host is chosen among candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HostRule {
    /// Largest `b_n`, then lowest id.
    Pull,
    /// Largest `|SNeigh(n)|`, then largest `b_n`, then lowest id.
    Push,
}

/// Working state of one heuristic run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundState {
    type_count: usize,
    /// `BNodes(j)` as per-type node flags.
    bnodes: Vec<Vec<bool>>,
    pools: Vec<u32>,
    /// `u_n` plus every backup allocated on `n` so far.
    load: Vec<u32>,
}

impl RoundState {
    pub fn new(state: &EmbeddingState) -> Self {
        let n = state.node_count();
        let t = state.type_count();
        Self {
            type_count: t,
            bnodes: vec![vec![false; n]; t],
            pools: vec![0; n * t],
            load: (0..n).map(|i| state.load(i)).collect(),
        }
    }

    pub fn pool(&self, n: NodeId, j: TypeId) -> u32 {
        self.pools[n * self.type_count + j]
    }

    pub fn load(&self, n: NodeId) -> u32 {
        self.load[n]
    }

    pub fn is_protected(&self, i: NodeId, j: TypeId) -> bool {
        self.bnodes[j][i]
    }

    /// Sizes the type-`j` pool on `host` for a demand of `s` and charges the
    /// extra backups to the host's load.
    fn allocate(&mut self, host: NodeId, j: TypeId, s: u32, mode: AllocationMode) -> u32 {
        let idx = host * self.type_count + j;
        let before = self.pools[idx];
        self.pools[idx] = match mode {
            AllocationMode::Pool => before.max(s),
            AllocationMode::Fresh => before + s,
        };
        self.load[host] += self.pools[idx] - before;
        self.pools[idx]
    }
}

/// Source nodes whose type-`j` VNFs could be backed up on `n`, and `b_n`, the
/// number of VNFs they hold.
///
/// A source qualifies when it is not `n`, not yet protected, holds at least one
/// type-`j` VNF, is within `d_max` hops, and `n` has room for it: in
/// [`AllocationMode::Fresh`] `m_ij + load_n <= c_n`; in [`AllocationMode::Pool`]
/// only the growth of the existing pool is charged.
pub fn source_neighbors(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    round: &RoundState,
    n: NodeId,
    j: TypeId,
    cfg: &SolveConfig,
) -> (Vec<NodeId>, u64) {
    let mut sources = Vec::new();
    let mut b = 0u64;
    let cap = net.capacity(n);
    let load = round.load(n);
    let pool = round.pool(n, j);
    for i in 0..net.node_count() {
        if i == n || round.bnodes[j][i] {
            continue;
        }
        let m = state.m(i, j);
        if m == 0 || !net.within(n, i, cfg.d_max) {
            continue;
        }
        let demand = match cfg.allocation_mode {
            AllocationMode::Fresh => m,
            AllocationMode::Pool => m.saturating_sub(pool),
        };
        if demand + load <= cap {
            sources.push(i);
            b += u64::from(m);
        }
    }
    (sources, b)
}

/// One host selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub ty: TypeId,
    pub host: NodeId,
    pub sources: Vec<NodeId>,
    /// VNFs covered this round (`b_n` of the chosen host).
    pub covered_vnfs: u64,
    /// Largest demand among the covered sources.
    pub shared: u32,
    pub pool_after: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeuristicRun {
    pub plan: BackupPlan,
    pub rounds: Vec<RoundRecord>,
}

pub fn bs_pull(net: &PhysicalNetwork, state: &EmbeddingState, cfg: &SolveConfig) -> HeuristicRun {
    run(net, state, cfg, HostRule::Pull)
}

pub fn bs_push(net: &PhysicalNetwork, state: &EmbeddingState, cfg: &SolveConfig) -> HeuristicRun {
    run(net, state, cfg, HostRule::Push)
}

/// Shared round loop. Types are handled in ascending id order; they interact
/// only through host load.
pub fn run(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    cfg: &SolveConfig,
    rule: HostRule,
) -> HeuristicRun {
    let nodes = net.node_count();
    let mut round = RoundState::new(state);
    let mut records = Vec::new();
    let mut assignments = Vec::new();

    for j in 0..state.type_count() {
        loop {
            // (|SNeigh|, b, host, sources) of the best candidate so far
            let mut best: Option<(usize, u64, NodeId, Vec<NodeId>)> = None;
            for n in 0..nodes {
                let (sources, b) = source_neighbors(net, state, &round, n, j, cfg);
                if sources.is_empty() {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((count, best_b, _, _)) => match rule {
                        HostRule::Pull => b > *best_b,
                        HostRule::Push => (sources.len(), b) > (*count, *best_b),
                    },
                };
                if better {
                    best = Some((sources.len(), b, n, sources));
                }
            }
            let Some((_, b, host, sources)) = best else {
                break;
            };
            let shared = sources
                .iter()
                .map(|&i| state.m(i, j))
                .max()
                .expect("non-empty source set");
            let pool_after = round.allocate(host, j, shared, cfg.allocation_mode);
            for &i in &sources {
                round.bnodes[j][i] = true;
                assignments.push(Assignment { src: i, ty: j, host });
            }
            records.push(RoundRecord {
                ty: j,
                host,
                sources,
                covered_vnfs: b,
                shared,
                pool_after,
            });
        }
    }

    let unprotected = state
        .active_pairs()
        .filter(|&(i, j)| !round.bnodes[j][i])
        .map(|(i, j)| Unprotected {
            node: i,
            ty: j,
            count: state.m(i, j),
        })
        .collect();
    let x = (0..nodes)
        .map(|n| (0..state.type_count()).map(|j| round.pool(n, j)).collect())
        .collect();
    HeuristicRun {
        plan: BackupPlan::new(x, assignments, unprotected),
        rounds: records,
    }
}
