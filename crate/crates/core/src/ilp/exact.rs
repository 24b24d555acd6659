//! Depth-first branch and bound over backup-host assignments.
//!
//! Active pairs are branched in descending `m_ij` order (ties by node, then
//! type), hosts in ascending id order, so the first optimal leaf reached is
//! the lexicographically smallest optimal assignment. A host's type-`j` pool
//! is the largest `m_ij` assigned to it.
//!
//! Pruning uses two facts:
//! - a pair with a zero-cost host (pool already large enough, and within
//!   range) never needs to try a higher-id host: moving it to the zero-cost
//!   host cannot raise any pool and yields a lexicographically smaller plan;
//! - a per-type bound: pairs whose feasible host sets are pairwise disjoint
//!   must grow distinct pools, so the sum of their cheapest growths is a lower
//!   bound on the remaining cost. This dominates the single largest remaining
//!   demand per type.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::embedding::{EmbeddingState, TypeId};
use crate::heuristics;
use crate::ilp::{Assignment, BackupPlan, SolveConfig};
use crate::topology::{NodeId, PhysicalNetwork};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    /// No assignment satisfies all constraints. `witness` names an active
    /// pair with no admissible host at all, when one exists.
    #[error("no feasible backup plan")]
    Infeasible { witness: Option<(NodeId, TypeId)> },
    /// The search budget ran out before any feasible plan was found.
    #[error("search budget exhausted after {nodes} nodes without a feasible plan")]
    BudgetExceeded { nodes: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed: Duration,
    /// Lower bound at the root of the search tree.
    pub root_bound: u64,
    /// The returned plan is a heuristic seed the search never improved on.
    /// Only possible when the budget ran out.
    pub from_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub plan: BackupPlan,
    /// False when the budget stopped the search before optimality was proven.
    pub optimal: bool,
    pub stats: SearchStats,
}

struct Pair {
    src: NodeId,
    ty: TypeId,
    m: u32,
    /// Hosts within range, not `src`, and able to hold `m` backups on top of
    /// their primaries. Ascending.
    cands: Vec<NodeId>,
}

/// Admissible hosts for pair `(src, ty)` ignoring other backups.
pub(crate) fn static_candidates(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    src: NodeId,
    m: u32,
    d_max: u32,
) -> Vec<NodeId> {
    (0..net.node_count())
        .filter(|&n| n != src && net.within(src, n, d_max))
        .filter(|&n| state.load(n) + m <= net.capacity(n))
        .collect()
}

/// Minimizes total backups subject to all plan constraints on active pairs.
///
/// The search is seeded with the better of the two heuristics (when either
/// protects everything) and stops at `cfg.node_budget` nodes or
/// `cfg.time_budget` seconds, returning the incumbent flagged non-optimal.
pub fn solve_exact(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    cfg: &SolveConfig,
) -> Result<ExactSolution, SolveError> {
    let started = Instant::now();
    let types = state.type_count();

    let mut pairs: Vec<Pair> = state
        .active_pairs()
        .map(|(src, ty)| {
            let m = state.m(src, ty);
            Pair {
                src,
                ty,
                m,
                cands: static_candidates(net, state, src, m, cfg.d_max),
            }
        })
        .collect();
    if let Some(p) = pairs.iter().find(|p| p.cands.is_empty()) {
        return Err(SolveError::Infeasible {
            witness: Some((p.src, p.ty)),
        });
    }
    pairs.sort_by(|a, b| b.m.cmp(&a.m).then(a.src.cmp(&b.src)).then(a.ty.cmp(&b.ty)));

    let seed = [heuristics::bs_pull(net, state, cfg), heuristics::bs_push(net, state, cfg)]
        .into_iter()
        .map(|r| r.plan)
        .filter(|p| p.unprotected.is_empty())
        .min_by_key(BackupPlan::total_backups);

    let nodes = net.node_count();
    let words = nodes.div_ceil(64);
    let mut search = Search {
        cap: net.capacities().to_vec(),
        types,
        pool: vec![0; nodes * types],
        load: (0..nodes).map(|n| state.load(n)).collect(),
        cost: 0,
        choice: vec![usize::MAX; pairs.len()],
        bound: seed.as_ref().map_or(u64::MAX, |p| p.total_backups() + 1),
        best: None,
        root_bound: 0,
        done: false,
        nodes: 0,
        node_budget: cfg.node_budget.unwrap_or(u64::MAX),
        deadline: cfg
            .time_budget
            .map(|s| started + Duration::from_secs_f64(s.max(0.0))),
        aborted: false,
        words,
        bits: vec![0; pairs.len() * words],
        used: vec![0; words],
        entries: Vec::with_capacity(pairs.len()),
        pairs,
    };

    let Some(root) = search.lower_bound(0) else {
        return Err(SolveError::Infeasible { witness: None });
    };
    search.root_bound = root;
    search.dfs(0);

    let mut stats = SearchStats {
        nodes: search.nodes,
        elapsed: started.elapsed(),
        root_bound: root,
        from_seed: false,
    };
    let optimal = !search.aborted;
    let plan = match (search.best.take(), seed) {
        (Some(choice), _) => search.plan_from(&choice, nodes),
        (None, Some(seed)) if search.aborted => {
            stats.from_seed = true;
            seed
        }
        (None, Some(_)) => unreachable!("a feasible seed lies inside the search space"),
        (None, None) if search.aborted => {
            return Err(SolveError::BudgetExceeded {
                nodes: search.nodes,
            })
        }
        (None, None) => return Err(SolveError::Infeasible { witness: None }),
    };
    log::debug!(
        "exact: {} pairs, {} nodes, cost {}, root bound {}, optimal {}",
        search.pairs.len(),
        stats.nodes,
        plan.total_backups(),
        root,
        optimal
    );
    Ok(ExactSolution {
        plan,
        optimal,
        stats,
    })
}

struct Search {
    cap: Vec<u32>,
    types: usize,
    pairs: Vec<Pair>,
    pool: Vec<u32>,
    /// Primaries plus current pools per node.
    load: Vec<u32>,
    cost: u64,
    choice: Vec<usize>,
    /// Only leaves strictly cheaper than this are accepted.
    bound: u64,
    best: Option<Vec<usize>>,
    root_bound: u64,
    done: bool,
    nodes: u64,
    node_budget: u64,
    deadline: Option<Instant>,
    aborted: bool,
    // lower-bound scratch
    words: usize,
    bits: Vec<u64>,
    used: Vec<u64>,
    entries: Vec<(TypeId, u32, usize)>,
}

impl Search {
    fn dfs(&mut self, k: usize) {
        if self.done || self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.node_budget
            || (self.nodes.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() >= d))
        {
            self.aborted = true;
            return;
        }
        if k == self.pairs.len() {
            if self.cost < self.bound {
                self.bound = self.cost;
                self.best = Some(self.choice.clone());
                self.done = self.cost <= self.root_bound;
            }
            return;
        }
        match self.lower_bound(k) {
            Some(lb) if self.cost + lb < self.bound => {}
            _ => return,
        }

        let (ty, m) = (self.pairs[k].ty, self.pairs[k].m);
        for c in 0..self.pairs[k].cands.len() {
            let host = self.pairs[k].cands[c];
            let idx = host * self.types + ty;
            let before = self.pool[idx];
            let inc = m.saturating_sub(before);
            if self.load[host] + inc > self.cap[host] {
                continue;
            }
            self.pool[idx] = before + inc;
            self.load[host] += inc;
            self.cost += u64::from(inc);
            self.choice[k] = host;

            self.dfs(k + 1);

            self.cost -= u64::from(inc);
            self.load[host] -= inc;
            self.pool[idx] = before;
            if inc == 0 || self.done || self.aborted {
                break;
            }
        }
    }

    /// Lower bound on the cost of placing `pairs[k..]` given the current
    /// pools; `None` if some pair has no host with room left.
    fn lower_bound(&mut self, k: usize) -> Option<u64> {
        let words = self.words;
        self.entries.clear();
        for (idx, p) in self.pairs.iter().enumerate().skip(k) {
            let bits = &mut self.bits[idx * words..(idx + 1) * words];
            bits.fill(0);
            let mut best = u32::MAX;
            for &h in &p.cands {
                let inc = p.m.saturating_sub(self.pool[h * self.types + p.ty]);
                if self.load[h] + inc <= self.cap[h] {
                    best = best.min(inc);
                    bits[h / 64] |= 1 << (h % 64);
                }
            }
            match best {
                u32::MAX => return None,
                0 => {}
                inc => self.entries.push((p.ty, inc, idx)),
            }
        }
        self.entries
            .sort_unstable_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

        let mut total = 0u64;
        let mut current_type = usize::MAX;
        for &(ty, inc, idx) in &self.entries {
            if ty != current_type {
                current_type = ty;
                self.used.fill(0);
            }
            let bits = &self.bits[idx * words..(idx + 1) * words];
            if bits.iter().zip(&self.used).all(|(b, u)| b & u == 0) {
                total += u64::from(inc);
                for (u, b) in self.used.iter_mut().zip(bits) {
                    *u |= b;
                }
            }
        }
        Some(total)
    }

    fn plan_from(&self, choice: &[usize], nodes: usize) -> BackupPlan {
        let mut x = vec![vec![0u32; self.types]; nodes];
        let mut assignments = Vec::with_capacity(choice.len());
        for (p, &host) in self.pairs.iter().zip(choice) {
            let slot = &mut x[host][p.ty];
            *slot = (*slot).max(p.m);
            assignments.push(Assignment {
                src: p.src,
                ty: p.ty,
                host,
            });
        }
        BackupPlan::new(x, assignments, Vec::new())
    }
}
