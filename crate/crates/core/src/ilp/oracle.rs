//! Brute-force reference optimum for small instances. Shares no code with the
//! branch-and-bound search beyond the network and state accessors.

use serde::Serialize;

use crate::embedding::EmbeddingState;
use crate::ilp::SolveConfig;
use crate::topology::PhysicalNetwork;

/// Largest number of full assignments the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleOutcome {
    Optimal(u64),
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{assignments} assignments exceed the enumeration limit")]
    TooLarge { assignments: u128 },
}

/// Number of full assignments [`oracle_enumerate`] would visit.
pub fn assignment_count(net: &PhysicalNetwork, state: &EmbeddingState, cfg: &SolveConfig) -> u128 {
    state
        .active_pairs()
        .map(|(i, _)| hosts_in_range(net, i, cfg.d_max).len() as u128)
        .try_fold(1u128, |acc, c| acc.checked_mul(c))
        .unwrap_or(u128::MAX)
}

fn hosts_in_range(net: &PhysicalNetwork, i: usize, d_max: u32) -> Vec<usize> {
    (0..net.node_count())
        .filter(|&n| n != i && matches!(net.hop(i, n), Some(d) if d <= d_max))
        .collect()
}

/// Enumerates every host choice for every active pair, sizes each pool as the
/// largest demand assigned to it, discards choices that overflow a node, and
/// returns the cheapest total.
pub fn oracle_enumerate(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    cfg: &SolveConfig,
) -> Result<OracleOutcome, OracleError> {
    let total = assignment_count(net, state, cfg);
    if total > ORACLE_LIMIT {
        return Err(OracleError::TooLarge { assignments: total });
    }
    let pairs: Vec<(usize, usize, u32, Vec<usize>)> = state
        .active_pairs()
        .map(|(i, j)| (i, j, state.m(i, j), hosts_in_range(net, i, cfg.d_max)))
        .collect();
    if pairs.iter().any(|p| p.3.is_empty()) {
        return Ok(OracleOutcome::Infeasible);
    }

    let nodes = net.node_count();
    let types = state.type_count();
    let mut digits = vec![0usize; pairs.len()];
    let mut best: Option<u64> = None;
    let mut pools = vec![0u32; nodes * types];
    loop {
        pools.fill(0);
        for (p, &d) in pairs.iter().zip(&digits) {
            let slot = &mut pools[p.3[d] * types + p.1];
            *slot = (*slot).max(p.2);
        }
        let fits = (0..nodes).all(|n| {
            let backups: u32 = pools[n * types..(n + 1) * types].iter().sum();
            state.load(n) + backups <= net.capacity(n)
        });
        if fits {
            let cost = pools.iter().map(|&v| u64::from(v)).sum();
            best = Some(best.map_or(cost, |b: u64| b.min(cost)));
        }

        // odometer increment
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(best.map_or(OracleOutcome::Infeasible, OracleOutcome::Optimal));
            }
            digits[pos] += 1;
            if digits[pos] < pairs[pos].3.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
