pub(crate) use crate::testkit::{hub_vs_cluster, path3, shared_pool_fragment};

use proptest::prelude::*;

use crate::embedding::EmbeddingState;
use crate::topology::PhysicalNetwork;

/// Random small instance: up to `max_nodes` nodes, `max_types` types,
/// `m_ij <= max_m`, a few spare slots per node, `d_max` in {1, 2}.
pub(crate) fn arb_instance(
    max_nodes: usize,
    max_types: usize,
    max_m: u32,
) -> impl Strategy<Value = (PhysicalNetwork, EmbeddingState, u32)> {
    (2..=max_nodes, 1..=max_types).prop_flat_map(move |(n, t)| {
        let links = proptest::collection::vec((0..n, 0..n), 0..=2 * n);
        let counts = proptest::collection::vec(
            proptest::collection::vec(prop_oneof![3 => Just(0u32), 2 => 1..=max_m], t),
            n,
        );
        let spare = proptest::collection::vec(0u32..=4, n);
        (links, counts, spare, 1u32..=2).prop_map(move |(links, counts, spare, d_max)| {
            let links: Vec<_> = links.into_iter().filter(|(a, b)| a != b).collect();
            let caps = counts
                .iter()
                .zip(&spare)
                .map(|(row, s)| row.iter().sum::<u32>() + s)
                .collect();
            let net = PhysicalNetwork::new(n, &links, caps).unwrap();
            let state = EmbeddingState::from_counts(&net, &counts).unwrap();
            (net, state, d_max)
        })
    })
}
