//! Hand-built fixtures and seeded random instances used by the test suites,
//! the acceptance harness and the benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingState;
use crate::ilp::{Assignment, BackupPlan};
use crate::topology::{NodeId, PhysicalNetwork};

/// Path 0-1-2, capacities 2, one type, one VNF on each end node.
pub fn path3() -> (PhysicalNetwork, EmbeddingState) {
    let net = PhysicalNetwork::new(3, &[(0, 1), (1, 2)], vec![2, 2, 2]).expect("valid path");
    let state = EmbeddingState::from_counts(&net, &[vec![1], vec![0], vec![1]]).expect("fits");
    (net, state)
}

/// Node roles in [`hub_vs_cluster`].
#[derive(Debug, Clone, Copy)]
pub struct HubCluster {
    pub a: NodeId,
    pub h1: NodeId,
    pub cluster: [NodeId; 3],
    pub h2: NodeId,
}

/// Source `a` (5 VNFs) reachable only from host `h1`; three single-VNF
/// sources reachable only from host `h2`. One type, `d_max = 1`.
pub fn hub_vs_cluster() -> (PhysicalNetwork, EmbeddingState, HubCluster) {
    let h = HubCluster {
        a: 0,
        h1: 1,
        cluster: [2, 3, 4],
        h2: 5,
    };
    let links = [(h.a, h.h1), (2, h.h2), (3, h.h2), (4, h.h2)];
    let net = PhysicalNetwork::new(6, &links, vec![5, 5, 1, 1, 1, 3]).expect("valid");
    let state = EmbeddingState::from_counts(
        &net,
        &[vec![5], vec![0], vec![1], vec![1], vec![1], vec![0]],
    )
    .expect("fits");
    (net, state, h)
}

/// Shared-pool neighbourhood: one type-3 VNF on each of the nodes labelled 10
/// and 11, both backed by a single type-3 backup on the node labelled 9, with
/// node 9 one hop from 10 and two hops from 11. Ids are labels minus one.
pub fn shared_pool_fragment() -> (PhysicalNetwork, EmbeddingState, BackupPlan) {
    let links = [(8, 11), (9, 11), (10, 11), (8, 9)];
    let net = PhysicalNetwork::new(12, &links, vec![4; 12]).expect("valid");
    let mut counts = vec![vec![0u32; 4]; 12];
    counts[9][3] = 1;
    counts[10][3] = 1;
    let state = EmbeddingState::from_counts(&net, &counts).expect("fits");
    let mut x = vec![vec![0u32; 4]; 12];
    x[8][3] = 1;
    let plan = BackupPlan::new(
        x,
        vec![
            Assignment { src: 9, ty: 3, host: 8 },
            Assignment { src: 10, ty: 3, host: 8 },
        ],
        vec![],
    );
    (net, state, plan)
}

/// Bounds for [`random_small_instance`].
#[derive(Debug, Clone, Copy)]
pub struct SmallParams {
    pub max_nodes: usize,
    pub max_links: usize,
    pub max_types: usize,
    pub max_m: u32,
    /// Probability that a (node, type) pair is active.
    pub active_prob: f64,
    /// Spare slots per node are drawn from `0..=max_spare`.
    pub max_spare: u32,
}

impl Default for SmallParams {
    fn default() -> Self {
        Self {
            max_nodes: 8,
            max_links: 12,
            max_types: 3,
            max_m: 4,
            active_prob: 0.3,
            max_spare: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmallInstance {
    pub net: PhysicalNetwork,
    pub state: EmbeddingState,
    pub d_max: u32,
}

/// Random desk-scale instance; the graph may be disconnected and the spare
/// capacity may be too small for a full protection plan.
pub fn random_small_instance(seed: u64, p: SmallParams) -> SmallInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=p.max_nodes);
    let types = rng.gen_range(1..=p.max_types);
    let link_target = rng.gen_range(n - 1..=p.max_links.max(n - 1));
    let mut links = Vec::new();
    for _ in 0..link_target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            links.push((a, b));
        }
    }
    let mut counts = vec![vec![0u32; types]; n];
    for row in &mut counts {
        for v in row.iter_mut() {
            if rng.gen_bool(p.active_prob) {
                *v = rng.gen_range(1..=p.max_m);
            }
        }
    }
    let caps = counts
        .iter()
        .map(|row| row.iter().sum::<u32>() + rng.gen_range(0..=p.max_spare))
        .collect();
    let d_max = rng.gen_range(1..=2);
    let net = PhysicalNetwork::new(n, &links, caps).expect("generated links are valid");
    let state = EmbeddingState::from_counts(&net, &counts).expect("capacity covers load");
    SmallInstance { net, state, d_max }
}
