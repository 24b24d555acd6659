//! Physical infrastructure graph: nodes with VNF slot capacities, unweighted
//! links, and the all-pairs minimum hop matrix every algorithm filters on.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

/// Dense node identifier in `0..node_count`.
pub type NodeId = usize;

/// Minimum hop count between two nodes. `None` means the pair is unreachable;
/// there is no "large number" stand-in.
pub type Hops = Option<u32>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    /// The network has no nodes.
    #[error("a network needs at least one node")]
    Empty,
    /// A link endpoint is out of range or the link is a self-loop.
    #[error("malformed link ({0}, {1})")]
    MalformedLink(NodeId, NodeId),
    /// The capacity vector does not have one entry per node.
    #[error("expected {expected} capacities, got {got}")]
    CapacityLengthMismatch { expected: usize, got: usize },
    /// A node id used in a query is out of range.
    #[error("node {node} out of range (network has {node_count} nodes)")]
    NodeOutOfRange { node: NodeId, node_count: usize },
}

/// Immutable physical network `G = (N, L)` with capacities and hop distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalNetwork {
    node_count: usize,
    links: Vec<(NodeId, NodeId)>,
    capacity: Vec<u32>,
    adjacency: Vec<Vec<NodeId>>,
    hop_dist: Vec<Hops>,
}

impl PhysicalNetwork {
    /// Builds a network and computes all-pairs hop distances with one BFS per
    /// node. Duplicate links (in either orientation) are collapsed.
    pub fn new(
        node_count: usize,
        links: &[(NodeId, NodeId)],
        capacity: Vec<u32>,
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        if capacity.len() != node_count {
            return Err(TopologyError::CapacityLengthMismatch {
                expected: node_count,
                got: capacity.len(),
            });
        }
        let mut set = BTreeSet::new();
        for &(a, b) in links {
            if a >= node_count || b >= node_count || a == b {
                return Err(TopologyError::MalformedLink(a, b));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let links: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b) in &links {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let mut hop_dist = vec![None; node_count * node_count];
        for src in 0..node_count {
            let row = &mut hop_dist[src * node_count..(src + 1) * node_count];
            bfs_into(&adjacency, src, row);
        }
        Ok(Self {
            node_count,
            links,
            capacity,
            adjacency,
            hop_dist,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Normalized links `(a, b)` with `a < b`, sorted.
    pub fn links(&self) -> &[(NodeId, NodeId)] {
        &self.links
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacity
    }

    pub fn capacity(&self, n: NodeId) -> u32 {
        self.capacity[n]
    }

    /// Neighbours of `n` in ascending id order.
    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.adjacency[n]
    }

    /// Checked hop lookup.
    pub fn hops(&self, i: NodeId, n: NodeId) -> Result<Hops, TopologyError> {
        self.check_node(i)?;
        self.check_node(n)?;
        Ok(self.hop(i, n))
    }

    /// Unchecked hop lookup for hot loops; panics on out-of-range ids.
    #[inline]
    pub fn hop(&self, i: NodeId, n: NodeId) -> Hops {
        self.hop_dist[i * self.node_count + n]
    }

    /// True when `n` is reachable from `i` in at most `d_max` hops.
    #[inline]
    pub fn within(&self, i: NodeId, n: NodeId, d_max: u32) -> bool {
        matches!(self.hop(i, n), Some(d) if d <= d_max)
    }

    pub fn check_node(&self, n: NodeId) -> Result<(), TopologyError> {
        if n < self.node_count {
            Ok(())
        } else {
            Err(TopologyError::NodeOutOfRange {
                node: n,
                node_count: self.node_count,
            })
        }
    }

    pub fn is_connected(&self) -> bool {
        (0..self.node_count).all(|n| self.hop(0, n).is_some())
    }

    /// A shortest path from `src` to `dst`, preferring the lowest-id parent at
    /// every BFS layer. `None` if unreachable.
    pub fn shortest_path(&self, src: NodeId, dst: NodeId) -> Option<Vec<NodeId>> {
        self.hop(src, dst)?;
        // Walk backwards from dst choosing the lowest-id neighbour one hop closer to src.
        let mut path = vec![dst];
        let mut cur = dst;
        while cur != src {
            let d = self.hop(src, cur)?;
            cur = *self
                .neighbors(cur)
                .iter()
                .find(|&&p| self.hop(src, p) == Some(d - 1))?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            nodes: self.node_count,
            capacities: self.capacity.clone(),
            links: self.links.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

fn bfs_into(adjacency: &[Vec<NodeId>], src: NodeId, row: &mut [Hops]) {
    let mut queue = VecDeque::new();
    row[src] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = row[u].expect("queued nodes have a distance");
        for &v in &adjacency[u] {
            if row[v].is_none() {
                row[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
}

/// On-disk network: `{"nodes": N, "capacities": [...], "links": [[a,b], ...]}`,
/// ids 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub nodes: usize,
    pub capacities: Vec<u32>,
    pub links: Vec<[NodeId; 2]>,
}

impl TryFrom<&NetworkFile> for PhysicalNetwork {
    type Error = TopologyError;

    fn try_from(f: &NetworkFile) -> Result<Self, Self::Error> {
        let links: Vec<_> = f.links.iter().map(|&[a, b]| (a, b)).collect();
        PhysicalNetwork::new(f.nodes, &links, f.capacities.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> PhysicalNetwork {
        PhysicalNetwork::new(3, &[(0, 1), (1, 2)], vec![2, 2, 2]).unwrap()
    }

    #[test]
    fn path_distances() {
        let net = path3();
        assert_eq!(net.hops(0, 2).unwrap(), Some(2));
        assert_eq!(net.hops(0, 1).unwrap(), Some(1));
        assert_eq!(net.hops(2, 2).unwrap(), Some(0));
        assert_eq!(net.shortest_path(0, 2), Some(vec![0, 1, 2]));
    }

    #[test]
    fn disconnected_pair_is_unreachable() {
        let net = PhysicalNetwork::new(2, &[], vec![1, 1]).unwrap();
        assert_eq!(net.hops(0, 1).unwrap(), None);
        assert!(!net.within(0, 1, u32::MAX));
        assert!(!net.is_connected());
        assert_eq!(net.shortest_path(0, 1), None);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            PhysicalNetwork::new(2, &[(0, 0)], vec![1, 1]),
            Err(TopologyError::MalformedLink(0, 0))
        );
        assert_eq!(
            PhysicalNetwork::new(2, &[(0, 2)], vec![1, 1]),
            Err(TopologyError::MalformedLink(0, 2))
        );
        assert_eq!(
            PhysicalNetwork::new(2, &[(0, 1)], vec![1]),
            Err(TopologyError::CapacityLengthMismatch {
                expected: 2,
                got: 1
            })
        );
        assert_eq!(PhysicalNetwork::new(0, &[], vec![]), Err(TopologyError::Empty));
        assert!(matches!(
            path3().hops(0, 3),
            Err(TopologyError::NodeOutOfRange { node: 3, .. })
        ));
    }

    #[test]
    fn duplicate_links_collapse() {
        let net = PhysicalNetwork::new(3, &[(0, 1), (1, 0), (1, 2)], vec![0; 3]).unwrap();
        assert_eq!(net.links(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn file_roundtrip() {
        let net = path3();
        let json = serde_json::to_string(&net.to_file()).unwrap();
        assert_eq!(json, r#"{"nodes":3,"capacities":[2,2,2],"links":[[0,1],[1,2]]}"#);
        let back: NetworkFile = serde_json::from_str(&json).unwrap();
        assert_eq!(PhysicalNetwork::try_from(&back).unwrap(), net);
    }

    /// Independent all-pairs oracle over the raw edge list.
    fn floyd_warshall(n: usize, links: &[(usize, usize)]) -> Vec<Vec<Option<u32>>> {
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0);
        }
        for &(a, b) in links {
            if a != b {
                d[a][b] = Some(1);
                d[b][a] = Some(1);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|cur| x + y < cur) {
                            d[i][j] = Some(x + y);
                        }
                    }
                }
            }
        }
        d
    }

    fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..=12).prop_flat_map(|n| {
            let links = proptest::collection::vec((0..n, 0..n), 0..=30)
                .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).collect::<Vec<_>>());
            (Just(n), links)
        })
    }

    proptest! {
        #[test]
        fn bfs_matches_floyd_warshall((n, links) in arb_graph()) {
            let net = PhysicalNetwork::new(n, &links, vec![1; n]).unwrap();
            let oracle = floyd_warshall(n, &links);
            for (i, row) in oracle.iter().enumerate() {
                for (k, &d) in row.iter().enumerate() {
                    prop_assert_eq!(net.hop(i, k), d);
                    prop_assert_eq!(net.hop(i, k), net.hop(k, i));
                }
                prop_assert_eq!(net.hop(i, i), Some(0));
            }
            for &(a, b) in net.links() {
                prop_assert_eq!(net.hop(a, b), Some(1));
            }
            // triangle inequality over reachable triples
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if let (Some(ab), Some(bc), Some(ac)) = (net.hop(a, b), net.hop(b, c), net.hop(a, c)) {
                            prop_assert!(ac <= ab + bc);
                        }
                    }
                }
            }
        }
    }
}
