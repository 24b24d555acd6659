//! Service chains, a deterministic first-fit embedder, and the node×type VNF
//! count matrix (`m`) that every provisioning algorithm consumes.

use serde::{Deserialize, Serialize};

use crate::topology::{NodeId, PhysicalNetwork};

/// VNF type identifier in `0..type_count`.
pub type TypeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceChain {
    pub id: u64,
    /// Ordered VNF types of the chain.
    #[serde(rename = "types")]
    pub vnf_types: Vec<TypeId>,
    #[serde(rename = "src")]
    pub source: NodeId,
    #[serde(rename = "dst")]
    pub destination: NodeId,
}

/// Where each VNF of one chain landed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPlacement {
    pub chain: u64,
    pub hosts: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("chain {0} has no VNFs")]
    EmptyChain(u64),
    #[error("chain {chain} uses type {ty}, only {type_count} types exist")]
    UnknownType {
        chain: u64,
        ty: TypeId,
        type_count: usize,
    },
    #[error("chain {chain} references node {node} outside the network")]
    NodeOutOfRange { chain: u64, node: NodeId },
    #[error("chain {chain}: destination unreachable from source")]
    NoPath { chain: u64 },
    /// Not enough free capacity reachable for some VNF; state unchanged.
    #[error("chain {chain} rejected: VNF {vnf} cannot be placed")]
    Rejected { chain: u64, vnf: usize },
    #[error("count matrix has {got} rows, network has {expected} nodes")]
    RowCountMismatch { expected: usize, got: usize },
    #[error("count matrix row {node} has {got} entries, expected {expected}")]
    TypeCountMismatch {
        node: NodeId,
        expected: usize,
        got: usize,
    },
    #[error("node {node} hosts {load} VNFs but has capacity {capacity}")]
    OverCapacity {
        node: NodeId,
        load: u32,
        capacity: u32,
    },
}

/// Embedded VNFs per node and type.
///
/// `m` is the aggregate of `placements`, except for states built with
/// [`EmbeddingState::from_counts`], which carry no chain records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingState {
    node_count: usize,
    type_count: usize,
    m: Vec<u32>,
    load: Vec<u32>,
    placements: Vec<ChainPlacement>,
}

impl EmbeddingState {
    pub fn empty(node_count: usize, type_count: usize) -> Self {
        Self {
            node_count,
            type_count,
            m: vec![0; node_count * type_count],
            load: vec![0; node_count],
            placements: Vec::new(),
        }
    }

    /// Builds a state straight from an `m` matrix (rows = nodes), bypassing
    /// the embedder. Rejects matrices that exceed node capacity.
    pub fn from_counts(net: &PhysicalNetwork, counts: &[Vec<u32>]) -> Result<Self, EmbedError> {
        let node_count = net.node_count();
        if counts.len() != node_count {
            return Err(EmbedError::RowCountMismatch {
                expected: node_count,
                got: counts.len(),
            });
        }
        let type_count = counts.first().map_or(0, Vec::len);
        let mut state = Self::empty(node_count, type_count);
        for (n, row) in counts.iter().enumerate() {
            if row.len() != type_count {
                return Err(EmbedError::TypeCountMismatch {
                    node: n,
                    expected: type_count,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                state.m[n * type_count + j] = v;
            }
            let load: u32 = row.iter().sum();
            if load > net.capacity(n) {
                return Err(EmbedError::OverCapacity {
                    node: n,
                    load,
                    capacity: net.capacity(n),
                });
            }
            state.load[n] = load;
        }
        Ok(state)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn type_count(&self) -> usize {
        self.type_count
    }

    /// `m_ij`: type-`j` VNFs embedded on node `i`.
    #[inline]
    pub fn m(&self, i: NodeId, j: TypeId) -> u32 {
        self.m[i * self.type_count + j]
    }

    /// `u_n`: all VNFs embedded on node `n`.
    #[inline]
    pub fn load(&self, n: NodeId) -> u32 {
        self.load[n]
    }

    pub fn placements(&self) -> &[ChainPlacement] {
        &self.placements
    }

    pub fn total_vnfs(&self) -> u64 {
        self.load.iter().map(|&l| u64::from(l)).sum()
    }

    /// Active pairs `(i, j)` with `m_ij >= 1`, in node-major order.
    pub fn active_pairs(&self) -> impl Iterator<Item = (NodeId, TypeId)> + '_ {
        (0..self.node_count)
            .flat_map(move |i| (0..self.type_count).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.m(i, j) > 0)
    }

    /// The `m` matrix as nested rows.
    pub fn counts(&self) -> Vec<Vec<u32>> {
        self.m
            .chunks(self.type_count.max(1))
            .take(self.node_count)
            .map(<[u32]>::to_vec)
            .collect()
    }

    /// Returns a copy with `m_ij` decreased by one (no-op on zero).
    pub fn with_decrement(&self, i: NodeId, j: TypeId) -> Self {
        let mut out = self.clone();
        let idx = i * self.type_count + j;
        if out.m[idx] > 0 {
            out.m[idx] -= 1;
            out.load[i] -= 1;
        }
        out
    }

    /// Places `chain` with the first-fit path walk.
    ///
    /// Each VNF, in chain order, goes on the first node of the (lowest-id)
    /// shortest source→destination path at or after the previous VNF's path
    /// position that has a free slot. Failing that, it goes on the free node
    /// nearest (by hops, then id) to the current path position. On rejection
    /// the state is left untouched.
    pub fn embed_chain(
        &mut self,
        net: &PhysicalNetwork,
        chain: &ServiceChain,
    ) -> Result<&ChainPlacement, EmbedError> {
        if chain.vnf_types.is_empty() {
            return Err(EmbedError::EmptyChain(chain.id));
        }
        for node in [chain.source, chain.destination] {
            if node >= net.node_count() {
                return Err(EmbedError::NodeOutOfRange {
                    chain: chain.id,
                    node,
                });
            }
        }
        if let Some(&ty) = chain.vnf_types.iter().find(|&&t| t >= self.type_count) {
            return Err(EmbedError::UnknownType {
                chain: chain.id,
                ty,
                type_count: self.type_count,
            });
        }
        let path = net
            .shortest_path(chain.source, chain.destination)
            .ok_or(EmbedError::NoPath { chain: chain.id })?;

        let mut free: Vec<u32> = (0..net.node_count())
            .map(|n| net.capacity(n).saturating_sub(self.load[n]))
            .collect();
        let mut cursor = 0;
        let mut hosts = Vec::with_capacity(chain.vnf_types.len());
        for vnf in 0..chain.vnf_types.len() {
            let host = match path[cursor..].iter().position(|&n| free[n] > 0) {
                Some(offset) => {
                    cursor += offset;
                    path[cursor]
                }
                None => {
                    let anchor = path[cursor];
                    (0..net.node_count())
                        .filter(|&n| free[n] > 0)
                        .filter_map(|n| net.hop(anchor, n).map(|d| (d, n)))
                        .min()
                        .map(|(_, n)| n)
                        .ok_or(EmbedError::Rejected {
                            chain: chain.id,
                            vnf,
                        })?
                }
            };
            free[host] -= 1;
            hosts.push(host);
        }

        for (&host, &ty) in hosts.iter().zip(&chain.vnf_types) {
            self.m[host * self.type_count + ty] += 1;
            self.load[host] += 1;
        }
        self.placements.push(ChainPlacement {
            chain: chain.id,
            hosts,
        });
        Ok(self.placements.last().expect("just pushed"))
    }

    pub fn to_file(&self) -> StateFile {
        StateFile {
            types: self.type_count,
            m: self.counts(),
        }
    }
}

/// Fraction of all slots occupied by embedded VNFs.
pub fn utilization(net: &PhysicalNetwork, state: &EmbeddingState) -> f64 {
    let cap: u64 = net.capacities().iter().map(|&c| u64::from(c)).sum();
    if cap == 0 {
        return 0.0;
    }
    state.total_vnfs() as f64 / cap as f64
}

/// Embedded-state dump: `{"types": J, "m": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateFile {
    pub types: usize,
    pub m: Vec<Vec<u32>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3(cap: u32) -> PhysicalNetwork {
        PhysicalNetwork::new(3, &[(0, 1), (1, 2)], vec![cap; 3]).unwrap()
    }

    fn chain(id: u64, types: &[TypeId], src: NodeId, dst: NodeId) -> ServiceChain {
        ServiceChain {
            id,
            vnf_types: types.to_vec(),
            source: src,
            destination: dst,
        }
    }

    #[test]
    fn first_fit_walks_the_path() {
        let net = path3(1);
        let mut st = EmbeddingState::empty(3, 2);
        let p = st.embed_chain(&net, &chain(0, &[0, 1], 0, 2)).unwrap();
        assert_eq!(p.hosts, vec![0, 1]);
        assert_eq!(st.m(0, 0), 1);
        assert_eq!(st.m(1, 1), 1);
        assert_eq!(st.load(2), 0);
    }

    #[test]
    fn falls_back_to_nearest_off_path_node() {
        // star: 0 - 1 - 2 with 3 hanging off 1 and 4 hanging off 3
        let net = PhysicalNetwork::new(5, &[(0, 1), (1, 2), (1, 3), (3, 4)], vec![1, 0, 0, 1, 1])
            .unwrap();
        let mut st = EmbeddingState::empty(5, 1);
        let p = st.embed_chain(&net, &chain(7, &[0, 0, 0], 0, 2)).unwrap();
        // node 0 on path; then path exhausted past cursor, anchor 0: node 3 at 2 hops, node 4 at 3
        assert_eq!(p.hosts, vec![0, 3, 4]);
    }

    #[test]
    fn full_network_rejects_without_mutation() {
        let net = path3(1);
        let mut st = EmbeddingState::empty(3, 1);
        st.embed_chain(&net, &chain(0, &[0, 0, 0], 0, 2)).unwrap();
        let before = st.clone();
        assert_eq!(
            st.embed_chain(&net, &chain(1, &[0], 1, 1)),
            Err(EmbedError::Rejected { chain: 1, vnf: 0 })
        );
        assert_eq!(st, before);
        // partial fit also leaves nothing behind
        let mut st = EmbeddingState::empty(3, 1);
        st.embed_chain(&net, &chain(0, &[0, 0], 0, 0)).unwrap();
        let before = st.clone();
        assert!(st.embed_chain(&net, &chain(1, &[0, 0], 0, 2)).is_err());
        assert_eq!(st, before);
    }

    #[test]
    fn repeated_embedding_is_additive() {
        let net = path3(10);
        let mut st = EmbeddingState::empty(3, 2);
        let c = chain(0, &[0, 1, 1], 0, 2);
        st.embed_chain(&net, &c).unwrap();
        let once = st.counts();
        st.embed_chain(&net, &c).unwrap();
        for (a, b) in once.iter().flatten().zip(st.counts().iter().flatten()) {
            assert_eq!(*b, 2 * a);
        }
        assert_eq!(st.total_vnfs(), 6);
        assert_eq!(st.placements().len(), 2);
    }

    #[test]
    fn input_validation() {
        let net = path3(1);
        let mut st = EmbeddingState::empty(3, 1);
        assert_eq!(
            st.embed_chain(&net, &chain(3, &[], 0, 1)),
            Err(EmbedError::EmptyChain(3))
        );
        assert!(matches!(
            st.embed_chain(&net, &chain(3, &[1], 0, 1)),
            Err(EmbedError::UnknownType { ty: 1, .. })
        ));
        assert!(matches!(
            st.embed_chain(&net, &chain(3, &[0], 0, 9)),
            Err(EmbedError::NodeOutOfRange { node: 9, .. })
        ));
        let split = PhysicalNetwork::new(2, &[], vec![1, 1]).unwrap();
        let mut st = EmbeddingState::empty(2, 1);
        assert_eq!(
            st.embed_chain(&split, &chain(4, &[0], 0, 1)),
            Err(EmbedError::NoPath { chain: 4 })
        );
    }

    #[test]
    fn utilization_fractions() {
        let net = PhysicalNetwork::new(2, &[(0, 1)], vec![2, 2]).unwrap();
        assert_eq!(utilization(&net, &EmbeddingState::empty(2, 1)), 0.0);
        let st = EmbeddingState::from_counts(&net, &[vec![1], vec![0]]).unwrap();
        assert_eq!(utilization(&net, &st), 0.25);
        let st = EmbeddingState::from_counts(&net, &[vec![2], vec![2]]).unwrap();
        assert_eq!(utilization(&net, &st), 1.0);
    }

    #[test]
    fn from_counts_checks_shape_and_capacity() {
        let net = PhysicalNetwork::new(2, &[(0, 1)], vec![2, 2]).unwrap();
        assert!(matches!(
            EmbeddingState::from_counts(&net, &[vec![3], vec![0]]),
            Err(EmbedError::OverCapacity { node: 0, .. })
        ));
        assert!(matches!(
            EmbeddingState::from_counts(&net, &[vec![1]]),
            Err(EmbedError::RowCountMismatch { .. })
        ));
        assert!(matches!(
            EmbeddingState::from_counts(&net, &[vec![1], vec![0, 1]]),
            Err(EmbedError::TypeCountMismatch { node: 1, .. })
        ));
    }

    #[test]
    fn active_pairs_and_decrement() {
        let net = path3(5);
        let st = EmbeddingState::from_counts(&net, &[vec![1, 0], vec![0, 0], vec![2, 3]]).unwrap();
        assert_eq!(st.active_pairs().collect::<Vec<_>>(), vec![(0, 0), (2, 0), (2, 1)]);
        let d = st.with_decrement(0, 0);
        assert_eq!(d.m(0, 0), 0);
        assert_eq!(d.load(0), 0);
        assert_eq!(d.with_decrement(0, 0), d);
    }
}
