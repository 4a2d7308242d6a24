//! Neighbor sampling and dropout draws for one encoder pass, fixed up front
//! so that the numeric pass is a pure function of the parameters.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{EncoderDims, Fanouts, Mode};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::tape::Groups;
use crate::rng::Rng;
use rand::RngCore;

/// One node to embed. `top_neighbors` replaces the node's own neighbor list
/// wherever the node is the center of an aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeRequest {
    pub node: usize,
    pub top_neighbors: Option<Vec<usize>>,
}

impl EncodeRequest {
    pub fn node(node: usize) -> Self {
        Self {
            node,
            top_neighbors: None,
        }
    }
}

/// Sampled computation structure for a batch of requests.
///
/// Depth-1 "instances" are (node, neighbor-source) pairs, each computed once
/// per pass as in minibatch GraphSAGE: one per node reached through its own
/// neighbor list, one per distinct (node, override list) center. `base_groups[i]` lists the rows of `base_rows`
/// averaged for instance `i`; `instance_groups[r]` lists the instances
/// averaged for request `r`, center first. Depth-2 sampling and dropout are
/// drawn per request.
#[derive(Debug, Clone)]
pub struct EncodePlan {
    base_rows: Vec<usize>,
    base_groups: Groups,
    instance_groups: Groups,
    centers: Vec<usize>,
    masks: Option<[Vec<f64>; 4]>,
}

/// Keeps all of `list` when it fits in `fanout`, else a uniform subset.
pub(crate) fn sample_neighbors(list: &[usize], fanout: usize, rng: &mut Rng) -> Vec<usize> {
    if list.len() <= fanout {
        list.to_vec()
    } else {
        let mut picked: Vec<usize> = rng
            .sample_distinct(list.len(), fanout)
            .into_iter()
            .map(|i| list[i])
            .collect();
        picked.sort_unstable();
        picked
    }
}

/// Inverted-dropout mask: each entry is `0` with probability `p`, else
/// `1 / (1 - p)`.
pub(crate) fn dropout_mask(len: usize, p: f64, rng: &mut Rng) -> Vec<f64> {
    if p <= 0.0 {
        return alloc::vec![1.0; len];
    }
    if p >= 1.0 {
        return alloc::vec![0.0; len];
    }
    let keep = 1.0 / (1.0 - p);
    // 32-bit draws: P(drop) = p to within 2^-32
    let threshold = (p * 4_294_967_296.0) as u64;
    (0..len)
        .map(|_| {
            if u64::from(rng.next_u32()) < threshold {
                0.0
            } else {
                keep
            }
        })
        .collect()
}

struct Builder {
    row_of: Vec<usize>,
    shared: Vec<usize>,
    base_rows: Vec<usize>,
    base_groups: Groups,
    members: Vec<usize>,
    fanout: usize,
}

impl Builder {
    fn base_row(&mut self, u: usize) -> usize {
        if self.row_of[u] == usize::MAX {
            self.row_of[u] = self.base_rows.len();
            self.base_rows.push(u);
        }
        self.row_of[u]
    }

    fn instance(&mut self, node: usize, source: &[usize], rng: &mut Rng) -> usize {
        let mut members = core::mem::take(&mut self.members);
        members.clear();
        members.push(self.base_row(node));
        for v in sample_neighbors(source, self.fanout, rng) {
            members.push(self.base_row(v));
        }
        self.base_groups.push(members.iter().copied());
        self.members = members;
        self.base_groups.len() - 1
    }

    fn shared_instance(&mut self, graph: &Graph, node: usize, rng: &mut Rng) -> usize {
        if self.shared[node] == usize::MAX {
            self.shared[node] = self.instance(node, graph.neighbors(node), rng);
        }
        self.shared[node]
    }
}

impl EncodePlan {
    pub fn build(
        graph: &Graph,
        requests: &[EncodeRequest],
        fanouts: Fanouts,
        dims: &EncoderDims,
        dropout: f64,
        mode: Mode,
        rng: &mut Rng,
    ) -> Result<Self> {
        let n = graph.n_nodes();
        let mut b = Builder {
            row_of: alloc::vec![usize::MAX; n],
            shared: alloc::vec![usize::MAX; n],
            base_rows: Vec::new(),
            base_groups: Groups::new(),
            members: Vec::new(),
            fanout: fanouts.depth2,
        };
        let mut overridden: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let mut instance_groups = Groups::new();
        let mut centers = Vec::with_capacity(requests.len());
        let mut group = Vec::new();
        for req in requests {
            graph.check_node(req.node)?;
            let (top, center): (&[usize], usize) = match &req.top_neighbors {
                Some(list) => {
                    if let Some(&bad) = list.iter().find(|&&v| v >= n) {
                        return Err(Error::InvalidNode {
                            node: bad,
                            n_nodes: n,
                        });
                    }
                    let key = (req.node, list.clone());
                    let center = match overridden.get(&key) {
                        Some(&i) => i,
                        None => {
                            let i = b.instance(req.node, list, rng);
                            overridden.insert(key, i);
                            i
                        }
                    };
                    (list, center)
                }
                None => (
                    graph.neighbors(req.node),
                    b.shared_instance(graph, req.node, rng),
                ),
            };
            group.clear();
            group.push(center);
            for t in sample_neighbors(top, fanouts.depth1, rng) {
                group.push(b.shared_instance(graph, t, rng));
            }
            centers.push(center);
            instance_groups.push(group.iter().copied());
        }
        let Builder {
            base_rows,
            base_groups,
            ..
        } = b;
        let n_instances = base_groups.len();

        let masks = match mode {
            Mode::Infer => None,
            Mode::Train => {
                let (d1, d2, r) = (dims.depth1, dims.depth2, requests.len());
                Some([
                    dropout_mask(n_instances * d1, dropout, rng),
                    dropout_mask(n_instances * d1, dropout, rng),
                    dropout_mask(r * d2, dropout, rng),
                    dropout_mask(r * d2, dropout, rng),
                ])
            }
        };

        Ok(Self {
            base_rows,
            base_groups,
            instance_groups,
            centers,
            masks,
        })
    }

    pub fn base_rows(&self) -> &[usize] {
        &self.base_rows
    }

    pub fn base_groups(&self) -> &Groups {
        &self.base_groups
    }

    pub fn instance_groups(&self) -> &Groups {
        &self.instance_groups
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn masks(&self) -> Option<&[Vec<f64>; 4]> {
        self.masks.as_ref()
    }

    pub fn n_requests(&self) -> usize {
        self.centers.len()
    }

    pub fn n_instances(&self) -> usize {
        self.base_groups.len()
    }
}
