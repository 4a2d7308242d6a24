//! Small graphs with known structural roles.
//!
//! House roles (ids in declaration order, compressed if a role is absent):
//! a cycle carries `n_houses` five-node houses at equally spaced cycle nodes.
//! Each house is a square with a roof on its top edge; one bottom corner is
//! wired to the cycle. The two bottom corners and the two top corners are
//! told apart by which side the cycle edge is on, giving five house roles
//! plus the plain and attachment cycle roles.

use alloc::vec::Vec;

use super::{Graph, LabeledGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HouseRole {
    CyclePlain,
    CycleAttachment,
    BaseAttached,
    BaseFree,
    TopAttachedSide,
    TopFreeSide,
    Roof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BarbellRole {
    CliqueInterior,
    CliqueAttachment,
    /// Path node at this distance (1-based) from the nearer clique.
    Path(usize),
}

impl BarbellRole {
    fn id(self) -> usize {
        match self {
            Self::CliqueInterior => 0,
            Self::CliqueAttachment => 1,
            Self::Path(d) => 1 + d,
        }
    }
}

/// Two cliques of `clique_size` nodes joined through `path_len` path nodes.
///
/// Node order: first clique (its attachment node last), path, second clique
/// (its attachment node first). Mirror-image nodes share a role.
pub fn make_barbell(clique_size: usize, path_len: usize) -> Result<LabeledGraph> {
    if clique_size < 3 {
        return Err(Error::InvalidArgument(alloc::format!(
            "barbell clique size must be at least 3, got {clique_size}"
        )));
    }
    let m = clique_size;
    let n = 2 * m + path_len;
    let second = m + path_len;
    let mut edges = Vec::new();
    for start in [0, second] {
        for i in start..start + m {
            for j in i + 1..start + m {
                edges.push((i, j));
            }
        }
    }
    // chain: attachment A, path nodes, attachment B
    let chain: Vec<usize> = core::iter::once(m - 1)
        .chain(m..second)
        .chain(core::iter::once(second))
        .collect();
    edges.extend(chain.windows(2).map(|w| (w[0], w[1])));

    let mut roles = alloc::vec![BarbellRole::CliqueInterior; n];
    roles[m - 1] = BarbellRole::CliqueAttachment;
    roles[second] = BarbellRole::CliqueAttachment;
    for (i, node) in (m..second).enumerate() {
        let pos = i + 1;
        roles[node] = BarbellRole::Path(pos.min(path_len + 1 - pos));
    }
    let (graph, _) = Graph::from_edges(n, edges)?;
    LabeledGraph::new(graph, roles.into_iter().map(BarbellRole::id).collect())
}

/// A cycle of `cycle_len` nodes with `n_houses` houses attached at cycle
/// positions `floor(i * cycle_len / n_houses)`.
///
/// Nodes `0..cycle_len` form the cycle; house `h` occupies the five ids
/// starting at `cycle_len + 5h` in the order attached base, free base, top
/// over attached base, top over free base, roof.
pub fn make_house_cycle(cycle_len: usize, n_houses: usize) -> Result<LabeledGraph> {
    if n_houses == 0 || cycle_len < n_houses {
        return Err(Error::InvalidArgument(alloc::format!(
            "need cycle_len >= n_houses >= 1, got cycle_len={cycle_len}, n_houses={n_houses}"
        )));
    }
    if cycle_len < 3 {
        return Err(Error::InvalidArgument(alloc::format!(
            "a simple cycle needs at least 3 nodes, got {cycle_len}"
        )));
    }
    let n = cycle_len + 5 * n_houses;
    let mut edges: Vec<(usize, usize)> = (0..cycle_len).map(|i| (i, (i + 1) % cycle_len)).collect();
    let mut roles = alloc::vec![HouseRole::CyclePlain; n];
    for h in 0..n_houses {
        let anchor = h * cycle_len / n_houses;
        let b = cycle_len + 5 * h;
        let (base_a, base_f, top_a, top_f, roof) = (b, b + 1, b + 2, b + 3, b + 4);
        edges.extend([
            (anchor, base_a),
            (base_a, base_f),
            (base_a, top_a),
            (base_f, top_f),
            (top_a, top_f),
            (top_a, roof),
            (top_f, roof),
        ]);
        roles[anchor] = HouseRole::CycleAttachment;
        roles[base_a] = HouseRole::BaseAttached;
        roles[base_f] = HouseRole::BaseFree;
        roles[top_a] = HouseRole::TopAttachedSide;
        roles[top_f] = HouseRole::TopFreeSide;
        roles[roof] = HouseRole::Roof;
    }
    let (graph, _) = Graph::from_edges(n, edges)?;
    LabeledGraph::new(graph, compress(&roles))
}

fn compress<T: Ord + Copy>(roles: &[T]) -> Vec<usize> {
    let mut distinct: Vec<T> = roles.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    roles
        .iter()
        .map(|r| distinct.binary_search(r).unwrap_or_default())
        .collect()
}

/// Two components whose focal nodes `u` and `v` have identical degree
/// profiles one hop out but different ones two hops out.
///
/// `u` and `v` both have degree 2 with two degree-2 neighbors. The far
/// endpoints behind those neighbors are leaves around `u` and degree-3 hubs
/// around `v`.
#[derive(Debug, Clone)]
pub struct DivergencePair {
    pub graph: Graph,
    pub u: usize,
    pub v: usize,
    /// A neighbor of `u` and its counterpart next to `v`.
    pub u_neighbor: usize,
    pub v_neighbor: usize,
}

pub fn make_divergence_pair() -> DivergencePair {
    // component one: 0=u, 1,2 its neighbors, 3,4 leaves
    // component two: 5=v, 6,7 its neighbors, 8,9 hubs, 10..14 leaves of hubs
    let edges = [
        (0, 1),
        (0, 2),
        (1, 3),
        (2, 4),
        (5, 6),
        (5, 7),
        (6, 8),
        (7, 9),
        (8, 10),
        (8, 11),
        (9, 12),
        (9, 13),
    ];
    let (graph, _) = Graph::from_edges(14, edges).expect("static edge list is valid");
    DivergencePair {
        graph,
        u: 0,
        v: 5,
        u_neighbor: 1,
        v_neighbor: 6,
    }
}
