//! Undirected simple graphs, node feature matrices, and structural features.

mod exemplar;
mod features;

pub use exemplar::{
    make_barbell, make_divergence_pair, make_house_cycle, BarbellRole, DivergencePair, HouseRole,
};
pub use features::{degree_features, neighbor_degree_features, FeatureMatrix};

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Undirected simple graph over dense node ids `0..n_nodes`.
///
/// Each adjacency list is sorted, free of duplicates and self-loops, and the
/// relation is symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

/// What [`Graph::from_edges`] discarded while building the graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeCleanup {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    pub fn empty(n_nodes: usize) -> Self {
        Self {
            adjacency: alloc::vec![Vec::new(); n_nodes],
        }
    }

    /// Builds a graph from an undirected edge list. Self-loops and repeated
    /// edges (in either orientation) are dropped and counted.
    pub fn from_edges(
        n_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(Self, EdgeCleanup)> {
        let mut adjacency = alloc::vec![Vec::new(); n_nodes];
        let mut cleanup = EdgeCleanup::default();
        let mut raw = 0usize;
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n_nodes {
                    return Err(Error::InvalidNode { node, n_nodes });
                }
            }
            if u == v {
                cleanup.self_loops += 1;
                continue;
            }
            raw += 1;
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut kept = 0usize;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            kept += list.len();
        }
        cleanup.duplicates = raw - kept / 2;
        if cleanup.self_loops > 0 || cleanup.duplicates > 0 {
            log::debug!(
                "dropped {} self-loop(s) and {} duplicate edge(s)",
                cleanup.self_loops,
                cleanup.duplicates
            );
        }
        Ok((Self { adjacency }, cleanup))
    }

    /// Wraps prepared adjacency lists after checking every invariant.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let graph = Self { adjacency };
        graph.validate()?;
        Ok(graph)
    }

    /// Full scan of the symmetry, range, ordering and self-loop invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        for (u, list) in self.adjacency.iter().enumerate() {
            for (i, &v) in list.iter().enumerate() {
                if v >= n {
                    return Err(Error::InvalidNode {
                        node: v,
                        n_nodes: n,
                    });
                }
                if v == u {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "self-loop at node {u}"
                    )));
                }
                if i > 0 && list[i - 1] >= v {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "adjacency of node {u} is unsorted or has duplicates"
                    )));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "edge {u}-{v} is not symmetric"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn check_node(&self, u: usize) -> Result<()> {
        if u < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node: u,
                n_nodes: self.n_nodes(),
            })
        }
    }

    pub fn degree(&self, u: usize) -> Result<usize> {
        self.check_node(u)?;
        Ok(self.adjacency[u].len())
    }

    /// Sorted neighbor list of `u`. Panics when `u` is out of range.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_nodes() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Disjoint union; node ids of `other` are shifted by `self.n_nodes()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let offset = self.n_nodes();
        let mut adjacency = self.adjacency.clone();
        adjacency.extend(
            other
                .adjacency
                .iter()
                .map(|list| list.iter().map(|&v| v + offset).collect()),
        );
        Graph { adjacency }
    }
}

/// A graph with a ground-truth role id per node; ids are contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub role_labels: Vec<usize>,
}

impl LabeledGraph {
    pub fn new(graph: Graph, role_labels: Vec<usize>) -> Result<Self> {
        if role_labels.len() != graph.n_nodes() {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} labels for {} nodes",
                role_labels.len(),
                graph.n_nodes()
            )));
        }
        let n_roles = role_labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = alloc::vec![false; n_roles];
        for &r in &role_labels {
            seen[r] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument(
                "role labels are not contiguous".into(),
            ));
        }
        Ok(Self { graph, role_labels })
    }

    pub fn n_roles(&self) -> usize {
        self.role_labels.iter().max().map_or(0, |m| m + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap().0
    }

    #[test]
    fn degree_of_path_middle() {
        assert_eq!(path3().degree(1), Ok(2));
    }

    #[test]
    fn isolated_node_has_degree_zero() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap().0;
        assert_eq!(g.degree(3), Ok(0));
    }

    #[test]
    fn degree_out_of_range() {
        assert_eq!(
            path3().degree(3),
            Err(Error::InvalidNode {
                node: 3,
                n_nodes: 3
            })
        );
    }

    #[test]
    fn duplicates_and_self_loops_are_dropped() {
        let (g, cleanup) = Graph::from_edges(3, [(0, 1), (1, 0), (0, 1), (2, 2), (1, 2)]).unwrap();
        assert_eq!(g.n_edges(), 2);
        assert_eq!(
            cleanup,
            EdgeCleanup {
                self_loops: 1,
                duplicates: 2
            }
        );
        g.validate().unwrap();
    }

    #[test]
    fn asymmetric_adjacency_rejected() {
        assert!(Graph::from_adjacency(alloc::vec![alloc::vec![1], alloc::vec![]]).is_err());
    }

    #[test]
    fn labels_must_be_contiguous() {
        assert!(LabeledGraph::new(path3(), alloc::vec![0, 2, 0]).is_err());
        assert!(LabeledGraph::new(path3(), alloc::vec![0, 1, 0]).is_ok());
    }
}
