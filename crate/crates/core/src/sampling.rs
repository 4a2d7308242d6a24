//! Positive and negative example construction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::Rng;
use crate::train::{LossKind, TrainConfig};

/// Uniform draw from the nodes that are neither `u` nor adjacent to `u`.
pub fn sample_nonadjacent(graph: &Graph, u: usize, rng: &mut Rng) -> Result<usize> {
    graph.check_node(u)?;
    let n = graph.n_nodes();
    let neighbors = graph.neighbors(u);
    let candidates = n - 1 - neighbors.len();
    if candidates == 0 {
        return Err(Error::NoValidNegative { node: u });
    }
    // k-th candidate in id order: step over excluded ids (sorted) at or
    // below the running position
    let mut node = rng.below(candidates);
    let mut self_done = false;
    let mut excluded = neighbors.iter().copied().peekable();
    loop {
        let next = match (self_done, excluded.peek()) {
            (false, Some(&v)) if v < u => {
                excluded.next();
                v
            }
            (false, _) => {
                self_done = true;
                u
            }
            (true, Some(&v)) => {
                excluded.next();
                v
            }
            (true, None) => break,
        };
        if next <= node {
            node += 1;
        } else {
            break;
        }
    }
    Ok(node)
}

/// Uniform draw from every node except `u`.
pub fn sample_random_other(n_nodes: usize, u: usize, rng: &mut Rng) -> Result<usize> {
    if u >= n_nodes {
        return Err(Error::InvalidNode { node: u, n_nodes });
    }
    if n_nodes < 2 {
        return Err(Error::NoValidNegative { node: u });
    }
    let k = rng.below(n_nodes - 1);
    Ok(if k >= u { k + 1 } else { k })
}

/// Permutation of batch positions in which no position receives a copy of
/// its own node. Entry `i` names the position whose neighbor list position
/// `i` borrows.
///
/// Starts from a uniform shuffle and repairs clashes with random swaps, so
/// it succeeds whenever no node fills more than half the batch.
pub fn shuffle_batch_adjacency(batch_nodes: &[usize], rng: &mut Rng) -> Result<Vec<usize>> {
    let n = batch_nodes.len();
    if n < 2 {
        return Err(Error::CannotDerange { len: n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    let clash = |perm: &[usize], i: usize| batch_nodes[perm[i]] == batch_nodes[i];
    for _ in 0..64 {
        let mut clean = true;
        for i in 0..n {
            if !clash(&perm, i) {
                continue;
            }
            clean = false;
            for _ in 0..4 * n {
                let j = rng.below(n);
                if batch_nodes[perm[j]] != batch_nodes[i] && batch_nodes[perm[i]] != batch_nodes[j]
                {
                    perm.swap(i, j);
                    break;
                }
            }
        }
        if clean || (0..n).all(|i| !clash(&perm, i)) {
            return Ok(perm);
        }
    }
    Err(Error::CannotDerange { len: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeKind {
    /// Any other node, drawn by [`sample_random_other`].
    Random,
    /// A non-neighbor, drawn by [`sample_nonadjacent`].
    NonAdjacent,
    /// The anchor's own features over another batch node's neighbors.
    Shuffled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeSpec {
    pub kind: NegativeKind,
    /// Node whose features are encoded.
    pub node: usize,
    /// For shuffled negatives, the node lending its neighbor list.
    pub donor: Option<usize>,
}

/// One training batch. Anchors go through the target encoder; positives and
/// negatives through the context encoder. Negatives are shared by all of an
/// anchor's positive pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub anchors: Vec<usize>,
    /// `positives[i]` lists the context node of each positive pair of anchor
    /// `i` (the anchor itself for the within-node loss).
    pub positives: Vec<Vec<usize>>,
    pub negatives: Vec<Vec<NegativeSpec>>,
}

impl Batch {
    /// Distinct nodes whose features or neighbor lists the batch reads.
    pub fn touched_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .anchors
            .iter()
            .chain(self.positives.iter().flatten())
            .copied()
            .chain(
                self.negatives
                    .iter()
                    .flatten()
                    .flat_map(|n| core::iter::once(n.node).chain(n.donor)),
            )
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// Number of shuffled negatives out of `q` for a given fraction.
pub fn shuffled_count(q: usize, fraction: f64) -> usize {
    (libm::ceil(fraction * q as f64) as usize).min(q)
}

/// Samples `config.batch_size` anchors uniformly with replacement and their
/// positive and negative specs for the single-loss `kind`.
pub fn build_batch(
    graph: &Graph,
    kind: LossKind,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<Batch> {
    let n = graph.n_nodes();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot build a batch on an empty graph".into(),
        ));
    }
    let size = config.batch_size;
    let mut anchors = Vec::with_capacity(size);
    match kind {
        LossKind::Within => anchors.extend((0..size).map(|_| rng.below(n))),
        LossKind::Neighbor => {
            if graph.n_edges() == 0 {
                return Err(Error::InvalidArgument(
                    "neighbor loss needs at least one edge".into(),
                ));
            }
            let mut skipped = 0usize;
            while anchors.len() < size {
                let u = rng.below(n);
                if graph.neighbors(u).is_empty() {
                    skipped += 1;
                    continue;
                }
                anchors.push(u);
            }
            if skipped > 0 {
                log::warn!("resampled {skipped} isolated anchor(s)");
            }
        }
        LossKind::ConcatBoth => {
            return Err(Error::InvalidArgument(
                "concatenated models build one batch per component loss".into(),
            ))
        }
    }

    let positives: Vec<Vec<usize>> = anchors
        .iter()
        .map(|&u| match kind {
            LossKind::Neighbor => {
                let list = graph.neighbors(u);
                (0..config.positives)
                    .map(|_| list[rng.below(list.len())])
                    .collect()
            }
            _ => alloc::vec![u; config.positives],
        })
        .collect();

    let q = config.negatives;
    let mut negatives: Vec<Vec<NegativeSpec>> = alloc::vec![Vec::with_capacity(q); size];
    match kind {
        LossKind::Neighbor => {
            for (i, &u) in anchors.iter().enumerate() {
                for _ in 0..q {
                    let node = sample_nonadjacent(graph, u, rng)?;
                    negatives[i].push(NegativeSpec {
                        kind: NegativeKind::NonAdjacent,
                        node,
                        donor: None,
                    });
                }
            }
        }
        _ => {
            let n_shuffled = if size > 1 {
                shuffled_count(q, config.shuffle_fraction)
            } else {
                0
            };
            if n_shuffled < shuffled_count(q, config.shuffle_fraction) {
                log::warn!("batch of one cannot be shuffled; using random negatives only");
            }
            for _ in 0..n_shuffled {
                let perm = shuffle_batch_adjacency(&anchors, rng)?;
                for (i, &u) in anchors.iter().enumerate() {
                    negatives[i].push(NegativeSpec {
                        kind: NegativeKind::Shuffled,
                        node: u,
                        donor: Some(anchors[perm[i]]),
                    });
                }
            }
            for (i, &u) in anchors.iter().enumerate() {
                for _ in n_shuffled..q {
                    let node = sample_random_other(n, u, rng)?;
                    negatives[i].push(NegativeSpec {
                        kind: NegativeKind::Random,
                        node,
                        donor: None,
                    });
                }
            }
        }
    }
    Ok(Batch {
        anchors,
        positives,
        negatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_house_cycle;

    /// Pearson chi-square statistic of `counts` against a uniform law.
    fn chi_square(counts: &[usize]) -> f64 {
        let total: usize = counts.iter().sum();
        let expected = total as f64 / counts.len() as f64;
        counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    }

    // Upper 0.001 quantiles of the chi-square law, from standard tables.
    const CHI2_999_DF5: f64 = 20.515;
    const CHI2_999_DF8: f64 = 26.124;

    #[test]
    fn nonadjacent_unique_candidate() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2)]).unwrap().0;
        let mut rng = Rng::new(0);
        for _ in 0..200 {
            assert_eq!(sample_nonadjacent(&g, 1, &mut rng), Ok(3));
        }
    }

    #[test]
    fn nonadjacent_complete_graph_errors() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap().0;
        assert_eq!(
            sample_nonadjacent(&g, 0, &mut Rng::new(0)),
            Err(Error::NoValidNegative { node: 0 })
        );
    }

    #[test]
    fn nonadjacent_uniform_chi_square() {
        // node 4 is adjacent to 1, 3, 7; candidates are the other six nodes
        let g = Graph::from_edges(10, [(4, 1), (4, 3), (4, 7), (0, 9)])
            .unwrap()
            .0;
        let mut rng = Rng::new(17);
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            counts[sample_nonadjacent(&g, 4, &mut rng).unwrap()] += 1;
        }
        for bad in [1, 3, 4, 7] {
            assert_eq!(counts[bad], 0);
        }
        let valid: Vec<usize> = [0, 2, 5, 6, 8, 9].iter().map(|&i| counts[i]).collect();
        assert!(chi_square(&valid) < CHI2_999_DF5, "{valid:?}");
    }

    #[test]
    fn random_other_two_nodes() {
        let mut rng = Rng::new(1);
        for _ in 0..100 {
            assert_eq!(sample_random_other(2, 0, &mut rng), Ok(1));
        }
    }

    #[test]
    fn random_other_never_self_and_uniform() {
        let mut rng = Rng::new(2);
        let mut counts = [0usize; 10];
        for _ in 0..100_000 {
            counts[sample_random_other(10, 6, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[6], 0);
        let mut rng = Rng::new(3);
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            counts[sample_random_other(10, 6, &mut rng).unwrap()] += 1;
        }
        let others: Vec<usize> = (0..10).filter(|&i| i != 6).map(|i| counts[i]).collect();
        assert!(chi_square(&others) < CHI2_999_DF8, "{others:?}");
    }

    #[test]
    fn random_other_single_node_errors() {
        assert_eq!(
            sample_random_other(1, 0, &mut Rng::new(0)),
            Err(Error::NoValidNegative { node: 0 })
        );
    }

    #[test]
    fn two_node_batch_swaps() {
        assert_eq!(
            shuffle_batch_adjacency(&[5, 9], &mut Rng::new(0)),
            Ok(alloc::vec![1, 0])
        );
    }

    #[test]
    fn singleton_batch_cannot_derange() {
        assert_eq!(
            shuffle_batch_adjacency(&[3], &mut Rng::new(0)),
            Err(Error::CannotDerange { len: 1 })
        );
    }

    #[test]
    fn shuffle_handles_repeated_nodes() {
        let batch = [1, 1, 1, 2, 2, 3, 4, 4];
        let mut rng = Rng::new(8);
        for _ in 0..200 {
            let perm = shuffle_batch_adjacency(&batch, &mut rng).unwrap();
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..8).collect::<Vec<_>>());
            assert!((0..8).all(|i| batch[perm[i]] != batch[i]));
        }
    }

    #[test]
    fn within_batch_composition() {
        let g = make_house_cycle(6, 2).unwrap().graph;
        let cfg = TrainConfig::default();
        let b = build_batch(&g, LossKind::Within, &cfg, &mut Rng::new(4)).unwrap();
        assert_eq!(b.anchors.len(), 256);
        assert!(b.positives.iter().all(|p| p.len() == 5));
        for (i, negs) in b.negatives.iter().enumerate() {
            assert_eq!(negs.len(), 20);
            let shuffled = negs
                .iter()
                .filter(|n| n.kind == NegativeKind::Shuffled)
                .count();
            assert_eq!(shuffled, 10);
            for n in negs {
                match n.kind {
                    NegativeKind::Shuffled => {
                        assert_eq!(n.node, b.anchors[i]);
                        assert_ne!(n.donor, Some(b.anchors[i]));
                    }
                    _ => assert_ne!(n.node, b.anchors[i]),
                }
            }
        }
    }

    #[test]
    fn neighbor_batch_resamples_isolated_anchors() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4)])
            .unwrap()
            .0;
        let cfg = TrainConfig {
            batch_size: 64,
            ..TrainConfig::default()
        };
        let b = build_batch(&g, LossKind::Neighbor, &cfg, &mut Rng::new(5)).unwrap();
        assert!(b.anchors.iter().all(|&u| u != 5));
        for (i, &u) in b.anchors.iter().enumerate() {
            assert!(b.positives[i].iter().all(|&v| g.has_edge(u, v)));
            assert!(b.negatives[i]
                .iter()
                .all(|n| n.kind == NegativeKind::NonAdjacent
                    && n.node != u
                    && !g.has_edge(u, n.node)));
        }
    }

    #[test]
    fn shuffled_count_rounds_up() {
        assert_eq!(shuffled_count(20, 0.5), 10);
        assert_eq!(shuffled_count(5, 0.5), 3);
        assert_eq!(shuffled_count(5, 0.0), 0);
        assert_eq!(shuffled_count(5, 1.0), 5);
    }
}
