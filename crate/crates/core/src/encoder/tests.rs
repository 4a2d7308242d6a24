use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::graph::{degree_features, make_divergence_pair, neighbor_degree_features};
use crate::rng::Rng;

fn small_params(input: usize, seed: u64) -> EncoderParams {
    EncoderParams::xavier(
        EncoderDims::new(input, 6, 4).unwrap(),
        0.5,
        &mut Rng::new(seed),
    )
    .unwrap()
}

fn wide() -> Fanouts {
    Fanouts::new(50, 50).unwrap()
}

#[test]
fn mean_with_self_examples() {
    let m = mean_with_self(&[2.0, 0.0], &[&[0.0, 2.0], &[4.0, 4.0]]).unwrap();
    assert_eq!(m, [2.0, 2.0]);
    assert_eq!(mean_with_self(&[1.5, -3.0], &[]).unwrap(), [1.5, -3.0]);
    let c = [0.25, 7.0];
    assert_eq!(mean_with_self(&c, &[&c, &c, &c]).unwrap(), c);
    assert!(mean_with_self(&[1.0], &[&[1.0, 2.0]]).is_err());
}

#[test]
fn receptive_field_sizes() {
    assert_eq!(Fanouts::node_task().receptive_field_size(), 261);
    assert_eq!(Fanouts::small_graph().receptive_field_size(), 21);
    assert_eq!(Fanouts::new(1, 1).unwrap().receptive_field_size(), 3);
    assert!(Fanouts::new(0, 3).is_err());
}

fn identity_layer(n: usize) -> Layer {
    Layer {
        weight: Tensor::identity(n),
        norm: BatchNorm::new(n),
    }
}

#[test]
fn layer_identity_composition() {
    let x = Tensor::from_vec(1, 2, vec![2.0, 2.0]).unwrap();
    let y = apply_layer(&x, &identity_layer(2), 0.0, Mode::Infer, &mut Rng::new(0)).unwrap();
    for v in y.data() {
        assert!((v - libm::tanh(2.0)).abs() < 1e-5, "{v}");
    }
}

#[test]
fn layer_full_dropout_is_zero() {
    let x = Tensor::from_vec(3, 2, vec![1.0, -2.0, 0.5, 3.0, -1.0, 0.0]).unwrap();
    let y = apply_layer(&x, &identity_layer(2), 1.0, Mode::Train, &mut Rng::new(0)).unwrap();
    assert!(y.data().iter().all(|&v| v == 0.0));
}

#[test]
fn layer_outputs_bounded_before_dropout() {
    let mut rng = Rng::new(5);
    let layer = Layer::xavier(3, 5, &mut rng);
    let x = Tensor::from_vec(4, 3, (0..12).map(|i| (i as f64 - 6.0) * 10.0).collect()).unwrap();
    for mode in [Mode::Infer, Mode::Train] {
        let y = apply_layer(&x, &layer, 0.0, mode, &mut rng).unwrap();
        assert!(y
            .data()
            .iter()
            .all(|v| v.abs() < 1.0 || (v.abs() - 1.0).abs() < 1e-12));
    }
}

#[test]
fn single_isolated_node_is_deterministic() {
    let g = Graph::empty(1);
    let f = FeatureMatrix::dense(2, vec![0.3, -1.2]).unwrap();
    let p = small_params(2, 1);
    let a = embed_all(&g, &f, &p, Fanouts::small_graph(), &mut Rng::new(1)).unwrap();
    let b = embed_all(&g, &f, &p, Fanouts::small_graph(), &mut Rng::new(99)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.shape(), (1, 10));
    assert!(a.is_finite());
}

#[test]
fn structurally_identical_nodes_embed_identically() {
    // two stars with identical leaves; centers 0 and 4
    let g = Graph::from_edges(8, [(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)])
        .unwrap()
        .0;
    let f = degree_features(&g);
    let p = small_params(1, 2);
    let z = embed_all(&g, &f, &p, wide(), &mut Rng::new(0)).unwrap();
    assert_eq!(z.row(0), z.row(4));
    assert_eq!(z.row(1), z.row(7));
}

#[test]
fn embedding_is_concat_of_depths() {
    let labeled = crate::graph::make_barbell(4, 2).unwrap();
    let g = &labeled.graph;
    let f = neighbor_degree_features(g, 5, &mut Rng::new(0)).unwrap();
    let p = small_params(5, 3);
    let z = embed_all(g, &f, &p, wide(), &mut Rng::new(0)).unwrap();
    assert_eq!(z.cols(), p.dims.embedding());
    // depth-1 slice depends only on the depth-1 blocks: perturbing a
    // depth-2 weight leaves it unchanged
    let mut q = p.clone();
    q.layers[OUT2].weight.data_mut()[0] += 1.0;
    let z2 = embed_all(g, &f, &q, wide(), &mut Rng::new(0)).unwrap();
    assert_eq!(z.slice_cols(0, 6), z2.slice_cols(0, 6));
    assert_ne!(z.slice_cols(6, 10), z2.slice_cols(6, 10));
}

#[test]
fn isolating_a_node_gives_zero_neighbor_embedding() {
    let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap().0;
    let cut = Graph::from_edges(3, [(1, 2)]).unwrap().0;
    let f = FeatureMatrix::dense(1, vec![1.0, 2.0, 1.0]).unwrap();
    let p = small_params(1, 4);
    let z = embed_all(&cut, &f, &p, wide(), &mut Rng::new(0)).unwrap();
    let alone = embed_all(
        &Graph::empty(1),
        &FeatureMatrix::dense(1, vec![1.0]).unwrap(),
        &p,
        wide(),
        &mut Rng::new(0),
    )
    .unwrap();
    assert_eq!(z.row(0), alone.row(0));
    let before = embed_all(&g, &f, &p, wide(), &mut Rng::new(0)).unwrap();
    assert_ne!(before.row(0), z.row(0));
}

#[test]
fn out_of_range_node_rejected() {
    let g = Graph::empty(2);
    let f = FeatureMatrix::dense(1, vec![1.0, 1.0]).unwrap();
    let p = small_params(1, 0);
    let err = encode(
        &g,
        &f,
        &[2],
        &p,
        wide(),
        Mode::Infer,
        &mut Rng::new(0),
        None,
    );
    assert_eq!(
        err,
        Err(Error::InvalidNode {
            node: 2,
            n_nodes: 2
        })
    );
}

#[test]
fn feature_width_checked() {
    let g = Graph::empty(2);
    let f = FeatureMatrix::dense(3, vec![0.0; 6]).unwrap();
    assert!(matches!(
        embed_all(&g, &f, &small_params(2, 0), wide(), &mut Rng::new(0)),
        Err(Error::ShapeMismatch(_))
    ));
}

#[test]
fn divergence_pair_depth1_agrees_but_neighbors_differ() {
    let pair = make_divergence_pair();
    let f = degree_features(&pair.graph);
    let p = small_params(1, 8);
    let z = embed_all(&pair.graph, &f, &p, wide(), &mut Rng::new(0)).unwrap();
    let h1 = z.slice_cols(0, p.dims.depth1);
    assert_eq!(h1.row(pair.u), h1.row(pair.v));
    assert_ne!(h1.row(pair.u_neighbor), h1.row(pair.v_neighbor));
}

#[test]
fn override_with_twin_neighbors_matches_twin() {
    // 0 and 3 share features; 0's override is 3's neighbor list
    let g = Graph::from_edges(7, [(0, 1), (3, 4), (3, 5), (4, 6)])
        .unwrap()
        .0;
    let f = FeatureMatrix::dense(1, vec![2.0, 1.0, 0.5, 2.0, 3.0, 1.0, 4.0]).unwrap();
    let p = small_params(1, 9);
    let mut map = BTreeMap::new();
    map.insert(0, g.neighbors(3).to_vec());
    let z = encode(
        &g,
        &f,
        &[0, 3],
        &p,
        wide(),
        Mode::Infer,
        &mut Rng::new(0),
        Some(&map),
    )
    .unwrap();
    assert_eq!(z.row(0), z.row(1));
    let own = encode(
        &g,
        &f,
        &[0],
        &p,
        wide(),
        Mode::Infer,
        &mut Rng::new(0),
        None,
    )
    .unwrap();
    assert_ne!(own.row(0), z.row(0));
}

#[test]
fn train_mode_is_seeded() {
    let labeled = crate::graph::make_house_cycle(6, 2).unwrap();
    let g = &labeled.graph;
    let f = degree_features(g);
    let p = small_params(1, 10);
    let nodes: Vec<usize> = (0..g.n_nodes()).collect();
    let run = |seed| {
        encode(
            g,
            &f,
            &nodes,
            &p,
            Fanouts::new(1, 1).unwrap(),
            Mode::Train,
            &mut Rng::new(seed),
            None,
        )
        .unwrap()
    };
    assert_eq!(run(4), run(4));
    assert_ne!(run(4), run(5));
}

#[test]
fn named_tensors_round_trip() {
    let p = small_params(3, 12);
    let named = p.named_tensors();
    assert_eq!(named.len(), 20);
    assert_eq!(
        EncoderParams::from_named(p.dims, p.dropout, &named).unwrap(),
        p
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Relabeling nodes permutes the embedding rows and nothing else when
    /// the fanouts cover every degree.
    #[test]
    fn relabeling_permutes_embeddings(
        edges in proptest::collection::vec((0usize..9, 0usize..9), 0..20),
        perm in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle(),
        seed in 0u64..1000,
    ) {
        let g = Graph::from_edges(9, edges.iter().copied()).unwrap().0;
        let h = Graph::from_edges(9, edges.iter().map(|&(a, b)| (perm[a], perm[b]))).unwrap().0;
        let fg = degree_features(&g);
        let fh = degree_features(&h);
        let p = small_params(1, seed);
        let zg = embed_all(&g, &fg, &p, wide(), &mut Rng::new(1)).unwrap();
        let zh = embed_all(&h, &fh, &p, wide(), &mut Rng::new(2)).unwrap();
        for u in 0..9 {
            let diff: f64 = zg.row(u).iter().zip(zh.row(perm[u])).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-12, "node {} diff {}", u, diff);
        }
    }
}
