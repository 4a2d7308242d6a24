//! Self-checks runnable on any build: gradients against finite
//! differences, samplers against their distributions, and the metrics
//! against brute-force oracles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::encoder::{embed_all, mean_with_self, EncoderDims, EncoderParams, Fanouts};
use crate::error::Result;
use crate::eval::{fit_binary, silhouette};
use crate::gradcheck::{loss_gradient_error, random_connected_graph};
use crate::graph::{
    degree_features, make_divergence_pair, make_house_cycle, neighbor_degree_features,
};
use crate::numeric::{sigmoid, Tensor};
use crate::rng::Rng;
use crate::sampling::{sample_nonadjacent, sample_random_other, shuffle_batch_adjacency};
use crate::train::{train, LossKind, Model, TrainConfig};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self {
                name,
                passed,
                detail,
            },
            Err(e) => Self {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        }
    }
}

/// Bound on the end-to-end gradient error.
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
/// Draws per sampler distribution test.
pub const SAMPLER_DRAWS: usize = 10_000;

// Upper 0.001 quantiles of the chi-square law, from standard tables.
const CHI2_999: [(usize, f64); 3] = [(5, 20.515), (8, 26.124), (11, 31.264)];

fn chi2_critical(df: usize) -> f64 {
    CHI2_999
        .iter()
        .find(|(d, _)| *d == df)
        .map(|(_, c)| *c)
        .expect("tabulated degrees of freedom")
}

/// Pearson chi-square statistic of `counts` against a uniform law.
pub fn chi_square_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected) * (c as f64 - expected) / expected)
        .sum()
}

/// Every check, in a fixed order.
pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();
    for (name, kind, seed) in [
        ("gradient_within", LossKind::Within, 40),
        ("gradient_neighbor", LossKind::Neighbor, 41),
    ] {
        out.push(Check::from_result(
            name,
            loss_gradient_error(kind, seed).map(|e| {
                (
                    e < GRADIENT_TOLERANCE,
                    format!("max relative error {e:.2e} (bound {GRADIENT_TOLERANCE:.0e})"),
                )
            }),
        ));
    }
    out.push(Check::from_result("receptive_field", receptive_field()));
    out.push(Check::from_result("divergence_pair", divergence_pair()));
    out.push(Check::from_result("mean_with_self_oracle", mean_oracle()));
    out.push(Check::from_result("silhouette_oracle", silhouette_oracle()));
    out.push(Check::from_result(
        "probe_stationarity",
        probe_stationarity(),
    ));
    out.push(Check::from_result("shuffle_derangement", derangement()));
    out.push(Check::from_result(
        "nonadjacent_chi_square",
        nonadjacent_chi_square(),
    ));
    out.push(Check::from_result(
        "random_other_chi_square",
        random_other_chi_square(),
    ));
    out.push(Check::from_result(
        "neighbor_sample_chi_square",
        neighbor_sample_chi_square(),
    ));
    out.push(Check::from_result("determinism", determinism()));
    out
}

fn receptive_field() -> Result<(bool, String)> {
    let a = Fanouts::node_task().receptive_field_size();
    let b = Fanouts::small_graph().receptive_field_size();
    Ok((a == 261 && b == 21, format!("(10,25) -> {a}, (4,4) -> {b}")))
}

/// Infer-mode depth-1 encodings of the two centers agree, those of their
/// neighbors do not.
fn divergence_pair() -> Result<(bool, String)> {
    let pair = make_divergence_pair();
    let f = degree_features(&pair.graph);
    let p = EncoderParams::xavier(EncoderDims::new(1, 6, 4)?, 0.5, &mut Rng::new(8))?;
    let z = embed_all(&pair.graph, &f, &p, Fanouts::new(50, 50)?, &mut Rng::new(0))?;
    let h1 = z.slice_cols(0, p.dims.depth1);
    let centers = h1.row(pair.u) == h1.row(pair.v);
    let neighbors = h1.row(pair.u_neighbor) != h1.row(pair.v_neighbor);
    Ok((
        centers && neighbors,
        format!("centers equal: {centers}, neighbors differ: {neighbors}"),
    ))
}

fn mean_oracle() -> Result<(bool, String)> {
    let mut rng = Rng::new(3);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let dim = 1 + trial % 7;
        let k = trial % 6;
        let mut row = || (0..dim).map(|_| rng.uniform(-5.0, 5.0)).collect::<Vec<_>>();
        let u = row();
        let nbrs: Vec<Vec<f64>> = (0..k).map(|_| row()).collect();
        let refs: Vec<&[f64]> = nbrs.iter().map(|v| v.as_slice()).collect();
        let got = mean_with_self(&u, &refs)?;
        for c in 0..dim {
            let want = (u[c] + nbrs.iter().map(|v| v[c]).sum::<f64>()) / (k + 1) as f64;
            worst = worst.max(libm::fabs(got[c] - want));
        }
    }
    Ok((worst < 1e-12, format!("max abs error {worst:.1e}")))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Textbook silhouette, one point at a time.
fn silhouette_brute(points: &Tensor, labels: &[usize]) -> f64 {
    let n = points.rows();
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = alloc::vec![0.0; k];
        let mut counts = alloc::vec![0usize; k];
        for j in 0..n {
            if j != i {
                sums[labels[j]] += dist(points.row(i), points.row(j));
                counts[labels[j]] += 1;
            }
        }
        if counts[labels[i]] == 0 {
            continue;
        }
        let a = sums[labels[i]] / counts[labels[i]] as f64;
        let b = (0..k)
            .filter(|&c| c != labels[i] && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

fn silhouette_oracle() -> Result<(bool, String)> {
    let mut rng = Rng::new(5);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = 3 + trial % 20;
        let k = 2 + trial % 4;
        let labels: Vec<usize> = (0..n)
            .map(|i| if i < k { i } else { rng.below(k) })
            .collect();
        let data = (0..n * 3).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let pts = Tensor::from_vec(n, 3, data)?;
        worst = worst.max(libm::fabs(
            silhouette(&pts, &labels)? - silhouette_brute(&pts, &labels),
        ));
    }
    let fixed = Tensor::from_vec(4, 1, alloc::vec![0.0, 1.0, 10.0, 11.0])?;
    let known = silhouette(&fixed, &[0, 0, 1, 1])?;
    let want = (9.5 / 10.5 + 8.5 / 9.5) / 2.0;
    worst = worst.max(libm::fabs(known - want));
    Ok((worst < 1e-10, format!("max abs error {worst:.1e}")))
}

/// The fitted probe zeroes the gradient of its objective.
fn probe_stationarity() -> Result<(bool, String)> {
    let mut rng = Rng::new(9);
    let (n, d, reg) = (80, 4, 1.0);
    let x = Tensor::from_vec(n, d, (0..n * d).map(|_| rng.uniform(-2.0, 2.0)).collect())?;
    let y: Vec<bool> = (0..n)
        .map(|i| x.row(i)[0] - 0.5 * x.row(i)[1] + rng.uniform(-1.0, 1.0) > 0.0)
        .collect();
    let m = fit_binary(&x, &y, reg)?;
    let mut grad_w = m.weights.iter().map(|w| reg * w).collect::<Vec<_>>();
    let mut grad_b = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let r = sigmoid(m.decision(x.row(i))) - if yi { 1.0 } else { 0.0 };
        for (g, v) in grad_w.iter_mut().zip(x.row(i)) {
            *g += r * v;
        }
        grad_b += r;
    }
    let norm = libm::sqrt(grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b);
    Ok((norm < 1e-5, format!("gradient norm {norm:.1e}")))
}

fn derangement() -> Result<(bool, String)> {
    let mut rng = Rng::new(11);
    let mut batches = 0;
    for trial in 0..2000 {
        let len = 2 + trial % 300;
        let n_nodes = 2 + trial % 50;
        let nodes: Vec<usize> = (0..len).map(|_| rng.below(n_nodes)).collect();
        let mut counts = alloc::vec![0usize; n_nodes];
        nodes.iter().for_each(|&u| counts[u] += 1);
        if counts.iter().any(|&c| 2 * c > len) {
            continue;
        }
        let perm = shuffle_batch_adjacency(&nodes, &mut rng)?;
        let mut seen = alloc::vec![false; len];
        for (i, &p) in perm.iter().enumerate() {
            if p >= len || seen[p] || nodes[p] == nodes[i] {
                return Ok((false, format!("bad map for batch {trial}")));
            }
            seen[p] = true;
        }
        batches += 1;
    }
    Ok((true, format!("{batches} batches deranged")))
}

fn chi_result(counts: &[usize]) -> (bool, String) {
    let df = counts.len() - 1;
    let stat = chi_square_uniform(counts);
    let crit = chi2_critical(df);
    (
        stat < crit,
        format!("chi2 {stat:.2} < {crit} (df {df}, p = 0.001)"),
    )
}

fn nonadjacent_chi_square() -> Result<(bool, String)> {
    // node 0 is adjacent to 1, 2, 3 and to nothing else among 0..10
    let g =
        crate::graph::Graph::from_edges(10, [(0, 1), (0, 2), (0, 3), (4, 5), (6, 7), (8, 9)])?.0;
    let mut rng = Rng::new(12);
    let mut counts = alloc::vec![0usize; 10];
    for _ in 0..SAMPLER_DRAWS {
        counts[sample_nonadjacent(&g, 0, &mut rng)?] += 1;
    }
    if counts[..4].iter().any(|&c| c > 0) {
        return Ok((false, "drew self or a neighbor".into()));
    }
    Ok(chi_result(&counts[4..]))
}

fn random_other_chi_square() -> Result<(bool, String)> {
    let mut rng = Rng::new(13);
    let mut counts = alloc::vec![0usize; 10];
    for _ in 0..SAMPLER_DRAWS {
        counts[sample_random_other(10, 4, &mut rng)?] += 1;
    }
    if counts[4] > 0 {
        return Ok((false, "drew the anchor".into()));
    }
    counts.remove(4);
    Ok(chi_result(&counts))
}

/// Inclusion counts of sampling 4 of 12 neighbors without replacement.
fn neighbor_sample_chi_square() -> Result<(bool, String)> {
    let mut rng = Rng::new(14);
    let mut counts = alloc::vec![0usize; 12];
    for _ in 0..SAMPLER_DRAWS {
        for i in rng.sample_distinct(12, 4) {
            counts[i] += 1;
        }
    }
    Ok(chi_result(&counts))
}

/// Same config and seed, same loss trace and embeddings, bit for bit.
fn determinism() -> Result<(bool, String)> {
    let lg = make_house_cycle(15, 5)?;
    let config = TrainConfig {
        fanouts: Fanouts::new(2, 4)?,
        depth1: 8,
        depth2: 8,
        batch_size: 16,
        epochs: 3,
        seed: 21,
        ..TrainConfig::default()
    };
    let run = || -> Result<(Vec<Vec<f64>>, Tensor)> {
        let feats = neighbor_degree_features(&lg.graph, 30, &mut Rng::new(1))?;
        let out = train(&lg.graph, &feats, &config)?;
        let z = out.model.embed(&lg.graph, &feats, &mut Rng::new(2))?;
        Ok((out.losses, z))
    };
    let (a, b) = (run()?, run()?);
    let g = random_connected_graph(12, 0.2, &mut Rng::new(3))?;
    let f = degree_features(&g);
    let m1 = Model::xavier(&config, 1, &mut Rng::new(4))?;
    let m2 = Model::xavier(&config, 1, &mut Rng::new(4))?;
    let same_init =
        m1 == m2 && m1.embed(&g, &f, &mut Rng::new(5))? == m2.embed(&g, &f, &mut Rng::new(5))?;
    let same = a == b && same_init;
    Ok((same, format!("identical traces and embeddings: {same}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for c in run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn brute_silhouette_singletons_score_zero() {
        let pts = Tensor::from_vec(3, 1, alloc::vec![0.0, 1.0, 5.0]).unwrap();
        let s = silhouette_brute(&pts, &[0, 0, 1]);
        assert!((s - (4.0 / 5.0 + 3.0 / 4.0) / 3.0).abs() < 1e-12);
    }
}
