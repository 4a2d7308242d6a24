use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::Tensor;

fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Mean silhouette of `points` under `labels`, with Euclidean distance.
/// Points in singleton clusters score 0, as does a point whose intra- and
/// nearest-cluster distances are both zero.
pub fn silhouette(points: &Tensor, labels: &[usize]) -> Result<f64> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::ShapeMismatch("one label per point required".into()));
    }
    let n_labels = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sizes = alloc::vec![0usize; n_labels];
    labels.iter().for_each(|&c| sizes[c] += 1);
    let clusters: Vec<usize> = (0..n_labels).filter(|&c| sizes[c] > 0).collect();
    if clusters.len() < 2 {
        return Err(Error::UndefinedSilhouette);
    }

    let mut total = 0.0;
    let mut sums = alloc::vec![0.0; n_labels];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += distance(points.row(i), points.row(j));
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = clusters
            .iter()
            .filter(|&&c| c != own)
            .map(|&c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapsed_clusters_score_one() {
        let p = Tensor::from_rows(&[
            alloc::vec![0.0, 0.0],
            alloc::vec![0.0, 0.0],
            alloc::vec![10.0, 0.0],
            alloc::vec![10.0, 0.0],
        ])
        .unwrap();
        assert_eq!(silhouette(&p, &[0, 0, 1, 1]), Ok(1.0));
    }

    #[test]
    fn single_cluster_is_undefined() {
        let p = Tensor::zeros(3, 2);
        assert_eq!(silhouette(&p, &[2, 2, 2]), Err(Error::UndefinedSilhouette));
    }

    #[test]
    fn singletons_score_zero() {
        let p = Tensor::from_rows(&[alloc::vec![0.0], alloc::vec![1.0], alloc::vec![1.5]]).unwrap();
        // point 0 is alone; points 1 and 2: a = 0.5, b = 1.0 and 1.5
        let want = ((1.0 - 0.5) / 1.0 + (1.5 - 0.5) / 1.5) / 3.0;
        assert!((silhouette(&p, &[0, 1, 1]).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn identical_points_everywhere_score_zero() {
        let p = Tensor::zeros(4, 2);
        assert_eq!(silhouette(&p, &[0, 0, 1, 1]), Ok(0.0));
    }
}
