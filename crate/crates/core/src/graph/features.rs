use alloc::vec::Vec;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Per-node feature rows, stored densely or as sorted `(column, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMatrix {
    Dense {
        n_cols: usize,
        /// Row-major, `n_rows * n_cols` values.
        data: Vec<f64>,
    },
    Sparse {
        n_cols: usize,
        rows: Vec<Vec<(usize, f64)>>,
    },
}

impl FeatureMatrix {
    pub fn dense(n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_cols == 0 || !data.len().is_multiple_of(n_cols) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values do not fill rows of width {n_cols}",
                data.len()
            )));
        }
        let m = Self::Dense { n_cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Sparse rows; entries are sorted by column and duplicate columns summed.
    pub fn sparse(n_cols: usize, mut rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                if c >= n_cols {
                    return Err(Error::ShapeMismatch(alloc::format!(
                        "column {c} outside width {n_cols}"
                    )));
                }
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            *row = merged;
        }
        let m = Self::Sparse { n_cols, rows };
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        let ok = match self {
            Self::Dense { data, .. } => data.iter().all(|v| v.is_finite()),
            Self::Sparse { rows, .. } => rows.iter().flatten().all(|(_, v)| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NumericFault("non-finite feature value".into()))
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            Self::Dense { n_cols, data } => data.len() / n_cols,
            Self::Sparse { rows, .. } => rows.len(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            Self::Dense { n_cols, .. } | Self::Sparse { n_cols, .. } => *n_cols,
        }
    }

    /// Calls `f(column, value)` for every stored entry of row `i`.
    pub fn for_each_entry(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            Self::Dense { n_cols, data } => {
                for (c, &v) in data[i * n_cols..(i + 1) * n_cols].iter().enumerate() {
                    if v != 0.0 {
                        f(c, v);
                    }
                }
            }
            Self::Sparse { rows, .. } => {
                for &(c, v) in &rows[i] {
                    f(c, v);
                }
            }
        }
    }

    pub fn row_dense(&self, i: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n_cols()];
        self.for_each_entry(i, |c, v| out[c] = v);
        out
    }

    pub fn to_dense(&self) -> Self {
        match self {
            Self::Dense { .. } => self.clone(),
            Self::Sparse { n_cols, rows } => {
                let mut data = alloc::vec![0.0; rows.len() * n_cols];
                for (i, row) in rows.iter().enumerate() {
                    for &(c, v) in row {
                        data[i * n_cols + c] = v;
                    }
                }
                Self::Dense {
                    n_cols: *n_cols,
                    data,
                }
            }
        }
    }

    /// Number of stored entries (dense storage counts nonzeros).
    pub fn nnz(&self) -> usize {
        match self {
            Self::Dense { data, .. } => data.iter().filter(|v| **v != 0.0).count(),
            Self::Sparse { rows, .. } => rows.iter().map(Vec::len).sum(),
        }
    }

    /// Appends a one-hot block of width `n_categories`; `categories[i]` is the
    /// hot column for row `i`. The result is dense.
    pub fn append_one_hot(&self, categories: &[usize], n_categories: usize) -> Result<Self> {
        if categories.len() != self.n_rows() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} categories for {} rows",
                categories.len(),
                self.n_rows()
            )));
        }
        let base = self.n_cols();
        let width = base + n_categories;
        let mut data = Vec::with_capacity(self.n_rows() * width);
        for (i, &cat) in categories.iter().enumerate() {
            if cat >= n_categories {
                return Err(Error::InvalidArgument(alloc::format!(
                    "category {cat} outside 0..{n_categories}"
                )));
            }
            data.extend(self.row_dense(i));
            data.extend((0..n_categories).map(|c| if c == cat { 1.0 } else { 0.0 }));
        }
        Ok(Self::Dense {
            n_cols: width,
            data,
        })
    }

    /// Stacks the rows of `other` under `self`. Column counts must agree.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.n_cols() != other.n_cols() {
            return Err(Error::ShapeMismatch("column counts differ".into()));
        }
        Ok(match (self, other) {
            (Self::Sparse { n_cols, rows }, Self::Sparse { rows: more, .. }) => Self::Sparse {
                n_cols: *n_cols,
                rows: rows.iter().chain(more).cloned().collect(),
            },
            _ => {
                let (Self::Dense { n_cols, data }, Self::Dense { data: more, .. }) =
                    (self.to_dense(), other.to_dense())
                else {
                    unreachable!()
                };
                let mut data = data;
                data.extend(more);
                Self::Dense { n_cols, data }
            }
        })
    }
}

/// Single-column feature: the node's own degree.
pub fn degree_features(graph: &Graph) -> FeatureMatrix {
    FeatureMatrix::Dense {
        n_cols: 1,
        data: (0..graph.n_nodes())
            .map(|u| graph.neighbors(u).len() as f64)
            .collect(),
    }
}

/// Degrees of each node's neighbors, sorted descending and zero-padded to
/// `cap` columns. Nodes with more than `cap` neighbors use a uniform sample
/// of `cap` of them, drawn without replacement.
pub fn neighbor_degree_features(graph: &Graph, cap: usize, rng: &mut Rng) -> Result<FeatureMatrix> {
    if cap == 0 {
        return Err(Error::InvalidArgument(
            "neighbor degree cap must be at least 1".into(),
        ));
    }
    let n = graph.n_nodes();
    let mut data = alloc::vec![0.0; n * cap];
    let mut degrees: Vec<usize> = Vec::with_capacity(cap);
    for u in 0..n {
        let neighbors = graph.neighbors(u);
        degrees.clear();
        if neighbors.len() > cap {
            degrees.extend(
                rng.sample_distinct(neighbors.len(), cap)
                    .into_iter()
                    .map(|i| graph.neighbors(neighbors[i]).len()),
            );
        } else {
            degrees.extend(neighbors.iter().map(|&v| graph.neighbors(v).len()));
        }
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        for (slot, &d) in data[u * cap..].iter_mut().zip(&degrees) {
            *slot = d as f64;
        }
    }
    Ok(FeatureMatrix::Dense { n_cols: cap, data })
}
