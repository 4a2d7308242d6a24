//! Embedding tables as CSV: header `node_id,e0,...,e{d-1}`, one row per
//! node with its original id, values with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use rae_core::numeric::Tensor;

use crate::error::{Error, Result};

pub fn embeddings_csv(z: &Tensor, ids: &[String]) -> Result<String> {
    if ids.len() != z.rows() {
        return Err(Error::Usage(format!(
            "{} ids for {} embedding rows",
            ids.len(),
            z.rows()
        )));
    }
    let mut s = String::from("node_id");
    for c in 0..z.cols() {
        let _ = write!(s, ",e{c}");
    }
    s.push('\n');
    for (r, id) in ids.iter().enumerate() {
        s.push_str(id);
        for v in z.row(r) {
            let _ = write!(s, ",{v:.16e}");
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn export_embeddings(z: &Tensor, ids: &[String], path: &Path) -> Result<()> {
    let text = embeddings_csv(z, ids)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a table written by [`export_embeddings`].
pub fn import_embeddings(path: &Path) -> Result<(Vec<String>, Tensor)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let cols = header.split(',').count() - 1;
    if !header.starts_with("node_id") {
        return Err(Error::parse(path, 1, "header must start with node_id"));
    }
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let mut fields = line.split(',');
        ids.push(fields.next().unwrap_or("").to_string());
        let before = data.len();
        for f in fields {
            data.push(
                f.parse::<f64>()
                    .map_err(|_| Error::parse(path, line_no, format!("bad value {f:?}")))?,
            );
        }
        if data.len() - before != cols {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {cols} values"),
            ));
        }
    }
    let z = Tensor::from_vec(ids.len(), cols, data)?;
    Ok((ids, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_node_set_is_header_only() {
        let s = embeddings_csv(&Tensor::zeros(0, 3), &[]).unwrap();
        assert_eq!(s, "node_id,e0,e1,e2\n");
    }

    proptest! {
        #[test]
        fn round_trip_is_bitwise(
            cols in 1usize..5,
            bits in proptest::collection::vec(any::<u64>(), 0..24),
        ) {
            let rows = bits.len() / cols;
            let data: Vec<f64> = bits[..rows * cols]
                .iter()
                .map(|&b| f64::from_bits(b))
                .map(|v| if v.is_finite() { v } else { 0.5 })
                .collect();
            let z = Tensor::from_vec(rows, cols, data).unwrap();
            let ids: Vec<String> = (0..rows).map(|i| format!("n{i}")).collect();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("z.csv");
            export_embeddings(&z, &ids, &p).unwrap();
            let (ids2, z2) = import_embeddings(&p).unwrap();
            prop_assert_eq!(ids2, ids);
            let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&z2), bits(&z));
        }
    }
}
