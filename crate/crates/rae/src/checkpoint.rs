//! Versioned text checkpoints.
//!
//! ```text
//! rae-checkpoint 1
//! input_dim = 37
//! loss = within
//! ...                                (every training key)
//! tensors = 60
//! tensor 0.target.agg1.weight 192 37
//! <one line of space-separated values per row>
//! ...
//! ```
//!
//! Tensor names are `<component>.<target|context>.<layer>.<field>`.
//! Values are printed in shortest round-trip form, so a save/load cycle
//! reproduces every parameter bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use rae_core::numeric::Tensor;
use rae_core::{DualEncoder, EncoderParams, Model, TrainConfig};

use crate::config::{train_config_text, Config};
use crate::error::{Error, Result};

pub const MAGIC: &str = "rae-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub model: Model,
}

impl Checkpoint {
    pub fn input_dim(&self) -> usize {
        self.model.components[0].target.dims.input
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MAGIC} {VERSION}\ninput_dim = {}\n", self.input_dim());
        s.push_str(&train_config_text(&self.config));
        let mut named = Vec::new();
        for (c, dual) in self.model.components.iter().enumerate() {
            for (side, p) in [("target", &dual.target), ("context", &dual.context)] {
                for (name, t) in p.named_tensors() {
                    named.push((format!("{c}.{side}.{name}"), t));
                }
            }
        }
        let _ = writeln!(s, "tensors = {}", named.len());
        for (name, t) in &named {
            let _ = writeln!(s, "tensor {name} {} {}", t.rows(), t.cols());
            for r in 0..t.rows() {
                let row: Vec<String> = t.row(r).iter().map(|v| format!("{v:e}")).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty checkpoint"))?;
        if header.trim() != format!("{MAGIC} {VERSION}") {
            return Err(Error::parse(
                path,
                1,
                format!("expected header {MAGIC:?} version {VERSION}, got {header:?}"),
            ));
        }
        let mut input_dim = None;
        let mut config_text = String::new();
        let mut n_tensors = None;
        for (line_no, line) in lines.by_ref() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, line_no, "expected key = value"))?;
            let count = || {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(path, line_no, format!("bad count {v:?}")))
            };
            match k.trim() {
                "input_dim" => input_dim = Some(count()?),
                "tensors" => {
                    n_tensors = Some(count()?);
                    break;
                }
                _ => {
                    config_text.push_str(line);
                    config_text.push('\n');
                }
            }
        }
        let input_dim = input_dim.ok_or_else(|| Error::data(path, "missing input_dim"))?;
        let n_tensors = n_tensors.ok_or_else(|| Error::data(path, "missing tensor count"))?;
        let config = Config::parse(&config_text, path, Path::new("."))?.train;

        let mut tensors: Vec<(String, Tensor)> = Vec::with_capacity(n_tensors);
        for _ in 0..n_tensors {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| Error::data(path, "truncated before all tensors"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "tensor" {
                return Err(Error::parse(
                    path,
                    line_no,
                    "expected: tensor <name> <rows> <cols>",
                ));
            }
            let dim = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(path, line_no, format!("bad dimension {s:?}")))
            };
            let (rows, cols) = (dim(f[2])?, dim(f[3])?);
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (row_no, row) = lines.next().ok_or_else(|| {
                    Error::data(path, format!("truncated inside tensor {}", f[1]))
                })?;
                let before = data.len();
                for v in row.split_whitespace() {
                    data.push(
                        v.parse::<f64>()
                            .map_err(|_| Error::parse(path, row_no, format!("bad value {v:?}")))?,
                    );
                }
                if data.len() - before != cols {
                    return Err(Error::parse(
                        path,
                        row_no,
                        format!("expected {cols} values"),
                    ));
                }
            }
            tensors.push((f[1].to_string(), Tensor::from_vec(rows, cols, data)?));
        }

        let dims = config.dims(input_dim)?;
        let side = |c: usize, name: &str| -> Result<EncoderParams> {
            let prefix = format!("{c}.{name}.");
            let own: Vec<(String, Tensor)> = tensors
                .iter()
                .filter_map(|(k, t)| k.strip_prefix(&prefix).map(|k| (k.to_string(), t.clone())))
                .collect();
            EncoderParams::from_named(dims, config.dropout, &own)
                .map_err(|e| Error::data(path, e.to_string()))
        };
        let components = (0..config.loss.components().len())
            .map(|c| {
                Ok(DualEncoder {
                    target: side(c, "target")?,
                    context: side(c, "context")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model: Model {
                kind: config.loss,
                fanouts: config.fanouts,
                components,
            },
            config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}
