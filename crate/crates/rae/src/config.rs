//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; absent
//! keys take the defaults below. Relative data paths resolve against the
//! directory holding the config file.
//!
//! | key | default |
//! |---|---|
//! | `loss` | `within` (`neighbor`, `concat`) |
//! | `fanout1`, `fanout2` | 10, 25 for node tasks; 4, 4 for graph collections |
//! | `depth1_dim`, `depth2_dim` | 192, 64 |
//! | `dropout` | 0.6 |
//! | `learning_rate` | 0.01 |
//! | `batch_size` | 256 |
//! | `epochs` | 200 |
//! | `positives` | 5 |
//! | `negatives` | 20 |
//! | `shuffle_fraction` | 0.5 |
//! | `seed` | 0 |
//! | `runs` | 1 |
//! | `reg_strength` | 1.0 |
//! | `folds` | 10 |
//! | `dataset` | unset; `cora`, `citeseer` or `pubmed` checks table sizes |
//! | `edges`, `features`, `labels`, `split` | node dataset files |
//! | `content`, `cites` | LINQS-format node dataset |
//! | `graphs` | directory of a graph-collection benchmark |

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rae_core::eval::DEFAULT_REG_STRENGTH;
use rae_core::{Fanouts, LossKind, TrainConfig};

use crate::error::{Error, Result};

/// Where a config's data lives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataPaths {
    pub dataset: Option<String>,
    pub edges: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub content: Option<PathBuf>,
    pub cites: Option<PathBuf>,
    pub graphs: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub train: TrainConfig,
    /// Whether `fanout1`/`fanout2` were given; otherwise the task default
    /// applies.
    pub fanouts_set: bool,
    pub runs: usize,
    pub reg_strength: f64,
    pub folds: usize,
    pub data: DataPaths,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            fanouts_set: false,
            runs: 1,
            reg_strength: DEFAULT_REG_STRENGTH,
            folds: 10,
            data: DataPaths::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, path, base)
    }

    /// Parses `text`; `origin` names the source in errors, `base` anchors
    /// relative paths.
    pub fn parse(text: &str, origin: &Path, base: &Path) -> Result<Self> {
        let mut cfg = Config::default();
        let mut fanout1 = None;
        let mut fanout2 = None;
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::parse(origin, line_no, msg);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key {key}")));
            }
            let path = || Some(base.join(value));
            let t = &mut cfg.train;
            match key {
                "loss" => t.loss = LossKind::parse(value).map_err(|e| err(e.to_string()))?,
                "fanout1" => fanout1 = Some(number(value, key, &err)?),
                "fanout2" => fanout2 = Some(number(value, key, &err)?),
                "depth1_dim" => t.depth1 = number(value, key, &err)?,
                "depth2_dim" => t.depth2 = number(value, key, &err)?,
                "dropout" => t.dropout = number(value, key, &err)?,
                "learning_rate" => t.learning_rate = number(value, key, &err)?,
                "batch_size" => t.batch_size = number(value, key, &err)?,
                "epochs" => t.epochs = number(value, key, &err)?,
                "positives" => t.positives = number(value, key, &err)?,
                "negatives" => t.negatives = number(value, key, &err)?,
                "shuffle_fraction" => t.shuffle_fraction = number(value, key, &err)?,
                "seed" => t.seed = number(value, key, &err)?,
                "runs" => cfg.runs = number(value, key, &err)?,
                "reg_strength" => cfg.reg_strength = number(value, key, &err)?,
                "folds" => cfg.folds = number(value, key, &err)?,
                "dataset" => cfg.data.dataset = Some(value.to_ascii_lowercase()),
                "edges" => cfg.data.edges = path(),
                "features" => cfg.data.features = path(),
                "labels" => cfg.data.labels = path(),
                "split" => cfg.data.split = path(),
                "content" => cfg.data.content = path(),
                "cites" => cfg.data.cites = path(),
                "graphs" => cfg.data.graphs = path(),
                _ => return Err(err(format!("unknown key {key}"))),
            }
        }
        match (fanout1, fanout2) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                cfg.train.fanouts =
                    Fanouts::new(a, b).map_err(|e| Error::data(origin, e.to_string()))?;
                cfg.fanouts_set = true;
            }
            _ => {
                return Err(Error::data(
                    origin,
                    "fanout1 and fanout2 must be set together",
                ))
            }
        }
        if !(cfg.reg_strength.is_finite() && cfg.reg_strength > 0.0) {
            return Err(Error::data(origin, "reg_strength must be positive"));
        }
        cfg.train
            .validate()
            .map_err(|e| Error::data(origin, e.to_string()))?;
        Ok(cfg)
    }

    /// Training config for a graph-collection task: fanouts 4/4 unless set.
    pub fn graph_task(&self) -> TrainConfig {
        let mut t = self.train.clone();
        if !self.fanouts_set {
            t.fanouts = Fanouts::small_graph();
        }
        t
    }
}

fn number<T: FromStr>(value: &str, key: &str, err: &dyn Fn(String) -> Error) -> Result<T> {
    value
        .parse()
        .map_err(|_| err(format!("{key}: cannot parse {value:?}")))
}

/// The model keys of `t`, one `key = value` per line, in a form
/// [`Config::parse`] reads back to the same [`TrainConfig`].
pub fn train_config_text(t: &TrainConfig) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(s, "{k} = {v}");
    };
    put("loss", &t.loss.name());
    put("fanout1", &t.fanouts.depth1);
    put("fanout2", &t.fanouts.depth2);
    put("depth1_dim", &t.depth1);
    put("depth2_dim", &t.depth2);
    put("dropout", &t.dropout);
    put("learning_rate", &t.learning_rate);
    put("batch_size", &t.batch_size);
    put("epochs", &t.epochs);
    put("positives", &t.positives);
    put("negatives", &t.negatives);
    put("shuffle_fraction", &t.shuffle_fraction);
    put("seed", &t.seed);
    s
}
