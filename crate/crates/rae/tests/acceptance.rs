//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the lines reach the
//! terminal. Citation datasets are looked up under `data/` at the workspace
//! root, or under `$RAE_DATA` when set:
//!
//! * `<dir>/cora/cora.cfg` (a `rae` config), or
//! * `<dir>/cora/cora.content` + `cora.cites`, with an optional
//!   `split.txt`; without it the split is 20 nodes per class, 500
//!   validation, 1000 test.
//!
//! Likewise for `citeseer`. A missing dataset is reported as FAIL and does
//! not abort the remaining criteria. The process exits non-zero when any
//! criterion whose data is present fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rae::config::Config;
use rae::data::{self, Dataset, NodeDataset};
use rae::experiments::{exemplar_config, exemplar_report, graph_report, node_report, Exemplar};
use rae::Checkpoint;
use rae_core::checks;
use rae_core::eval::DEFAULT_REG_STRENGTH;
use rae_core::{Fanouts, LossKind, TrainConfig};

const EXEMPLAR_RUNS: usize = 50;
const HOUSE_MIN: f64 = 0.80;
const HOUSE_MARGIN: f64 = 0.03;
const BARBELL_MIN: f64 = 0.55;

const CORA_RUNS: usize = 5;
const CORA_WITHIN_MIN: f64 = 0.74;
const CORA_NEIGHBOR_MIN: f64 = 0.75;
const CORA_UNTRAINED: (f64, f64) = (0.50, 0.65);
const CORA_GAIN: f64 = 0.10;

const MUTAG_RUNS: usize = 5;
const MUTAG_FOLDS: usize = 10;
const MUTAG_MIN: f64 = 0.82;

/// Worker threads: one per core.
const JOBS: usize = 0;

#[derive(Default)]
struct Tally {
    failed: usize,
    missing: usize,
}

impl Tally {
    fn line(&mut self, id: &str, passed: bool, detail: String, started: Instant) {
        let secs = started.elapsed().as_secs_f64();
        println!(
            "{} criterion {id}: {detail} [{secs:.0} s]",
            if passed { "PASS" } else { "FAIL" }
        );
        self.failed += usize::from(!passed);
    }

    fn missing(&mut self, id: &str, detail: String) {
        println!("FAIL criterion {id}: {detail}");
        self.missing += 1;
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data_dir() -> PathBuf {
    std::env::var_os("RAE_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data"))
}

/// Loads a citation dataset by name, or says where it was looked for.
fn citation_dataset(name: &str) -> Result<NodeDataset, String> {
    let dir = data_dir().join(name);
    let cfg_path = dir.join(format!("{name}.cfg"));
    let loaded = if cfg_path.exists() {
        Config::load(&cfg_path).and_then(|c| data::load(&c.data, &cfg_path))
    } else {
        let content = dir.join(format!("{name}.content"));
        let cites = dir.join(format!("{name}.cites"));
        if !(content.exists() && cites.exists()) {
            return Err(format!(
                "dataset not found (looked for {} or {} + {})",
                cfg_path.display(),
                content.display(),
                cites.display()
            ));
        }
        let split = dir.join("split.txt");
        data::load_linqs(&content, &cites, split.exists().then_some(split.as_path()))
            .map(Dataset::Nodes)
    };
    match loaded {
        Ok(Dataset::Nodes(d)) => Ok(d),
        Ok(Dataset::Graphs(_)) => Err(format!("{name}: expected a node dataset")),
        Err(e) => Err(format!("{name}: {e}")),
    }
}

fn fmt(r: &rae_core::eval::EvalReport) -> String {
    format!("{:.3} ± {:.3} (n={})", r.mean, r.stderr(), r.runs())
}

fn exemplars(t: &mut Tally) {
    let started = Instant::now();
    let within = exemplar_report(
        Exemplar::HOUSE,
        &exemplar_config(LossKind::Within),
        EXEMPLAR_RUNS,
        JOBS,
    );
    let neighbor = exemplar_report(
        Exemplar::HOUSE,
        &exemplar_config(LossKind::Neighbor),
        EXEMPLAR_RUNS,
        JOBS,
    );
    match (within, neighbor) {
        (Ok(w), Ok(n)) => {
            let passed = w.mean >= HOUSE_MIN && w.mean >= n.mean - HOUSE_MARGIN;
            t.line(
                "1 (house silhouette)",
                passed,
                format!(
                    "within {} >= {HOUSE_MIN}; neighbor {}; within >= neighbor - {HOUSE_MARGIN}",
                    fmt(&w),
                    fmt(&n)
                ),
                started,
            );
        }
        (w, n) => t.line(
            "1 (house silhouette)",
            false,
            format!("error: {:?} / {:?}", w.err(), n.err()),
            started,
        ),
    }

    let started = Instant::now();
    match exemplar_report(
        Exemplar::BARBELL,
        &exemplar_config(LossKind::Within),
        EXEMPLAR_RUNS,
        JOBS,
    ) {
        Ok(b) => t.line(
            "2 (barbell silhouette)",
            b.mean >= BARBELL_MIN,
            format!("within {} >= {BARBELL_MIN}", fmt(&b)),
            started,
        ),
        Err(e) => t.line(
            "2 (barbell silhouette)",
            false,
            format!("error: {e}"),
            started,
        ),
    }
}

fn cora(t: &mut Tally) {
    let id = "3 (Cora node classification)";
    let data = match citation_dataset("cora") {
        Ok(d) => d,
        Err(why) => return t.missing(id, why),
    };
    let started = Instant::now();
    let run = |loss, epochs| {
        let config = TrainConfig {
            loss,
            epochs,
            ..TrainConfig::default()
        };
        node_report(&data, &config, CORA_RUNS, JOBS, DEFAULT_REG_STRENGTH)
    };
    let results = (|| -> rae::Result<_> {
        Ok((
            run(LossKind::Within, 0)?,
            run(LossKind::Within, TrainConfig::default().epochs)?,
            run(LossKind::Neighbor, TrainConfig::default().epochs)?,
        ))
    })();
    match results {
        Ok((u, w, n)) => {
            let passed = w.mean >= CORA_WITHIN_MIN
                && n.mean >= CORA_NEIGHBOR_MIN
                && (CORA_UNTRAINED.0..=CORA_UNTRAINED.1).contains(&u.mean)
                && w.mean - u.mean >= CORA_GAIN
                && n.mean - u.mean >= CORA_GAIN;
            t.line(
                id,
                passed,
                format!(
                    "within {} >= {CORA_WITHIN_MIN}; neighbor {} >= {CORA_NEIGHBOR_MIN}; \
                     untrained {} in {CORA_UNTRAINED:?}; gains >= {CORA_GAIN}",
                    fmt(&w),
                    fmt(&n),
                    fmt(&u)
                ),
                started,
            );
        }
        Err(e) => t.line(id, false, format!("error: {e}"), started),
    }
}

fn mutag(t: &mut Tally) {
    let id = "4 (MUTAG graph classification)";
    let dir = data_dir().join("MUTAG");
    let started = Instant::now();
    let data = match data::load_graph_collection(&dir) {
        Ok(d) => d,
        Err(e) => return t.missing(id, format!("dataset not loadable: {e}")),
    };
    let config = TrainConfig {
        fanouts: Fanouts::small_graph(),
        epochs: 0,
        ..TrainConfig::default()
    };
    match graph_report(
        &data,
        &config,
        MUTAG_FOLDS,
        MUTAG_RUNS,
        JOBS,
        DEFAULT_REG_STRENGTH,
    ) {
        Ok(r) => t.line(
            id,
            r.cutoff_accuracy.mean >= MUTAG_MIN,
            format!(
                "untrained, fanouts 4/4, {MUTAG_FOLDS}-fold cutoff accuracy {} >= {MUTAG_MIN} \
                 (plain accuracy {})",
                fmt(&r.cutoff_accuracy),
                fmt(&r.accuracy)
            ),
            started,
        ),
        Err(e) => t.line(id, false, format!("error: {e}"), started),
    }
}

fn citeseer(t: &mut Tally) {
    let id = "5 (Citeseer smoke run)";
    let data = match citation_dataset("citeseer") {
        Ok(d) => d,
        Err(why) => return t.missing(id, why),
    };
    let started = Instant::now();
    match node_report(
        &data,
        &TrainConfig::default(),
        1,
        JOBS,
        DEFAULT_REG_STRENGTH,
    ) {
        Ok(r) => t.line(
            id,
            r.values.iter().all(|v| v.is_finite()),
            format!("1 run, test accuracy {:.3}", r.mean),
            started,
        ),
        Err(e) => t.line(id, false, format!("error: {e}"), started),
    }
}

/// Two trainings from the same config produce the same checkpoint text.
fn checkpoint_determinism() -> Result<bool, String> {
    let lg = Exemplar::HOUSE.build().map_err(|e| e.to_string())?;
    let config = TrainConfig {
        fanouts: Fanouts::new(2, 4).unwrap(),
        depth1: 16,
        depth2: 8,
        batch_size: 32,
        epochs: 5,
        seed: 3,
        ..TrainConfig::default()
    };
    let once = || -> Result<String, String> {
        let feats = rae_core::graph::neighbor_degree_features(
            &lg.graph,
            30,
            &mut rae_core::Rng::new(config.seed),
        )
        .map_err(|e| e.to_string())?;
        let out = rae_core::train::train(&lg.graph, &feats, &config).map_err(|e| e.to_string())?;
        Ok(Checkpoint {
            config: config.clone(),
            model: out.model,
        }
        .to_text())
    };
    Ok(once()? == once()?)
}

fn properties(t: &mut Tally) {
    let started = Instant::now();
    let mut failed: Vec<String> = checks::run_all()
        .into_iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    match checkpoint_determinism() {
        Ok(true) => {}
        Ok(false) => failed.push("checkpoint_determinism".into()),
        Err(e) => failed.push(format!("checkpoint_determinism ({e})")),
    }
    let detail = if failed.is_empty() {
        "gradient checks, divergence pair, oracles, derangement, chi-square, determinism, \
         receptive field all hold"
            .to_string()
    } else {
        format!("failing: {}", failed.join("; "))
    };
    t.line("6 (property suite)", failed.is_empty(), detail, started);
}

fn main() {
    // `cargo test -- --list` and filters pass arguments; there is nothing
    // to list or filter here.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut t = Tally::default();
    properties(&mut t);
    mutag(&mut t);
    exemplars(&mut t);
    cora(&mut t);
    citeseer(&mut t);
    println!(
        "acceptance: {} failed, {} without data",
        t.failed, t.missing
    );
    if t.failed > 0 {
        std::process::exit(1);
    }
}
