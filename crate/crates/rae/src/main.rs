use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use rae_core::checks;
use rae_core::{FeatureMatrix, Graph, LossKind, Rng};

use rae::data::{self, Dataset, IdMap};
use rae::experiments::{exemplar_config, exemplar_report, graph_report, node_report, Exemplar};
use rae::export::export_embeddings;
use rae::report::report_text;
use rae::{Checkpoint, Config, Error, Result};

#[derive(Parser)]
#[command(
    name = "rae",
    version,
    about = "Unsupervised role embeddings for graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on the configured dataset and write a checkpoint.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write the `epoch loss` trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Embed every node of a dataset with a checkpoint (inference mode).
    Embed {
        #[arg(long)]
        ckpt: PathBuf,
        /// Config file naming the dataset.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed for neighbor sampling of high-degree nodes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Node classification: train, embed, fit the probe, per run.
    EvalNode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads (0: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Skip training (epochs = 0).
        #[arg(long)]
        untrained: bool,
    },
    /// Graph classification by sum readout and cross-validation.
    EvalGraph {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Train with the configured epochs instead of using the untrained
        /// model.
        #[arg(long)]
        trained: bool,
    },
    /// Silhouette of role labels on a synthetic exemplar graph.
    Exemplar {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value = "within")]
        loss: String,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// House: cycle length.
        #[arg(long, default_value_t = 15)]
        cycle_len: usize,
        /// House: number of houses.
        #[arg(long, default_value_t = 5)]
        houses: usize,
        /// Barbell: clique size.
        #[arg(long, default_value_t = 10)]
        clique: usize,
        /// Barbell: path length.
        #[arg(long, default_value_t = 10)]
        path: usize,
    },
    /// Gradient checks, sampler distribution tests and metric oracles.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    House,
    Barbell,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

/// Graph, features and original ids of any dataset.
fn nodes_of(data: &Dataset, seed: u64) -> Result<(Graph, FeatureMatrix, IdMap)> {
    Ok(match data {
        Dataset::Nodes(d) => (d.graph.clone(), d.features.clone(), d.ids.clone()),
        Dataset::Graphs(c) => {
            let f = c.features(&mut Rng::new(seed))?;
            (c.union.clone(), f, IdMap::identity(c.union.n_nodes()))
        }
    })
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Train { config, out, trace } => {
            let cfg = Config::load(&config)?;
            let data = data::load(&cfg.data, &config)?;
            let train_cfg = match data {
                Dataset::Graphs(_) => cfg.graph_task(),
                Dataset::Nodes(_) => cfg.train.clone(),
            };
            let (graph, feats, _) = nodes_of(&data, train_cfg.seed)?;
            let outcome = rae_core::train::train(&graph, &feats, &train_cfg)?;
            let mut text = String::from("epoch loss\n");
            for e in 0..train_cfg.epochs {
                let total: f64 = outcome.losses.iter().map(|l| l[e]).sum();
                text.push_str(&format!("{} {total}\n", e + 1));
            }
            write_out(trace.as_deref(), &text)?;
            Checkpoint {
                config: train_cfg,
                model: outcome.model,
            }
            .save(&out)?;
            info!("wrote {}", out.display());
        }
        Command::Embed {
            ckpt,
            data: data_cfg,
            out,
            seed,
        } => {
            let ck = Checkpoint::load(&ckpt)?;
            let cfg = Config::load(&data_cfg)?;
            let data = data::load(&cfg.data, &data_cfg)?;
            let (graph, feats, ids) = nodes_of(&data, ck.config.seed)?;
            if feats.n_cols() != ck.input_dim() {
                return Err(Error::Usage(format!(
                    "{}: features have {} columns, checkpoint {} expects {}",
                    data_cfg.display(),
                    feats.n_cols(),
                    ckpt.display(),
                    ck.input_dim()
                )));
            }
            let z = ck.model.embed(&graph, &feats, &mut Rng::new(seed))?;
            export_embeddings(&z, ids.ids(), &out)?;
        }
        Command::EvalNode {
            config,
            runs,
            jobs,
            untrained,
        } => {
            let cfg = Config::load(&config)?;
            let Dataset::Nodes(data) = data::load(&cfg.data, &config)? else {
                return Err(Error::Usage(format!(
                    "{}: eval-node needs a node dataset, not a graph collection",
                    config.display()
                )));
            };
            let mut t = cfg.train.clone();
            if untrained {
                t.epochs = 0;
            }
            let report = node_report(&data, &t, runs.unwrap_or(cfg.runs), jobs, cfg.reg_strength)?;
            print!("{}", report_text(&report));
        }
        Command::EvalGraph {
            config,
            runs,
            jobs,
            trained,
        } => {
            let cfg = Config::load(&config)?;
            let Dataset::Graphs(data) = data::load(&cfg.data, &config)? else {
                return Err(Error::Usage(format!(
                    "{}: eval-graph needs a graph collection (graphs = <dir>)",
                    config.display()
                )));
            };
            let mut t = cfg.graph_task();
            if !trained {
                t.epochs = 0;
            }
            let r = graph_report(
                &data,
                &t,
                cfg.folds,
                runs.unwrap_or(cfg.runs),
                jobs,
                cfg.reg_strength,
            )?;
            print!(
                "{}{}",
                report_text(&r.cutoff_accuracy),
                report_text(&r.accuracy)
            );
        }
        Command::Exemplar {
            kind,
            loss,
            runs,
            jobs,
            epochs,
            seed,
            cycle_len,
            houses,
            clique,
            path,
        } => {
            let loss = LossKind::parse(&loss).map_err(|e| Error::Usage(format!("--loss: {e}")))?;
            let ex = match kind {
                Kind::House => Exemplar::House {
                    cycle_len,
                    n_houses: houses,
                },
                Kind::Barbell => Exemplar::Barbell {
                    clique_size: clique,
                    path_len: path,
                },
            };
            let mut t = exemplar_config(loss);
            t.epochs = epochs;
            t.seed = seed;
            let report = exemplar_report(ex, &t, runs, jobs)?;
            print!("{}", report_text(&report));
        }
        Command::Selftest => {
            let mut failed = 0;
            for c in checks::run_all() {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                eprintln!("{failed} check(s) failed");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
