use std::path::Path;
use std::process::{Command, Output};

use rae::export::import_embeddings;
use rae::report::parse_report;

fn rae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rae"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A 10-node barbell as edge/label files plus a small training config.
fn fixture(dir: &Path) -> std::path::PathBuf {
    let lg = rae_core::graph::make_barbell(4, 2).unwrap();
    let mut edges = String::new();
    for (u, v) in lg.graph.edges() {
        edges.push_str(&format!("n{u} n{v}\n"));
    }
    std::fs::write(dir.join("edges.txt"), edges).unwrap();
    let cfg = "\
# tiny model
edges = edges.txt
fanout1 = 2
fanout2 = 3
depth1_dim = 6
depth2_dim = 4
batch_size = 16
epochs = 4
seed = 7
";
    let p = dir.join("run.cfg");
    std::fs::write(&p, cfg).unwrap();
    p
}

#[test]
fn selftest_passes() {
    let o = rae(&["selftest"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().all(|l| l.starts_with("PASS")), "{out}");
}

#[test]
fn bad_flags_and_files_exit_1_and_name_the_culprit() {
    let o = rae(&["train", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--bogus"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "epochs = lots\n").unwrap();
    let o = rae(&["train", "--config", bad.to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.cfg:1"), "{}", stderr(&o));

    let o = rae(&["exemplar", "--kind", "house", "--loss", "sideways"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--loss"));
}

#[test]
fn missing_input_file_is_named() {
    let o = rae(&["train", "--config", "/nonexistent/run.cfg", "--out", "x"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("/nonexistent/run.cfg"));
}

#[test]
fn train_then_embed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let ckpt = dir.path().join("m.ckpt");
    let o = rae(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        ckpt.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "epoch loss");
    assert_eq!(lines.len(), 1 + 4);
    for (i, l) in lines[1..].iter().enumerate() {
        let (e, v) = l.split_once(' ').unwrap();
        assert_eq!(e.parse::<usize>().unwrap(), i + 1);
        assert!(v.parse::<f64>().unwrap().is_finite());
    }

    let csv = dir.path().join("z.csv");
    let o = rae(&[
        "embed",
        "--ckpt",
        ckpt.to_str().unwrap(),
        "--data",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (ids, z) = import_embeddings(&csv).unwrap();
    assert_eq!(z.shape(), (10, 10));
    assert!(ids.iter().all(|i| i.starts_with('n')));
}

#[test]
fn identical_configs_give_identical_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let mut texts = Vec::new();
    for name in ["a.ckpt", "b.ckpt"] {
        let p = dir.path().join(name);
        let o = rae(&[
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        texts.push(std::fs::read_to_string(p).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn exemplar_report_record() {
    let o = rae(&[
        "exemplar", "--kind", "barbell", "--clique", "4", "--path", "2", "--runs", "2", "--epochs",
        "2", "--jobs", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = parse_report(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(r.metric, "silhouette");
    assert_eq!(r.runs(), 2);
    assert!(r.values.iter().all(|v| (-1.0..=1.0).contains(v)));
}

#[test]
fn eval_graph_on_a_tiny_collection() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // ten graphs: triangles (label 1) and 3-paths (label -1)
    let (mut a, mut ind, mut lab) = (String::new(), String::new(), String::new());
    for g in 0..10 {
        let b = 3 * g + 1;
        a.push_str(&format!("{b}, {}\n{}, {}\n", b + 1, b + 1, b + 2));
        if g % 2 == 0 {
            a.push_str(&format!("{}, {b}\n", b + 2));
        }
        for _ in 0..3 {
            ind.push_str(&format!("{}\n", g + 1));
        }
        lab.push_str(if g % 2 == 0 { "1\n" } else { "-1\n" });
    }
    std::fs::write(d.join("T_A.txt"), a).unwrap();
    std::fs::write(d.join("T_graph_indicator.txt"), ind).unwrap();
    std::fs::write(d.join("T_graph_labels.txt"), lab).unwrap();
    std::fs::write(
        d.join("t.cfg"),
        "graphs = .\nfolds = 5\ndepth1_dim = 4\ndepth2_dim = 4\n",
    )
    .unwrap();
    let o = rae(&[
        "eval-graph",
        "--config",
        d.join("t.cfg").to_str().unwrap(),
        "--runs",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    let first: String = out.lines().take(6).collect::<Vec<_>>().join("\n");
    let r = parse_report(&first).unwrap();
    assert_eq!(r.metric, "cv_cutoff_accuracy");
    assert_eq!(r.mean, 1.0);
}
