//! Dataset files.
//!
//! Node datasets come as separate text files keyed by node id (any token):
//!
//! * edges: one `a b` pair per line (whitespace or comma separated);
//! * features: `id,v0,v1,...` dense rows or `id i:v i:v ...` sparse rows
//!   with 0-based column indices, detected from the first data line;
//! * labels: `id label`;
//! * split: `id train|val|test`.
//!
//! Lines starting with `#` and blank lines are skipped everywhere. LINQS
//! `.content`/`.cites` pairs and graph-collection benchmark directories
//! (`<NAME>_A.txt`, `<NAME>_graph_indicator.txt`, `<NAME>_graph_labels.txt`,
//! optional `<NAME>_node_labels.txt`, all 1-based) are read as well.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::warn;
use rae_core::eval::{GraphCollection, Split, DEGREE_FEATURE_CAP};
use rae_core::graph::neighbor_degree_features;
use rae_core::{FeatureMatrix, Graph, Rng};

use crate::config::DataPaths;
use crate::error::{Error, Result};

/// Original node ids in dense order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Identity map over `0..n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::new();
        for i in 0..n {
            m.insert(&i.to_string());
        }
        m
    }

    /// Dense id of `id`, assigning the next one if unseen.
    pub fn insert(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDataset {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: Option<Vec<usize>>,
    /// Original label of each class id.
    pub class_names: Vec<String>,
    pub split: Option<Split>,
    pub ids: IdMap,
}

impl NodeDataset {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Published sizes of the citation benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnownSizes {
    pub nodes: usize,
    pub features: usize,
    pub classes: usize,
    /// Train, validation, test.
    pub split: (usize, usize, usize),
}

pub fn known_sizes(name: &str) -> Option<KnownSizes> {
    let (nodes, features, classes, train) = match name {
        "cora" => (2708, 1433, 7, 140),
        "citeseer" => (3327, 3703, 6, 120),
        "pubmed" => (19717, 500, 3, 60),
        _ => return None,
    };
    Some(KnownSizes {
        nodes,
        features,
        classes,
        split: (train, 500, 1000),
    })
}

/// Either kind of dataset a config can point at.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Nodes(NodeDataset),
    Graphs(GraphCollection),
}

/// Data lines of a file as `(line number, fields)`; fields split on
/// whitespace and commas.
fn records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            let fields = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .map(str::to_string)
                .collect();
            Some((i + 1, fields))
        })
        .collect())
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            path,
            line,
            format!("not a finite number: {s:?}"),
        )),
    }
}

fn parse_usize(path: &Path, line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(path, line, format!("not a non-negative integer: {s:?}")))
}

/// Dense class ids for raw label strings: numeric labels in numeric order,
/// others after them in lexicographic order.
fn dense_classes<'a>(raw: impl IntoIterator<Item = &'a str>) -> BTreeMap<(i64, String), usize> {
    let mut keys: Vec<(i64, String)> = raw
        .into_iter()
        .map(|s| (s.parse::<i64>().unwrap_or(i64::MAX), s.to_string()))
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
}

fn class_key(s: &str) -> (i64, String) {
    (s.parse::<i64>().unwrap_or(i64::MAX), s.to_string())
}

/// Reads a feature file, assigning node ids in row order.
pub fn read_features(path: &Path, ids: &mut IdMap) -> Result<FeatureMatrix> {
    let rows = records(path)?;
    let sparse = rows
        .first()
        .is_some_and(|(_, f)| f.iter().skip(1).any(|t| t.contains(':')));
    let mut dense: Vec<f64> = Vec::new();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut n_cols = 0usize;
    for (line, fields) in &rows {
        let line = *line;
        let before = ids.len();
        if ids.insert(&fields[0]) != before {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate node id {}", fields[0]),
            ));
        }
        if sparse {
            let mut row = Vec::with_capacity(fields.len() - 1);
            for tok in &fields[1..] {
                let (i, v) = tok.split_once(':').ok_or_else(|| {
                    Error::parse(path, line, format!("expected index:value, got {tok:?}"))
                })?;
                let i = parse_usize(path, line, i)?;
                n_cols = n_cols.max(i + 1);
                row.push((i, parse_f64(path, line, v)?));
            }
            sparse_rows.push(row);
        } else {
            let width = fields.len() - 1;
            if before == 0 {
                n_cols = width;
            } else if width != n_cols {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected {n_cols} feature values, found {width}"),
                ));
            }
            for tok in &fields[1..] {
                dense.push(parse_f64(path, line, tok)?);
            }
        }
    }
    let m = if sparse {
        FeatureMatrix::sparse(n_cols, sparse_rows)
    } else {
        FeatureMatrix::dense(n_cols, dense)
    };
    m.map_err(|e| Error::data(path, e.to_string()))
}

/// Reads an edge list. With `fixed` set, every endpoint must already be in
/// `ids`; otherwise unseen ids are added.
pub fn read_edges(path: &Path, ids: &mut IdMap, fixed: bool) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (line, fields) in records(path)? {
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 2 node ids, found {}", fields.len()),
            ));
        }
        let mut end = |id: &str| -> Result<usize> {
            if fixed {
                ids.get(id)
                    .ok_or_else(|| Error::parse(path, line, format!("dangling node id {id}")))
            } else {
                Ok(ids.insert(id))
            }
        };
        let u = end(&fields[0])?;
        let v = end(&fields[1])?;
        edges.push((u, v));
    }
    Ok(edges)
}

fn build_graph(path: &Path, n: usize, edges: Vec<(usize, usize)>) -> Result<Graph> {
    let (graph, cleanup) = Graph::from_edges(n, edges)?;
    if cleanup.duplicates + cleanup.self_loops > 0 {
        warn!(
            "{}: {} duplicate edge(s), {} self-loop(s) dropped",
            path.display(),
            cleanup.duplicates,
            cleanup.self_loops
        );
    }
    Ok(graph)
}

/// Reads `id label` lines; every node needs exactly one label.
pub fn read_labels(path: &Path, ids: &IdMap) -> Result<(Vec<usize>, Vec<String>)> {
    let rows = records(path)?;
    let mut raw: Vec<Option<String>> = vec![None; ids.len()];
    for (line, fields) in &rows {
        if fields.len() != 2 {
            return Err(Error::parse(path, *line, "expected: id label"));
        }
        let u = ids
            .get(&fields[0])
            .ok_or_else(|| Error::parse(path, *line, format!("dangling node id {}", fields[0])))?;
        if raw[u].replace(fields[1].clone()).is_some() {
            return Err(Error::parse(
                path,
                *line,
                format!("second label for node {}", fields[0]),
            ));
        }
    }
    if let Some(u) = raw.iter().position(Option::is_none) {
        return Err(Error::data(
            path,
            format!("no label for node {}", ids.ids()[u]),
        ));
    }
    let raw: Vec<String> = raw.into_iter().map(Option::unwrap).collect();
    let classes = dense_classes(raw.iter().map(String::as_str));
    let labels = raw.iter().map(|s| classes[&class_key(s)]).collect();
    let names = classes.into_keys().map(|(_, s)| s).collect();
    Ok((labels, names))
}

/// Reads `id train|val|test` lines.
pub fn read_split(path: &Path, ids: &IdMap) -> Result<Split> {
    let mut sets: [Vec<usize>; 3] = Default::default();
    let mut first_line: HashMap<usize, usize> = HashMap::new();
    for (line, fields) in records(path)? {
        if fields.len() != 2 {
            return Err(Error::parse(path, line, "expected: id train|val|test"));
        }
        let u = ids
            .get(&fields[0])
            .ok_or_else(|| Error::parse(path, line, format!("dangling node id {}", fields[0])))?;
        let which = match fields[1].as_str() {
            "train" => 0,
            "val" | "validation" => 1,
            "test" => 2,
            other => {
                return Err(Error::parse(path, line, format!("unknown split {other:?}")));
            }
        };
        if let Some(prev) = first_line.insert(u, line) {
            return Err(Error::parse(
                path,
                line,
                format!("node {} already assigned on line {prev}", fields[0]),
            ));
        }
        sets[which].push(u);
    }
    let [train, val, test] = sets;
    Split::new(train, val, test, ids.len()).map_err(|e| Error::data(path, e.to_string()))
}

/// Loads a node dataset from separate files. Without a feature file, node
/// ids come from the edge list and features are sorted neighbor degrees.
pub fn load_node_dataset(
    edges: &Path,
    features: Option<&Path>,
    labels: Option<&Path>,
    split: Option<&Path>,
) -> Result<NodeDataset> {
    let mut ids = IdMap::new();
    let feats = features.map(|p| read_features(p, &mut ids)).transpose()?;
    let edge_list = read_edges(edges, &mut ids, feats.is_some())?;
    let graph = build_graph(edges, ids.len(), edge_list)?;
    let features = match feats {
        Some(f) => f,
        None => neighbor_degree_features(&graph, DEGREE_FEATURE_CAP, &mut Rng::new(0))?,
    };
    finish(graph, features, ids, labels, split)
}

fn finish(
    graph: Graph,
    features: FeatureMatrix,
    ids: IdMap,
    labels: Option<&Path>,
    split: Option<&Path>,
) -> Result<NodeDataset> {
    let (labels, class_names) = match labels {
        Some(p) => {
            let (l, n) = read_labels(p, &ids)?;
            (Some(l), n)
        }
        None => (None, Vec::new()),
    };
    let split = split.map(|p| read_split(p, &ids)).transpose()?;
    Ok(NodeDataset {
        graph,
        features,
        labels,
        class_names,
        split,
        ids,
    })
}

/// Loads a LINQS `.content`/`.cites` pair: content rows are
/// `id w1 .. wD label`, cite rows `cited citing`. Citations naming papers
/// missing from the content file are skipped with a warning, as the
/// published Citeseer files contain some.
pub fn load_linqs(content: &Path, cites: &Path, split: Option<&Path>) -> Result<NodeDataset> {
    let mut ids = IdMap::new();
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    let mut n_cols = None;
    for (line, fields) in records(content)? {
        if fields.len() < 2 {
            return Err(Error::parse(
                content,
                line,
                "expected: id features... label",
            ));
        }
        let before = ids.len();
        if ids.insert(&fields[0]) != before {
            return Err(Error::parse(
                content,
                line,
                format!("duplicate node id {}", fields[0]),
            ));
        }
        let values = &fields[1..fields.len() - 1];
        if *n_cols.get_or_insert(values.len()) != values.len() {
            return Err(Error::parse(content, line, "inconsistent feature count"));
        }
        let mut row = Vec::new();
        for (i, tok) in values.iter().enumerate() {
            let v = parse_f64(content, line, tok)?;
            if v != 0.0 {
                row.push((i, v));
            }
        }
        rows.push(row);
        raw_labels.push(fields[fields.len() - 1].clone());
    }
    let features = FeatureMatrix::sparse(n_cols.unwrap_or(0), rows)
        .map_err(|e| Error::data(content, e.to_string()))?;
    let mut edges = Vec::new();
    let mut skipped = 0usize;
    for (line, fields) in records(cites)? {
        if fields.len() != 2 {
            return Err(Error::parse(cites, line, "expected 2 node ids"));
        }
        match (ids.get(&fields[0]), ids.get(&fields[1])) {
            (Some(u), Some(v)) => edges.push((u, v)),
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        warn!(
            "{}: skipped {skipped} citation(s) to unknown papers",
            cites.display()
        );
    }
    let graph = build_graph(cites, ids.len(), edges)?;
    let classes = dense_classes(raw_labels.iter().map(String::as_str));
    let labels = raw_labels.iter().map(|s| classes[&class_key(s)]).collect();
    let class_names = classes.into_keys().map(|(_, s)| s).collect();
    let split = split.map(|p| read_split(p, &ids)).transpose()?;
    Ok(NodeDataset {
        graph,
        features,
        labels: Some(labels),
        class_names,
        split,
        ids,
    })
}

/// Checks a dataset against the published sizes of `name`.
pub fn check_known_sizes(data: &NodeDataset, name: &str, origin: &Path) -> Result<()> {
    let Some(k) = known_sizes(name) else {
        return Err(Error::data(
            origin,
            format!("unknown dataset name {name:?}"),
        ));
    };
    let mut problems = String::new();
    let mut check = |what: &str, got: usize, want: usize| {
        if got != want {
            let _ = write!(problems, " {what} {got} (expected {want});");
        }
    };
    check("nodes", data.graph.n_nodes(), k.nodes);
    check("features", data.features.n_cols(), k.features);
    check("classes", data.n_classes(), k.classes);
    if let Some(s) = &data.split {
        check("train nodes", s.train.len(), k.split.0);
        check("validation nodes", s.validation.len(), k.split.1);
        check("test nodes", s.test.len(), k.split.2);
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::data(
            origin,
            format!("does not match {name}:{problems}"),
        ))
    }
}

/// Split with `per_class` training nodes from each class, then `validation`
/// and `test` nodes drawn from the rest. Used when no split file is given.
pub fn per_class_split(
    labels: &[usize],
    n_classes: usize,
    per_class: usize,
    validation: usize,
    test: usize,
    rng: &mut Rng,
) -> Result<Split> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    rng.shuffle(&mut order);
    let mut taken = vec![0usize; n_classes];
    let mut train = Vec::new();
    let mut rest = Vec::new();
    for u in order {
        if taken[labels[u]] < per_class {
            taken[labels[u]] += 1;
            train.push(u);
        } else {
            rest.push(u);
        }
    }
    if rest.len() < validation + test {
        return Err(Error::Usage(format!(
            "{} nodes left after training selection, need {}",
            rest.len(),
            validation + test
        )));
    }
    let test_set = rest[validation..validation + test].to_vec();
    rest.truncate(validation);
    Ok(Split::new(train, rest, test_set, labels.len())?)
}

fn benchmark_file(dir: &Path, prefix: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{prefix}_{suffix}.txt"))
}

/// Loads a graph-collection benchmark directory (TU format).
pub fn load_graph_collection(dir: &Path) -> Result<GraphCollection> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut prefix = None;
    for entry in entries {
        let name = entry.map_err(|e| Error::io(dir, e))?.file_name();
        if let Some(p) = name.to_str().and_then(|n| n.strip_suffix("_A.txt")) {
            prefix = Some(p.to_string());
        }
    }
    let prefix = prefix.ok_or_else(|| Error::data(dir, "no <NAME>_A.txt edge file"))?;

    let ind_path = benchmark_file(dir, &prefix, "graph_indicator");
    let mut membership = Vec::new();
    for (line, fields) in records(&ind_path)? {
        let g = parse_usize(&ind_path, line, &fields[0])?;
        if g == 0 {
            return Err(Error::parse(&ind_path, line, "graph ids are 1-based"));
        }
        membership.push(g - 1);
    }
    let n_graphs = membership.iter().max().map_or(0, |&g| g + 1);

    let lab_path = benchmark_file(dir, &prefix, "graph_labels");
    let raw: Vec<String> = records(&lab_path)?
        .into_iter()
        .map(|(_, f)| f[0].clone())
        .collect();
    if raw.len() != n_graphs {
        return Err(Error::data(
            &lab_path,
            format!(
                "{} labels for {n_graphs} graphs in {}",
                raw.len(),
                ind_path.display()
            ),
        ));
    }
    let classes = dense_classes(raw.iter().map(String::as_str));
    let graph_labels = raw.iter().map(|s| classes[&class_key(s)]).collect();

    let a_path = benchmark_file(dir, &prefix, "A");
    let n = membership.len();
    let mut edges = Vec::new();
    for (line, fields) in records(&a_path)? {
        if fields.len() != 2 {
            return Err(Error::parse(&a_path, line, "expected 2 node ids"));
        }
        let end = |s: &str| -> Result<usize> {
            match parse_usize(&a_path, line, s)? {
                v @ 1.. if v <= n => Ok(v - 1),
                v => Err(Error::parse(
                    &a_path,
                    line,
                    format!("node {v} outside 1..={n}"),
                )),
            }
        };
        let (u, v) = (end(&fields[0])?, end(&fields[1])?);
        if membership[u] != membership[v] {
            return Err(Error::parse(
                &a_path,
                line,
                format!(
                    "edge joins graphs {} and {}",
                    membership[u] + 1,
                    membership[v] + 1
                ),
            ));
        }
        edges.push((u, v));
    }
    let (union, _) = Graph::from_edges(n, edges)?;

    let cat_path = benchmark_file(dir, &prefix, "node_labels");
    let node_categories = if cat_path.exists() {
        let rows = records(&cat_path)?;
        if rows.len() != n {
            return Err(Error::data(
                &cat_path,
                format!("{} rows for {n} nodes", rows.len()),
            ));
        }
        let cats = dense_classes(rows.iter().map(|(_, f)| f[0].as_str()));
        let ids = rows.iter().map(|(_, f)| cats[&class_key(&f[0])]).collect();
        Some((ids, cats.len()))
    } else {
        None
    };
    Ok(GraphCollection {
        union,
        membership,
        graph_labels,
        node_categories,
    })
}

/// Loads whatever `paths` describes.
pub fn load(paths: &DataPaths, origin: &Path) -> Result<Dataset> {
    if let Some(dir) = &paths.graphs {
        return Ok(Dataset::Graphs(load_graph_collection(dir)?));
    }
    let data = match (&paths.content, &paths.cites, &paths.edges) {
        (Some(content), Some(cites), _) => load_linqs(content, cites, paths.split.as_deref())?,
        (_, _, Some(edges)) => load_node_dataset(
            edges,
            paths.features.as_deref(),
            paths.labels.as_deref(),
            paths.split.as_deref(),
        )?,
        _ => {
            return Err(Error::data(
                origin,
                "no dataset: set edges, content and cites, or graphs",
            ))
        }
    };
    if let Some(name) = &paths.dataset {
        check_known_sizes(&data, name, origin)?;
    }
    Ok(Dataset::Nodes(data))
}

/// Writes `graph` as an edge list over the original ids, one line per
/// undirected edge.
pub fn write_edges(graph: &Graph, ids: &IdMap, path: &Path) -> Result<()> {
    let mut s = String::new();
    for (u, v) in graph.edges() {
        let _ = writeln!(s, "{} {}", ids.ids()[u], ids.ids()[v]);
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn two_line_edge_file_is_a_path() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "0 1\n1 2\n");
        let d = load_node_dataset(&e, None, None, None).unwrap();
        assert_eq!(d.graph, Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap().0);
        assert_eq!(d.features.n_cols(), DEGREE_FEATURE_CAP);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "a b\nb a\na,b\n");
        let d = load_node_dataset(&e, None, None, None).unwrap();
        assert_eq!(d.graph.n_edges(), 1);
    }

    #[test]
    fn dense_and_sparse_features_agree() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "x y\n");
        let dense = write(dir.path(), "d.csv", "x,1,0,2\ny,0,0,0\n");
        let sparse = write(dir.path(), "s.txt", "x 0:1 2:2\ny 2:0\n");
        let a = load_node_dataset(&e, Some(&dense), None, None).unwrap();
        let b = load_node_dataset(&e, Some(&sparse), None, None).unwrap();
        assert_eq!(a.features.n_cols(), 3);
        assert_eq!(a.features.to_dense(), b.features.to_dense());
        assert_eq!(a.ids.ids(), ["x", "y"]);
    }

    #[test]
    fn parse_errors_name_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "f.csv", "a,1\nb,2\n");
        let e = write(dir.path(), "e.txt", "a b\n# comment\nb zz\n");
        let err = load_node_dataset(&e, Some(&f), None, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("e.txt:3") && err.contains("zz"), "{err}");

        let bad = write(dir.path(), "g.csv", "a,1\nb,oops\n");
        let err = read_features(&bad, &mut IdMap::new())
            .unwrap_err()
            .to_string();
        assert!(err.contains("g.csv:2"), "{err}");

        let ok_edges = write(dir.path(), "ok.txt", "a b\n");
        let split = write(dir.path(), "s.txt", "a train\nb test\na val\n");
        let err = load_node_dataset(&ok_edges, Some(&f), None, Some(&split))
            .unwrap_err()
            .to_string();
        assert!(err.contains("s.txt:3") && err.contains("line 1"), "{err}");
    }

    #[test]
    fn labels_are_remapped_in_numeric_order() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "a b\nb c\n");
        let l = write(dir.path(), "l.txt", "a 10\nb 2\nc -1\n");
        let d = load_node_dataset(&e, None, Some(&l), None).unwrap();
        assert_eq!(d.labels, Some(vec![2, 1, 0]));
        assert_eq!(d.class_names, ["-1", "2", "10"]);
        let missing = write(dir.path(), "m.txt", "a 1\nb 2\n");
        let err = load_node_dataset(&e, None, Some(&missing), None).unwrap_err();
        assert!(err.to_string().contains("no label for node c"));
    }

    #[test]
    fn linqs_reader() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "x.content", "p1 0 1 A\np2 1 1 B\np3 0 0 A\n");
        let t = write(dir.path(), "x.cites", "p1 p2\np2 p3\np9 p1\n");
        let d = load_linqs(&c, &t, None).unwrap();
        assert_eq!(d.graph.n_edges(), 2);
        assert_eq!(d.labels, Some(vec![0, 1, 0]));
        assert_eq!(d.features.nnz(), 3);
    }

    #[test]
    fn per_class_split_sizes() {
        let labels: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let s = per_class_split(&labels, 3, 20, 50, 100, &mut Rng::new(1)).unwrap();
        assert_eq!(
            (s.train.len(), s.validation.len(), s.test.len()),
            (60, 50, 100)
        );
        for c in 0..3 {
            assert_eq!(s.train.iter().filter(|&&u| labels[u] == c).count(), 20);
        }
    }

    #[test]
    fn triangle_collection() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "T_A.txt", "1, 2\n2, 3\n3, 1\n2, 1\n");
        write(dir.path(), "T_graph_indicator.txt", "1\n1\n1\n");
        write(dir.path(), "T_graph_labels.txt", "-1\n");
        let c = load_graph_collection(dir.path()).unwrap();
        assert_eq!(c.n_graphs(), 1);
        let f = c.features(&mut Rng::new(0)).unwrap();
        let mut want = vec![0.0; DEGREE_FEATURE_CAP];
        want[..2].copy_from_slice(&[2.0, 2.0]);
        for u in 0..3 {
            assert_eq!(f.row_dense(u), want);
        }
    }

    #[test]
    fn collection_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_graph_collection(dir.path()).is_err());
        write(dir.path(), "T_A.txt", "1, 2\n2, 3\n");
        write(dir.path(), "T_graph_indicator.txt", "1\n1\n2\n");
        write(dir.path(), "T_graph_labels.txt", "0\n1\n");
        let err = load_graph_collection(dir.path()).unwrap_err().to_string();
        assert!(
            err.contains("T_A.txt:2") && err.contains("joins graphs"),
            "{err}"
        );
    }
}
