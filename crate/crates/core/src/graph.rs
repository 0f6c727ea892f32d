//! Attributed graph model (symmetric CSR adjacency plus dense node features)
//! and the plain-text loaders and writers used by the command line.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Undirected, unweighted graph with one dense feature row per node.
///
/// Neighbor lists are sorted, symmetric, free of self-loops and duplicates.
#[derive(Debug, Clone)]
pub struct AttributedGraph<T> {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    features: Matrix<T>,
    labels: Option<Vec<u8>>,
    communities: Option<Vec<usize>>,
}

impl<T: Scalar> AttributedGraph<T> {
    /// Builds the CSR adjacency from an arbitrary edge collection. The node
    /// count is the number of feature rows. Edges are symmetrized, self-loops
    /// dropped and duplicates collapsed.
    pub fn build(edges: &[(usize, usize)], features: Matrix<T>, labels: Option<Vec<u8>>) -> Result<Self> {
        let n = features.rows();
        if !features.is_finite() {
            return Err(Error::Validation("feature matrix contains non-finite values".into()));
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::Index { index: x, n });
                }
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut g = Self::from_adjacency(adj, features);
        if let Some(l) = labels {
            g = g.with_labels(l)?;
        }
        Ok(g)
    }

    /// Builds from per-node neighbor lists; lists are sorted and deduplicated
    /// and self-loops removed. Caller guarantees symmetry.
    pub(crate) fn from_adjacency(mut adj: Vec<Vec<usize>>, features: Matrix<T>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            neighbors.extend(list.iter().copied().filter(|&j| j != i));
            offsets.push(neighbors.len());
        }
        Self {
            offsets,
            neighbors,
            features,
            labels: None,
            communities: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<u8>) -> Result<Self> {
        validate_labels(&labels, self.node_count())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_communities(mut self, communities: Vec<usize>) -> Result<Self> {
        if communities.len() != self.node_count() {
            return Err(Error::Dimension(format!(
                "{} community entries for {} nodes",
                communities.len(),
                self.node_count()
            )));
        }
        self.communities = Some(communities);
        Ok(self)
    }

    /// Same topology and labels, different feature matrix.
    pub fn with_features(&self, features: Matrix<T>) -> Result<Self> {
        if features.rows() != self.node_count() {
            return Err(Error::Dimension(format!(
                "{} feature rows for {} nodes",
                features.rows(),
                self.node_count()
            )));
        }
        Ok(Self {
            offsets: self.offsets.clone(),
            neighbors: self.neighbors.clone(),
            features,
            labels: self.labels.clone(),
            communities: self.communities.clone(),
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    #[inline]
    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn communities(&self) -> Option<&[usize]> {
        self.communities.as_deref()
    }

    pub fn degree_profile(&self) -> NodeDegreeProfile {
        NodeDegreeProfile::new((0..self.node_count()).map(|i| self.degree(i)).collect())
    }
}

/// Per-node degrees and the pair-forming (degree >= 2) mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDegreeProfile {
    pub degrees: Vec<usize>,
    pub valid_mask: Vec<bool>,
    pub isolated_count: usize,
    pub degree_one_count: usize,
}

impl NodeDegreeProfile {
    pub fn new(degrees: Vec<usize>) -> Self {
        let valid_mask = degrees.iter().map(|&d| d >= 2).collect();
        let isolated_count = degrees.iter().filter(|&&d| d == 0).count();
        let degree_one_count = degrees.iter().filter(|&&d| d == 1).count();
        Self {
            degrees,
            valid_mask,
            isolated_count,
            degree_one_count,
        }
    }

    pub fn valid_count(&self) -> usize {
        self.degrees.len() - self.invalid_count()
    }

    pub fn invalid_count(&self) -> usize {
        self.isolated_count + self.degree_one_count
    }
}

/// Parsed edge file. `edges` use dense ids `0..node_ids.len()`, assigned in
/// ascending order of the original ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub edges: Vec<(usize, usize)>,
    /// Dense id -> original id.
    pub node_ids: Vec<u64>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

impl EdgeList {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn max_original_id(&self) -> Option<u64> {
        self.node_ids.last().copied()
    }

    /// Edges expressed in the original ids of the file.
    pub fn original_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(u, v)| (self.node_ids[u] as usize, self.node_ids[v] as usize))
            .collect()
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_comment(line: &str) -> bool {
    line.starts_with('#') || line.starts_with('%')
}

/// Reads a whitespace-separated `u v` edge list. Lines starting with `#` or
/// `%` are comments.
pub fn load_edge_list(path: &Path) -> Result<EdgeList> {
    parse_edge_list(&read_text(path)?, path)
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<EdgeList> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || is_comment(line) {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let tok = tokens
                .next()
                .ok_or_else(|| parse_err(lineno + 1, "expected two node ids".into()))?;
            tok.parse::<u64>()
                .map_err(|_| parse_err(lineno + 1, format!("`{tok}` is not a non-negative integer")))
        };
        let u = next_id()?;
        let v = next_id()?;
        if tokens.next().is_some() {
            return Err(parse_err(lineno + 1, "expected exactly two node ids".into()));
        }
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::Validation(format!("{}: edge list is empty", path.display())));
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let dense: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut self_loops = 0;
    let mut edges = Vec::with_capacity(raw.len());
    for (u, v) in raw {
        if u == v {
            self_loops += 1;
            continue;
        }
        let (a, b) = (dense[&u], dense[&v]);
        edges.push((a.min(b), a.max(b)));
    }
    let before = edges.len();
    edges.sort_unstable();
    edges.dedup();
    let duplicates = before - edges.len();
    if self_loops > 0 {
        log::warn!("{}: dropped {self_loops} self-loop(s)", path.display());
    }
    if duplicates > 0 {
        log::warn!(
            "{}: collapsed {duplicates} duplicate or reversed edge(s); graph treated as undirected",
            path.display()
        );
    }
    Ok(EdgeList {
        edges,
        node_ids: ids,
        self_loops_dropped: self_loops,
        duplicates_dropped: duplicates,
    })
}

/// Reads a comma- or tab-separated numeric matrix with exactly `n` rows.
pub fn load_features<T: Scalar>(path: &Path, n: usize) -> Result<Matrix<T>> {
    parse_features(&read_text(path)?, path, n)
}

pub fn parse_features<T: Scalar>(text: &str, path: &Path, n: usize) -> Result<Matrix<T>> {
    let m = parse_feature_matrix(text, path)?;
    if m.rows() != n {
        return Err(Error::Dimension(format!(
            "{}: {} feature rows, expected {n}",
            path.display(),
            m.rows()
        )));
    }
    Ok(m)
}

/// Like [`load_features`] but accepts any number of rows.
pub fn load_feature_matrix<T: Scalar>(path: &Path) -> Result<Matrix<T>> {
    parse_feature_matrix(&read_text(path)?, path)
}

pub fn parse_feature_matrix<T: Scalar>(text: &str, path: &Path) -> Result<Matrix<T>> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || is_comment(line) {
            continue;
        }
        let mut count = 0;
        for (c, cell) in line.split([',', '\t']).enumerate() {
            let cell = cell.trim();
            let x: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("column {}: `{cell}` is not a number", c + 1),
            })?;
            if !x.is_finite() {
                return Err(Error::Validation(format!(
                    "{}:{}: column {}: non-finite feature value `{cell}`",
                    path.display(),
                    lineno + 1,
                    c + 1
                )));
            }
            data.push(T::of(x));
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(d) if d != count => {
                return Err(Error::Dimension(format!(
                    "{}:{}: row has {count} values, expected {d}",
                    path.display(),
                    lineno + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    Matrix::new(rows, cols.unwrap_or(0), data)
}

/// Reads one 0/1 label per line; exactly `n` values.
pub fn load_labels(path: &Path, n: usize) -> Result<Vec<u8>> {
    parse_labels(&read_text(path)?, path, n)
}

pub fn parse_labels(text: &str, path: &Path, n: usize) -> Result<Vec<u8>> {
    let mut labels = Vec::with_capacity(n);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || is_comment(line) {
            continue;
        }
        let v: i64 = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg: format!("`{line}` is not an integer"),
        })?;
        if v != 0 && v != 1 {
            return Err(Error::Validation(format!(
                "{}:{}: label {v} is not 0 or 1",
                path.display(),
                lineno + 1
            )));
        }
        labels.push(v as u8);
    }
    if labels.len() != n {
        return Err(Error::Dimension(format!(
            "{}: {} labels, expected {n}",
            path.display(),
            labels.len()
        )));
    }
    Ok(labels)
}

fn validate_labels(labels: &[u8], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Dimension(format!("{} labels for {n} nodes", labels.len())));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Validation(format!("label {bad} is not 0 or 1")));
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_edge_list<T: Scalar>(g: &AttributedGraph<T>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Comma-separated rows, shortest round-trip float formatting.
pub fn write_matrix<T: Scalar>(m: &Matrix<T>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for row in m.iter_rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{}", x.as_f64())).collect();
        writeln!(w, "{}", line.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_column<D: std::fmt::Display>(values: &[D], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for v in values {
        writeln!(w, "{v}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
