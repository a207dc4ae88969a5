//! Undirected simple graphs: construction, random generators and the
//! edge-list file format.
//!
//! The text format is a header line holding the node count followed by one
//! `i j` pair per line (0-indexed). Blank lines and lines starting with `#`
//! are ignored.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::rng::XorShift64Star;
use crate::scalar::Scalar;

/// Number of fresh samples a random generator may draw before giving up on
/// producing a connected graph.
pub const DEFAULT_REJECTION_BUDGET: usize = 10_000;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected: nodes {component:?} are unreachable from node 0")]
    Disconnected { component: Vec<usize> },
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("no connected sample after {0} attempts")]
    RejectionBudgetExhausted(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    AtLine { line: usize, source: Box<GraphError> },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Connected undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates, out-of-range nodes
    /// and disconnected inputs. Edges are stored as `(min, max)` in the order
    /// given.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let g = Self::unchecked_connectivity(n, edges)?;
        g.check_connected()?;
        Ok(g)
    }

    fn unchecked_connectivity(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        let mut neighbors = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::NodeOutOfRange(a, b, n));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
            list.push(e);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        Ok(Self { n, edges: list, neighbors })
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let reached = self.reachable_from(0);
        if reached.iter().all(|&r| r) {
            return Ok(());
        }
        // Name the component of the first unreachable node.
        let first = reached.iter().position(|&r| !r).expect("some node unreachable");
        let comp = self.reachable_from(first);
        let component = (0..self.n).filter(|&v| comp[v]).collect();
        Err(GraphError::Disconnected { component })
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.neighbors[a].binary_search(&b).is_ok()
    }

    /// Dense symmetric 0/1 adjacency matrix.
    pub fn adjacency<T: Scalar>(&self) -> Array2<T> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(i, j) in &self.edges {
            a[[i, j]] = T::one();
            a[[j, i]] = T::one();
        }
        a
    }

    /// Same graph with edges sorted lexicographically.
    pub fn canonical(&self) -> Self {
        let mut g = self.clone();
        g.edges.sort_unstable();
        g
    }

    /// Serializes to the edge-list text format (edges sorted).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(8 * self.edges.len() + 8);
        let _ = writeln!(out, "{}", self.n);
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        for (i, j) in sorted {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| GraphError::Io(e.to_string()))
    }
}

/// Parses the edge-list text format.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut n = None;
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |tok: &str| {
            tok.parse::<usize>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("expected a non-negative integer, found {tok:?}"),
            })
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some(count) = n else {
            if fields.len() != 1 {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: "header must hold the node count alone".into(),
                });
            }
            let count = parse(fields[0])?;
            if count < 2 {
                return Err(at_line(line_no, GraphError::TooFewNodes(count)));
            }
            n = Some(count);
            continue;
        };
        if fields.len() != 2 {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("expected `i j`, found {line:?}"),
            });
        }
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        if a == b {
            return Err(at_line(line_no, GraphError::SelfLoop(a)));
        }
        if a >= count || b >= count {
            return Err(at_line(line_no, GraphError::NodeOutOfRange(a, b, count)));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(at_line(line_no, GraphError::DuplicateEdge(a.min(b), a.max(b))));
        }
        edges.push((a, b));
    }
    let n = n.ok_or(GraphError::Parse { line: 0, message: "missing node-count header".into() })?;
    Graph::new(n, edges)
}

fn at_line(line: usize, err: GraphError) -> GraphError {
    GraphError::AtLine { line, source: Box::new(err) }
}

/// Reads a graph from an edge-list file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| GraphError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_edge_list(&text)
}

/// Uniform `G(n, m)` sample conditioned on connectivity.
///
/// Each attempt draws `m` distinct unordered pairs by rejecting repeats;
/// disconnected samples are discarded and redrawn from the same stream.
pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    erdos_renyi_with_budget(n, m, seed, DEFAULT_REJECTION_BUDGET)
}

pub fn erdos_renyi_with_budget(n: usize, m: usize, seed: u64, budget: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    let max_edges = n * (n - 1) / 2;
    if m == 0 || m > max_edges {
        return Err(GraphError::InvalidParameter(format!("m = {m} outside 1..={max_edges}")));
    }
    if m < n - 1 {
        // A connected graph needs a spanning tree; no amount of resampling helps.
        return Err(GraphError::InvalidParameter(format!(
            "m = {m} is below the n - 1 = {} edges needed for connectivity",
            n - 1
        )));
    }
    let mut rng = XorShift64Star::new(seed);
    for _ in 0..budget {
        let mut chosen = BTreeSet::new();
        let mut edges = Vec::with_capacity(m);
        while edges.len() < m {
            let a = rng.below(n as u64) as usize;
            let b = rng.below(n as u64) as usize;
            if a == b {
                continue;
            }
            let e = (a.min(b), a.max(b));
            if chosen.insert(e) {
                edges.push(e);
            }
        }
        edges.sort_unstable();
        let g = Graph::unchecked_connectivity(n, edges)?;
        if g.check_connected().is_ok() {
            return Ok(g);
        }
    }
    Err(GraphError::RejectionBudgetExhausted(budget))
}

/// Watts–Strogatz small-world graph conditioned on connectivity.
///
/// Starts from the ring lattice where node `i` links to its `k/2` successors;
/// each lattice edge `(i, i + s)` is, with probability `beta`, rewired to
/// `(i, w)` with `w` uniform among nodes that are neither `i` nor already
/// adjacent to `i`. Rewiring visits `s = 1..=k/2` in the outer loop and `i`
/// in the inner loop.
pub fn watts_strogatz(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph, GraphError> {
    if k % 2 != 0 || k < 2 || k >= n {
        return Err(GraphError::InvalidParameter(format!("k = {k} must be even with 2 <= k < n = {n}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(GraphError::InvalidParameter(format!("beta = {beta} outside [0, 1]")));
    }
    let mut rng = XorShift64Star::new(seed);
    for _ in 0..DEFAULT_REJECTION_BUDGET {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for i in 0..n {
            for s in 1..=k / 2 {
                let j = (i + s) % n;
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
        for s in 1..=k / 2 {
            for i in 0..n {
                let j = (i + s) % n;
                if !adj[i].contains(&j) || !rng.chance(beta) {
                    continue;
                }
                if adj[i].len() >= n - 1 {
                    continue;
                }
                let w = loop {
                    let w = rng.below(n as u64) as usize;
                    if w != i && !adj[i].contains(&w) {
                        break w;
                    }
                };
                adj[i].remove(&j);
                adj[j].remove(&i);
                adj[i].insert(w);
                adj[w].insert(i);
            }
        }
        let edges: Vec<_> = (0..n)
            .flat_map(|i| adj[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect();
        let g = Graph::unchecked_connectivity(n, edges)?;
        if g.check_connected().is_ok() {
            return Ok(g);
        }
    }
    Err(GraphError::RejectionBudgetExhausted(DEFAULT_REJECTION_BUDGET))
}
