//! Undirected weighted graphs with a canonical edge order.
//!
//! Edges are stored once as `(tail, head, weight)` with `tail < head`, sorted
//! lexicographically. The position of an edge in that list is its index in
//! every [`EdgeVector`](crate::EdgeVector).

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

/// Neighbor entry in the adjacency lists: the other endpoint and the index of
/// the connecting edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: usize,
    pub edge: usize,
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
    offsets: Vec<usize>,
    neighbors: Vec<Neighbor>,
    degree: Vec<f64>,
}

/// Structural facts about a graph that do not make it invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub components: usize,
    /// Degree-zero vertices. Diffusion and contagion never reach them.
    pub isolated: Vec<usize>,
}

impl Graph {
    /// Builds a graph on `n` vertices labelled `"0"..n`.
    ///
    /// Mirror pairs `(i, j)`/`(j, i)` and repeats with equal weight are merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::with_labels(labels, edges)
    }

    pub fn with_labels(
        labels: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let numbered = edges
            .into_iter()
            .enumerate()
            .map(|(pos, (a, b, w))| (a, b, w, pos + 1));
        Self::from_numbered_edges(labels, numbered)
    }

    /// Like [`Graph::with_labels`], with each edge carrying the source line
    /// number reported in errors.
    pub(crate) fn from_numbered_edges(
        labels: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64, usize)>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut list = Vec::new();
        for (a, b, w, line) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(
                    "graph",
                    format!("line {line}: edge ({a}, {b}) references a vertex outside [0, {n})"),
                ));
            }
            if a == b {
                return Err(Error::SelfLoop {
                    line,
                    vertex: labels[a].clone(),
                });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { line, weight: w });
            }
            let (tail, head) = if a < b { (a, b) } else { (b, a) };
            list.push((Edge { tail, head, weight: w }, line));
        }
        list.sort_by(|(x, lx), (y, ly)| (x.tail, x.head, lx).cmp(&(y.tail, y.head, ly)));

        let mut edges: Vec<Edge> = Vec::with_capacity(list.len());
        for (e, line) in list {
            match edges.last() {
                Some(prev) if prev.tail == e.tail && prev.head == e.head => {
                    if prev.weight != e.weight {
                        return Err(Error::ConflictingDuplicate {
                            line,
                            tail: labels[e.tail].clone(),
                            head: labels[e.head].clone(),
                            first: prev.weight,
                            second: e.weight,
                        });
                    }
                }
                _ => edges.push(e),
            }
        }
        Ok(Self::from_canonical(labels, edges))
    }

    fn from_canonical(labels: Vec<String>, edges: Vec<Edge>) -> Self {
        let n = labels.len();
        let mut count = vec![0usize; n];
        let mut degree = vec![0.0; n];
        for e in &edges {
            count[e.tail] += 1;
            count[e.head] += 1;
            degree[e.tail] += e.weight;
            degree[e.head] += e.weight;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + count[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![Neighbor { vertex: 0, edge: 0 }; offsets[n]];
        for (k, e) in edges.iter().enumerate() {
            neighbors[fill[e.tail]] = Neighbor { vertex: e.head, edge: k };
            fill[e.tail] += 1;
            neighbors[fill[e.head]] = Neighbor { vertex: e.tail, edge: k };
            fill[e.head] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_by_key(|nb| nb.vertex);
        }
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Self {
            n,
            edges,
            labels,
            label_index,
            offsets,
            neighbors,
            degree,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    /// Neighbors of `v`, sorted by vertex index.
    pub fn neighbors(&self, v: usize) -> &[Neighbor] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors(a)
            .binary_search_by_key(&b, |nb| nb.vertex)
            .is_ok()
    }

    /// Index of the edge joining `a` and `b`, if any.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let nbrs = self.neighbors(a);
        nbrs.binary_search_by_key(&b, |nb| nb.vertex)
            .ok()
            .map(|pos| nbrs[pos].edge)
    }

    /// Weighted degree (sum of incident edge weights).
    pub fn degree(&self, v: usize) -> f64 {
        self.degree[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// Number of incident edges.
    pub fn edge_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> f64 {
        self.degree.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_edge_degree(&self) -> usize {
        (0..self.n).map(|v| self.edge_degree(v)).max().unwrap_or(0)
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.tail, e.head)] = e.weight;
            a[(e.head, e.tail)] = e.weight;
        }
        a
    }

    pub fn degree_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.degree))
    }

    /// `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.tail, e.head)] -= e.weight;
            l[(e.head, e.tail)] -= e.weight;
            l[(e.tail, e.tail)] += e.weight;
            l[(e.head, e.head)] += e.weight;
        }
        l
    }

    /// Incidence matrix with `+1` at the tail and `-1` at the head of each edge.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.m());
        for (k, e) in self.edges.iter().enumerate() {
            b[(e.tail, k)] = 1.0;
            b[(e.head, k)] = -1.0;
        }
        b
    }

    /// The q-partitioned subgraph: same vertices, intra-cluster edges only.
    pub fn partitioned(&self, partition: &Partition) -> Result<Graph> {
        partition.check_graph(self)?;
        let cluster = partition.assignment();
        let edges = self
            .edges
            .iter()
            .filter(|e| cluster[e.tail] == cluster[e.head])
            .copied()
            .collect();
        Ok(Self::from_canonical(self.labels.clone(), edges))
    }

    /// Same topology with the weights replaced.
    pub fn reweighted(&self, weights: &[f64]) -> Result<Graph> {
        if weights.len() != self.m() {
            return Err(Error::invalid(
                "graph",
                format!("expected {} edge weights, got {}", self.m(), weights.len()),
            ));
        }
        let mut edges = self.edges.clone();
        for (k, (e, &w)) in edges.iter_mut().zip(weights).enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid(
                    "graph",
                    format!("weight of edge {k} must be positive, got {w}"),
                ));
            }
            e.weight = w;
        }
        Ok(Self::from_canonical(self.labels.clone(), edges))
    }

    /// True when both graphs have the same vertex count and edge list (weights ignored).
    pub fn same_topology(&self, other: &Graph) -> bool {
        self.n == other.n
            && self.m() == other.m()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.tail == b.tail && a.head == b.head)
    }

    /// Connected component id per vertex, numbered by first appearance.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut uf = UnionFind::new(self.n);
        for e in &self.edges {
            uf.union(e.tail, e.head);
        }
        let mut ids = vec![usize::MAX; self.n];
        let mut root_id = HashMap::new();
        for (v, id) in ids.iter_mut().enumerate() {
            let r = uf.find(v);
            let next = root_id.len();
            *id = *root_id.entry(r).or_insert(next);
        }
        (root_id.len(), ids)
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().0 == 1
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            components: self.components().0,
            isolated: (0..self.n).filter(|&v| self.edge_degree(v) == 0).collect(),
        }
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
