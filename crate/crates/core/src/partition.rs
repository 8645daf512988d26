use crate::error::{Error, Result};
use crate::graph::Graph;

/// Assignment of every vertex to one of `q` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    q: usize,
    assignment: Vec<usize>,
}

impl Partition {
    /// `q` is inferred as one past the largest cluster id; every id below it must be used.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let q = assignment.iter().copied().max().map_or(0, |c| c + 1);
        Self::with_q(assignment, q)
    }

    pub fn with_q(assignment: Vec<usize>, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("partition", "a partition needs at least one cluster"));
        }
        let mut used = vec![false; q];
        for (v, &c) in assignment.iter().enumerate() {
            if c >= q {
                return Err(Error::invalid(
                    "partition",
                    format!("vertex {v} assigned to cluster {c}, outside [0, {q})"),
                ));
            }
            used[c] = true;
        }
        if let Some(empty) = used.iter().position(|u| !u) {
            return Err(Error::invalid(
                "partition",
                format!("cluster {empty} has no vertices"),
            ));
        }
        Ok(Self { q, assignment })
    }

    /// Each vertex in its own connected component's cluster.
    pub fn from_components(g: &Graph) -> Self {
        let (q, ids) = g.components();
        Self { q, assignment: ids }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.q];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.assignment[v] == cluster).collect()
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.n() != g.n() {
            return Err(Error::invalid(
                "partition",
                format!("partition covers {} vertices, graph has {}", self.n(), g.n()),
            ));
        }
        Ok(())
    }
}
