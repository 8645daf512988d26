//! Seeded synthetic graphs for tests, benchmarks and the CLI `generate` command.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::rng::SplitMix64;

/// Clusters of given sizes with dense internal wiring and sparse,
/// low-weight links between them.
///
/// Each cluster gets a random spanning tree plus every other internal pair
/// with probability `p_in`; consecutive clusters (cyclically) are joined by
/// one bridge, and every other cross pair appears with probability `p_out`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedClusters {
    pub sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub w_in: f64,
    pub w_out: f64,
}

impl PlantedClusters {
    /// Five 15-vertex clusters with 0.05-weight bridges.
    pub fn five_clusters() -> Self {
        Self {
            sizes: vec![15; 5],
            p_in: 0.5,
            p_out: 0.005,
            w_in: 1.0,
            w_out: 0.05,
        }
    }

    /// Five 15-vertex clusters with unweighted cross links at `p_out = 0.05`,
    /// a contact-network shape where communities are distinct but not sealed.
    pub fn contact_network() -> Self {
        Self {
            p_out: 0.05,
            w_out: 1.0,
            ..Self::five_clusters()
        }
    }

    pub fn generate(&self, seed: u64) -> Result<(Graph, Partition)> {
        let check_p = |name, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::invalid("generate", format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        check_p("p_in", self.p_in)?;
        check_p("p_out", self.p_out)?;
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::invalid("generate", "cluster sizes must be positive"));
        }

        let mut rng = SplitMix64::new(seed);
        let mut assignment = Vec::new();
        let mut starts = Vec::new();
        for (c, &s) in self.sizes.iter().enumerate() {
            starts.push(assignment.len());
            assignment.extend(std::iter::repeat(c).take(s));
        }
        let n = assignment.len();
        let mut edges = Vec::new();

        for (c, &s) in self.sizes.iter().enumerate() {
            let base = starts[c];
            // Random recursive tree keeps the cluster connected.
            for v in 1..s {
                let u = rng.below(v as u64) as usize;
                edges.push((base + u, base + v, self.w_in));
            }
            for a in 0..s {
                for b in (a + 1)..s {
                    if rng.next_f64() < self.p_in {
                        edges.push((base + a, base + b, self.w_in));
                    }
                }
            }
        }
        let q = self.sizes.len();
        if q > 1 {
            let bridges = if q == 2 { 1 } else { q };
            for c in 0..bridges {
                let d = (c + 1) % q;
                let a = starts[c] + rng.below(self.sizes[c] as u64) as usize;
                let b = starts[d] + rng.below(self.sizes[d] as u64) as usize;
                edges.push((a, b, self.w_out));
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if assignment[a] != assignment[b] && rng.next_f64() < self.p_out {
                    edges.push((a, b, self.w_out));
                }
            }
        }
        // Later duplicates repeat the same weight and merge.
        let g = Graph::new(n, edges)?;
        Ok((g, Partition::new(assignment)?))
    }
}

/// Connected graph with a random spanning tree, extra edges with
/// probability `p_extra`, and weights uniform in `[w_lo, w_hi]`.
pub fn random_connected(n: usize, p_extra: f64, w_lo: f64, w_hi: f64, seed: u64) -> Result<Graph> {
    if !(w_lo > 0.0 && w_lo <= w_hi) {
        return Err(Error::invalid(
            "generate",
            format!("weight range must satisfy 0 < low <= high, got [{w_lo}, {w_hi}]"),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let mut adjacent = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.below(v as u64) as usize;
        adjacent.insert((u, v));
        edges.push((u, v, rng.uniform(w_lo, w_hi)));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if !adjacent.contains(&(a, b)) && rng.next_f64() < p_extra {
                edges.push((a, b, rng.uniform(w_lo, w_hi)));
            }
        }
    }
    Graph::new(n, edges)
}

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|v| (v - 1, v, 1.0))).expect("path is valid")
}

/// Vertex 0 joined to `leaves` others.
pub fn star(leaves: usize) -> Graph {
    Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v, 1.0))).expect("star is valid")
}

pub fn complete(n: usize) -> Graph {
    Graph::new(
        n,
        (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b, 1.0))),
    )
    .expect("complete graph is valid")
}

/// Two unit-weight `K_k` joined by one edge of weight `bridge` between
/// vertices `k - 1` and `k`.
pub fn barbell(k: usize, bridge: f64) -> Result<(Graph, Partition)> {
    let mut edges: Vec<_> = (0..2)
        .flat_map(|c| {
            let base = c * k;
            (0..k).flat_map(move |a| ((a + 1)..k).map(move |b| (base + a, base + b, 1.0)))
        })
        .collect();
    edges.push((k - 1, k, bridge));
    let g = Graph::new(2 * k, edges)?;
    let p = Partition::new((0..2 * k).map(|v| v / k).collect())?;
    Ok((g, p))
}
