//! Vertex-local computation of the Neumann-series resistance.
//!
//! Each vertex keeps row `i` of `A_eps^t` and of the running partial sum as
//! sparse associative arrays, and in every bulk-synchronous round replaces
//! its row with `sum_{l in N(i)} A_il / (eps + D_i) * row_l`, reading only
//! the frozen rows of its neighbors. After `p` rounds each edge value is
//! assembled from the two endpoint partial sums.
//!
//! With pruning disabled the result is bitwise equal to
//! [`aggregated_resistance_approx2`](crate::resistance::aggregated_resistance_approx2):
//! both accumulate every entry over neighbors in ascending order.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::edge_vector::EdgeVector;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::resistance::partial_sum_edge_value;

/// Sparse row: `(column, value)` pairs sorted by column.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributedConfig {
    pub epsilon: f64,
    /// Number of rounds; the partial sum covers powers `0..=p`.
    pub p: usize,
    /// Row entries with magnitude below this are dropped after each round.
    /// Zero disables pruning.
    pub prune: f64,
    /// Execute the published pseudocode verbatim: neighbor contributions
    /// overwrite instead of accumulating, the scratch row is never cleared,
    /// the partial sum omits the identity term, and the closing formula
    /// scales `Sp_l[l]` by an extra `eps`. For comparison only.
    pub paper_literal: bool,
}

impl DistributedConfig {
    pub fn new(epsilon: f64, p: usize) -> Self {
        Self {
            epsilon,
            p,
            prune: 0.0,
            paper_literal: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(
                "distributed",
                format!("epsilon must be positive, got {}", self.epsilon),
            ));
        }
        if !(self.prune >= 0.0) {
            return Err(Error::invalid(
                "distributed",
                format!("prune threshold must be >= 0, got {}", self.prune),
            ));
        }
        Ok(())
    }
}

/// What vertex `i` holds between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub vertex: usize,
    /// Row `i` of `A_eps^round`.
    pub row: SparseRow,
    /// Row `i` of `sum_{t <= round} A_eps^t`.
    pub partial_sum: SparseRow,
    pub round: usize,
}

impl NodeState {
    /// Looks up column `j` of a sparse row.
    pub fn get(row: &[(usize, f64)], j: usize) -> Option<f64> {
        row.binary_search_by_key(&j, |&(c, _)| c)
            .ok()
            .map(|pos| row[pos].1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimStats {
    pub rounds: usize,
    /// Row messages sent in each round; one per directed edge.
    pub messages_per_round: Vec<usize>,
    pub total_messages: usize,
    /// Sparse entries carried by all row messages.
    pub entries_transferred: usize,
    /// Largest row support after each round.
    pub max_row_density: Vec<usize>,
    /// Messages of the closing exchange of partial-sum entries.
    pub final_exchange_messages: usize,
    /// Reads of a non-neighbor's state. Always zero; kept as evidence.
    pub non_neighbor_reads: usize,
}

/// Access to the previous round's frozen states that counts every read
/// outside the reader's closed neighborhood.
struct FrozenView<'a> {
    graph: &'a Graph,
    states: &'a [NodeState],
    violations: AtomicUsize,
}

impl<'a> FrozenView<'a> {
    fn read(&self, reader: usize, target: usize) -> &'a NodeState {
        if reader != target && !self.graph.is_adjacent(reader, target) {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
        &self.states[target]
    }
}

/// Runs the simulation and returns per-edge resistances in canonical edge order.
pub fn run_distributed(g: &Graph, config: &DistributedConfig) -> Result<(EdgeVector, SimStats)> {
    run_distributed_observed(g, config, |_, _| {})
}

/// Like [`run_distributed`], calling `observer(round, states)` after the
/// initial state and after every round.
pub fn run_distributed_observed(
    g: &Graph,
    config: &DistributedConfig,
    mut observer: impl FnMut(usize, &[NodeState]),
) -> Result<(EdgeVector, SimStats)> {
    config.validate()?;
    let (n, eps) = (g.n(), config.epsilon);
    let literal = config.paper_literal;

    let coeffs: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let denom = eps + g.degree(i);
            g.neighbors(i)
                .iter()
                .map(|nb| (nb.vertex, g.edges()[nb.edge].weight / denom))
                .collect()
        })
        .collect();

    let mut states: Vec<NodeState> = (0..n)
        .map(|i| NodeState {
            vertex: i,
            row: vec![(i, 1.0)],
            partial_sum: if literal { Vec::new() } else { vec![(i, 1.0)] },
            round: 0,
        })
        .collect();
    // Scratch rows persist across rounds only in literal mode.
    let mut literal_tmp: Vec<SparseRow> = vec![Vec::new(); n];
    let mut stats = SimStats::default();
    observer(0, &states);

    for round in 1..=config.p {
        let view = FrozenView {
            graph: g,
            states: &states,
            violations: AtomicUsize::new(0),
        };
        let sent: usize = (0..n)
            .map(|i| states[i].row.len() * g.edge_degree(i))
            .sum();

        let next: Vec<(NodeState, SparseRow)> = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; n], vec![false; n], Vec::new()),
                |(dense, mark, touched), i| {
                    let own = view.read(i, i);
                    if literal {
                        for &(j, v) in &literal_tmp[i] {
                            dense[j] = v;
                            mark[j] = true;
                            touched.push(j);
                        }
                    }
                    for &(l, a) in &coeffs[i] {
                        for &(j, s) in &view.read(i, l).row {
                            if literal {
                                dense[j] = a * s;
                            } else {
                                dense[j] += a * s;
                            }
                            if !mark[j] {
                                mark[j] = true;
                                touched.push(j);
                            }
                        }
                    }
                    touched.sort_unstable();
                    let tmp: SparseRow = touched.iter().map(|&j| (j, dense[j])).collect();
                    for &j in touched.iter() {
                        dense[j] = 0.0;
                        mark[j] = false;
                    }
                    touched.clear();

                    let mut row = tmp.clone();
                    if config.prune > 0.0 {
                        row.retain(|&(_, v)| v.abs() >= config.prune);
                    }
                    let partial_sum = merge_add(&own.partial_sum, &row);
                    let state = NodeState {
                        vertex: i,
                        row,
                        partial_sum,
                        round,
                    };
                    (state, if literal { tmp } else { Vec::new() })
                },
            )
            .collect();

        stats.non_neighbor_reads += view.violations.into_inner();
        stats.messages_per_round.push(2 * g.m());
        stats.total_messages += 2 * g.m();
        stats.entries_transferred += sent;

        let (new_states, tmps): (Vec<_>, Vec<_>) = next.into_iter().unzip();
        states = new_states;
        if literal {
            literal_tmp = tmps;
        }
        stats
            .max_row_density
            .push(states.iter().map(|s| s.row.len()).max().unwrap_or(0));
        stats.rounds = round;
        observer(round, &states);
    }

    // Closing exchange: each endpoint sends the two partial-sum entries the
    // other needs, `Sp_i[i]` and `Sp_i[l]`.
    let view = FrozenView {
        graph: g,
        states: &states,
        violations: AtomicUsize::new(0),
    };
    let values: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| {
            let (i, l) = (e.tail, e.head);
            let si = view.read(i, i);
            let sl = view.read(i, l);
            let at = |s: &NodeState, j| NodeState::get(&s.partial_sum, j).unwrap_or(0.0);
            partial_sum_edge_value(
                eps,
                at(si, i),
                at(sl, i),
                g.degree(i),
                at(sl, l),
                at(si, l),
                g.degree(l),
                literal,
            )
        })
        .collect();
    stats.non_neighbor_reads += view.violations.into_inner();
    stats.final_exchange_messages = 2 * g.m();

    // The literal variant is not a resistance in any sense and may be negative.
    let resistance = if literal {
        EdgeVector::resistance_unchecked(values)
    } else {
        EdgeVector::resistance(values)?
    };
    Ok((resistance, stats))
}

/// Sorted-merge `a + b`; entries only in `b` are inserted as `0.0 + v`.
fn merge_add(a: &[(usize, f64)], b: &[(usize, f64)]) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut x, mut y) = (0, 0);
    while x < a.len() || y < b.len() {
        match (a.get(x), b.get(y)) {
            (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                out.push((ja, va + vb));
                x += 1;
                y += 1;
            }
            (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                out.push((ja, va));
                x += 1;
            }
            (Some(&(ja, va)), None) => {
                out.push((ja, va));
                x += 1;
            }
            (_, Some(&(jb, vb))) => {
                out.push((jb, 0.0 + vb));
                y += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::aggregated_resistance_approx2;

    #[test]
    fn k2_order_zero() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let (r, stats) = run_distributed(&g, &DistributedConfig::new(0.1, 0)).unwrap();
        assert!((r[0] - 0.2 / 1.1).abs() < 1e-15);
        assert!((r[0] - 0.181_818_181_8).abs() < 1e-9);
        assert_eq!(stats.rounds, 0);
        assert_eq!(stats.final_exchange_messages, 2);
    }

    #[test]
    fn path_message_counts() {
        let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let (_, stats) = run_distributed(&g, &DistributedConfig::new(0.1, 2)).unwrap();
        assert_eq!(stats.rounds, 2);
        assert_eq!(stats.messages_per_round, vec![4, 4]);
        assert_eq!(stats.non_neighbor_reads, 0);
        // Bipartite: squared rows skip the odd-distance vertices.
        assert_eq!(stats.max_row_density, vec![2, 2]);
    }

    #[test]
    fn matches_centralized_bitwise() {
        let g = Graph::new(
            5,
            [(0, 1, 0.5), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 0.25), (0, 4, 1.5), (1, 3, 0.75)],
        )
        .unwrap();
        for p in [0, 1, 3, 8] {
            let (r, _) = run_distributed(&g, &DistributedConfig::new(0.3, p)).unwrap();
            let c = aggregated_resistance_approx2(&g, 0.3, p).unwrap();
            assert_eq!(r.values(), c.values(), "p = {p}");
        }
    }

    #[test]
    fn pruning_keeps_rows_small() {
        let g = Graph::new(4, [(0, 1, 1.0), (1, 2, 1e-9), (2, 3, 1.0)]).unwrap();
        let mut cfg = DistributedConfig::new(0.1, 4);
        cfg.prune = 1e-6;
        let (_, stats) = run_distributed(&g, &cfg).unwrap();
        assert!(stats.max_row_density.iter().all(|&d| d <= 2), "{:?}", stats.max_row_density);
    }

    #[test]
    fn literal_mode_differs() {
        let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let mut cfg = DistributedConfig::new(0.1, 3);
        let (fixed, _) = run_distributed(&g, &cfg).unwrap();
        cfg.paper_literal = true;
        let (literal, _) = run_distributed(&g, &cfg).unwrap();
        assert_ne!(fixed.values(), literal.values());
    }

    #[test]
    fn rejects_bad_config() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        assert!(run_distributed(&g, &DistributedConfig::new(0.0, 1)).is_err());
        let mut cfg = DistributedConfig::new(0.1, 1);
        cfg.prune = -1.0;
        assert!(run_distributed(&g, &cfg).is_err());
    }
}
