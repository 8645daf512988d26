//! Text formats: SNAP-style edge lists, partition files and edge-value CSV.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// `i j` per line, every weight 1.
    Unweighted,
    /// `i j w` per line.
    Weighted,
    /// Weighted if the first data line has three columns.
    Auto,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'))
}

/// Dense ids for external labels: numeric order when every label is an
/// unsigned integer, lexicographic otherwise.
fn dense_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut uniq: Vec<&str> = labels.collect();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.iter().all(|l| l.parse::<u64>().is_ok()) {
        uniq.sort_by_key(|l| l.parse::<u64>().unwrap());
    }
    uniq.into_iter().map(str::to_owned).collect()
}

/// Parses an undirected edge list.
pub fn load_edge_list(text: &str, format: EdgeListFormat) -> Result<Graph> {
    let format = match format {
        EdgeListFormat::Auto => match data_lines(text).next() {
            Some((_, l)) if l.split_ascii_whitespace().count() >= 3 => EdgeListFormat::Weighted,
            _ => EdgeListFormat::Unweighted,
        },
        f => f,
    };
    let columns = if format == EdgeListFormat::Weighted { 3 } else { 2 };

    let mut raw = Vec::new();
    for (line, content) in data_lines(text) {
        let tokens: Vec<&str> = content.split_ascii_whitespace().collect();
        if tokens.len() != columns {
            return Err(Error::Parse {
                line,
                message: format!("expected {columns} columns, found {}", tokens.len()),
            });
        }
        let weight = if columns == 3 {
            tokens[2].parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("bad weight {:?}: {e}", tokens[2]),
            })?
        } else {
            1.0
        };
        raw.push((tokens[0], tokens[1], weight, line));
    }

    let labels = dense_labels(raw.iter().flat_map(|(a, b, _, _)| [*a, *b]));
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let edges: Vec<_> = raw
        .iter()
        .map(|&(a, b, w, line)| (index[a], index[b], w, line))
        .collect();
    Graph::from_numbered_edges(labels, edges)
}

/// Serializes `g` as a weighted edge list using its vertex labels.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# n={} m={}", g.n(), g.m());
    for e in g.edges() {
        let _ = writeln!(
            out,
            "{} {} {}",
            g.label(e.tail),
            g.label(e.head),
            format_f64(e.weight)
        );
    }
    out
}

/// Parses `vertex_id cluster_id` lines. Cluster ids are remapped densely
/// in order of their numeric (or lexicographic) value.
pub fn load_partition(text: &str, g: &Graph) -> Result<Partition> {
    let mut assigned: Vec<Option<&str>> = vec![None; g.n()];
    for (line, content) in data_lines(text) {
        let tokens: Vec<&str> = content
            .split(|c: char| c.is_ascii_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected `vertex_id cluster_id`, found {} columns", tokens.len()),
            });
        }
        let v = g.index_of(tokens[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown vertex {:?}", tokens[0]),
        })?;
        if assigned[v].replace(tokens[1]).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("vertex {:?} assigned twice", tokens[0]),
            });
        }
    }
    if let Some(v) = assigned.iter().position(Option::is_none) {
        return Err(Error::invalid(
            "partition",
            format!("vertex {:?} has no cluster", g.label(v)),
        ));
    }
    let clusters = dense_labels(assigned.iter().map(|c| c.unwrap()));
    let index: HashMap<&str, usize> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    Partition::new(assigned.iter().map(|c| index[c.unwrap()]).collect())
}

pub fn write_partition(g: &Graph, p: &Partition) -> String {
    let mut out = String::new();
    for v in 0..g.n() {
        let _ = writeln!(out, "{} {}", g.label(v), p.cluster_of(v));
    }
    out
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

/// CSV with header `edge_tail,edge_head,<column>`.
pub fn edge_values_csv(g: &Graph, column: &str, values: &[f64]) -> String {
    let mut out = format!("edge_tail,edge_head,{column}\n");
    for (e, v) in g.edges().iter().zip(values) {
        let _ = writeln!(
            out,
            "{},{},{}",
            g.label(e.tail),
            g.label(e.head),
            format_f64(*v)
        );
    }
    out
}

/// Reads a CSV written by [`edge_values_csv`] back into canonical edge order.
/// Every edge of `g` must appear exactly once.
pub fn load_edge_values_csv(text: &str, g: &Graph) -> Result<Vec<f64>> {
    let mut values = vec![f64::NAN; g.m()];
    let mut seen = vec![false; g.m()];
    for (line, content) in data_lines(text) {
        let cols: Vec<&str> = content.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 comma-separated columns, found {}", cols.len()),
            });
        }
        if line == 1 && cols[0] == "edge_tail" {
            continue;
        }
        let lookup = |s: &str| {
            g.index_of(s).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown vertex {s:?}"),
            })
        };
        let (a, b) = (lookup(cols[0])?, lookup(cols[1])?);
        let k = g.edge_index(a, b).ok_or_else(|| Error::Parse {
            line,
            message: format!("({}, {}) is not an edge of the graph", cols[0], cols[1]),
        })?;
        let v = cols[2].parse::<f64>().map_err(|e| Error::Parse {
            line,
            message: format!("bad value {:?}: {e}", cols[2]),
        })?;
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::Parse {
                line,
                message: format!("edge ({}, {}) listed twice", cols[0], cols[1]),
            });
        }
        values[k] = v;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        let e = g.edges()[k];
        return Err(Error::invalid(
            "io",
            format!("no value for edge ({}, {})", g.label(e.tail), g.label(e.head)),
        ));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unweighted_path() {
        let g = load_edge_list("0 1\n1 2", EdgeListFormat::Unweighted).unwrap();
        assert_eq!(g.n(), 3);
        let e: Vec<_> = g.edges().iter().map(|e| (e.tail, e.head, e.weight)).collect();
        assert_eq!(e, vec![(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn mirror_lines_merge() {
        let g = load_edge_list("0 1\n1 0", EdgeListFormat::Unweighted).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn comments_and_sparse_ids() {
        let text = "# SNAP header\n# another\n10 30\n30 20\n\n20 10\n";
        let g = load_edge_list(text, EdgeListFormat::Auto).unwrap();
        assert_eq!(g.labels(), &["10", "20", "30"]);
        assert_eq!(g.m(), 3);
        assert_eq!(g.index_of("30"), Some(2));
    }

    #[test]
    fn weighted_and_auto() {
        let g = load_edge_list("0 1 0.5\n1 2 2", EdgeListFormat::Auto).unwrap();
        assert_eq!(g.weights(), vec![0.5, 2.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = load_edge_list("0 1\n# c\n1\n", EdgeListFormat::Unweighted).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let err = load_edge_list("0 1 1\n2 2 1\n", EdgeListFormat::Weighted).unwrap_err();
        assert!(matches!(err, Error::SelfLoop { line: 2, .. }), "{err}");

        let err = load_edge_list("0 1 -1\n", EdgeListFormat::Weighted).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { line: 1, .. }), "{err}");

        let err = load_edge_list("0 1 1\n1 2 1\n1 0 3\n", EdgeListFormat::Weighted).unwrap_err();
        assert!(matches!(err, Error::ConflictingDuplicate { line: 3, .. }), "{err}");

        let err = load_edge_list("0 1 x\n", EdgeListFormat::Weighted).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn partition_file() {
        let g = load_edge_list("a b\nb c\nc d", EdgeListFormat::Unweighted).unwrap();
        let p = load_partition("a 7\nb 7\nc 9\nd 9\n", &g).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 1]);
        assert!(load_partition("a 1\nb 1\nc 2\n", &g).is_err());
        assert!(load_partition("a 1\nb 1\nc 2\nd 2\nzz 3\n", &g).is_err());
        assert_eq!(load_partition(&write_partition(&g, &p), &g).unwrap(), p);
    }

    #[test]
    fn edge_values_round_trip() {
        let g = load_edge_list("0 1\n1 2\n2 0", EdgeListFormat::Unweighted).unwrap();
        let vals = vec![0.1, 1.0 / 3.0, 2.0];
        let csv = edge_values_csv(&g, "weight", &vals);
        assert!(csv.starts_with("edge_tail,edge_head,weight\n"));
        assert_eq!(load_edge_values_csv(&csv, &g).unwrap(), vals);
        let missing = "edge_tail,edge_head,weight\n0,1,0.5\n";
        assert!(load_edge_values_csv(missing, &g).is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [2.0, 0.1, 1.0 / 3.0, 1e-300, 123456789.123456789] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(2.0), "2.0");
    }
}
