//! Partition quality measures and executable checks of the bounds that tie
//! them to the Laplacian spectrum.
//!
//! Every checker returns a [`BoundReport`] with both sides of its inequality.
//! Checkers whose hypotheses fail (for example `lambda_q = 0`, or a partition
//! that is not alpha-realizable for any `alpha < 1`) report
//! [`BoundStatus::Vacuous`] instead of an error.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::resistance;
use crate::spectral::{self, Spectrum};

/// Absolute slack allowed on `lhs <= rhs`.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum BoundStatus {
    Satisfied,
    Violated,
    Vacuous(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub status: BoundStatus,
    /// Quantities the two sides were computed from.
    pub inputs: BTreeMap<&'static str, f64>,
}

impl BoundReport {
    fn evaluate(name: &'static str, lhs: f64, rhs: f64, inputs: BTreeMap<&'static str, f64>) -> Self {
        let status = if lhs <= rhs + BOUND_TOLERANCE {
            BoundStatus::Satisfied
        } else {
            BoundStatus::Violated
        };
        Self {
            name,
            lhs,
            rhs,
            slack: rhs - lhs,
            status,
            inputs,
        }
    }

    fn vacuous(name: &'static str, reason: String, inputs: BTreeMap<&'static str, f64>) -> Self {
        Self {
            name,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            status: BoundStatus::Vacuous(reason),
            inputs,
        }
    }

    pub fn satisfied(&self) -> bool {
        self.status == BoundStatus::Satisfied
    }

    pub fn is_vacuous(&self) -> bool {
        matches!(self.status, BoundStatus::Vacuous(_))
    }
}

/// Columns are the unit vectors uniform on each cluster and zero elsewhere.
pub fn cluster_indicator_basis(p: &Partition) -> DMatrix<f64> {
    let sizes = p.sizes();
    let mut basis = DMatrix::zeros(p.n(), p.q());
    for (v, &c) in p.assignment().iter().enumerate() {
        basis[(v, c)] = 1.0 / (sizes[c] as f64).sqrt();
    }
    basis
}

/// q-modal distance of `g` from its partitioned subgraph.
pub fn modal_distance(g: &Graph, p: &Partition) -> Result<f64> {
    p.check_graph(g)?;
    let spectrum = spectral::eigendecompose(&g.laplacian())?;
    modal_distance_with(&spectrum, p)
}

/// `sqrt( sum_{j<q} sum_{k>=q} (ubar_j . u_k)^2 / (q (n - q)) )`.
pub fn modal_distance_with(spectrum: &Spectrum, p: &Partition) -> Result<f64> {
    let (n, q) = (spectrum.n(), p.q());
    if p.n() != n {
        return Err(Error::invalid("metrics", "partition size does not match the spectrum"));
    }
    if q >= n {
        return Err(Error::invalid(
            "metrics",
            format!("modal distance needs q < n, got q = {q}, n = {n}"),
        ));
    }
    let overlaps = cluster_indicator_basis(p).transpose() * spectrum.eigenvectors();
    let tail: f64 = overlaps.columns(q, n - q).iter().map(|x| x * x).sum();
    Ok((tail / (q * (n - q)) as f64).sqrt().min(1.0))
}

/// Weights leaving each cluster, divided by the square root of its size.
pub fn relative_outgoing_weights(g: &Graph, p: &Partition) -> Result<Vec<f64>> {
    p.check_graph(g)?;
    let mut outgoing = vec![0.0; p.q()];
    for e in g.edges() {
        let (a, b) = (p.cluster_of(e.tail), p.cluster_of(e.head));
        if a != b {
            outgoing[a] += e.weight;
            outgoing[b] += e.weight;
        }
    }
    Ok(outgoing
        .into_iter()
        .zip(p.sizes())
        .map(|(w, size)| w / (size as f64).sqrt())
        .collect())
}

pub fn relative_outgoing_weight(g: &Graph, p: &Partition, cluster: usize) -> Result<f64> {
    if cluster >= p.q() {
        return Err(Error::invalid(
            "metrics",
            format!("cluster {cluster} outside [0, {})", p.q()),
        ));
    }
    Ok(relative_outgoing_weights(g, p)?[cluster])
}

/// Root mean square of the per-cluster relative outgoing weights.
pub fn avg_relative_outgoing_weight(g: &Graph, p: &Partition) -> Result<f64> {
    let relouts = relative_outgoing_weights(g, p)?;
    Ok((relouts.iter().map(|r| r * r).sum::<f64>() / p.q() as f64).sqrt())
}

/// Smallest alpha for which the partition is alpha-realizable:
/// `sqrt(2q) * avgrelout / lambda_q`.
pub fn alpha_star(avgrelout: f64, lambda_q: f64, q: usize) -> Result<f64> {
    if !(lambda_q > 0.0) {
        return Err(Error::invalid(
            "metrics",
            format!("lambda_q must be positive, got {lambda_q}; the graph has more than q components"),
        ));
    }
    Ok((2.0 * q as f64).sqrt() * avgrelout / lambda_q)
}

/// Spectrum-side facts shared by the checkers.
struct PartitionFacts {
    n: usize,
    q: usize,
    lambda_q_minus_1: f64,
    lambda_q: f64,
    avgrelout: f64,
    lambda_q_is_zero: bool,
}

impl PartitionFacts {
    fn new(g: &Graph, spectrum: &Spectrum, p: &Partition) -> Result<Self> {
        p.check_graph(g)?;
        let (n, q) = (g.n(), p.q());
        if spectrum.n() != n {
            return Err(Error::invalid("metrics", "spectrum does not match the graph"));
        }
        if q >= n {
            return Err(Error::invalid(
                "metrics",
                format!("bounds need q < n, got q = {q}, n = {n}"),
            ));
        }
        let lambda_q = spectrum.eigenvalue(q);
        Ok(Self {
            n,
            q,
            lambda_q_minus_1: spectrum.eigenvalue(q - 1),
            lambda_q,
            avgrelout: avg_relative_outgoing_weight(g, p)?,
            lambda_q_is_zero: lambda_q <= spectrum.zero_tolerance(),
        })
    }

    fn inputs(&self) -> BTreeMap<&'static str, f64> {
        BTreeMap::from([
            ("n", self.n as f64),
            ("q", self.q as f64),
            ("lambda_q", self.lambda_q),
            ("avgrelout", self.avgrelout),
        ])
    }

    fn alpha(&self) -> f64 {
        (2.0 * self.q as f64).sqrt() * self.avgrelout / self.lambda_q
    }
}

/// modaldist <= (1 / lambda_q) sqrt(2 / (n - q)) avgrelout.
pub fn check_prop1(g: &Graph, p: &Partition) -> Result<BoundReport> {
    let spectrum = spectral::eigendecompose(&g.laplacian())?;
    check_prop1_with(g, &spectrum, p)
}

pub fn check_prop1_with(g: &Graph, spectrum: &Spectrum, p: &Partition) -> Result<BoundReport> {
    const NAME: &str = "modal distance bound";
    let f = PartitionFacts::new(g, spectrum, p)?;
    let inputs = f.inputs();
    if f.lambda_q_is_zero {
        return Ok(BoundReport::vacuous(
            NAME,
            format!("lambda_q = {:e} is numerically zero", f.lambda_q),
            inputs,
        ));
    }
    let lhs = modal_distance_with(spectrum, p)?;
    let rhs = (2.0 / (f.n - f.q) as f64).sqrt() * f.avgrelout / f.lambda_q;
    Ok(BoundReport::evaluate(NAME, lhs, rhs, inputs))
}

/// lambda_{q-1} / lambda_q <= alpha / sqrt(1 - alpha^2) at `alpha = alpha_star < 1`.
pub fn check_prop2(g: &Graph, p: &Partition) -> Result<BoundReport> {
    let spectrum = spectral::eigendecompose(&g.laplacian())?;
    check_prop2_with(g, &spectrum, p)
}

pub fn check_prop2_with(g: &Graph, spectrum: &Spectrum, p: &Partition) -> Result<BoundReport> {
    const NAME: &str = "eigenvalue ratio bound";
    let f = PartitionFacts::new(g, spectrum, p)?;
    let mut inputs = f.inputs();
    if f.lambda_q_is_zero {
        return Ok(BoundReport::vacuous(
            NAME,
            format!("lambda_q = {:e} is numerically zero", f.lambda_q),
            inputs,
        ));
    }
    let alpha = f.alpha();
    inputs.insert("alpha", alpha);
    if alpha >= 1.0 {
        return Ok(BoundReport::vacuous(
            NAME,
            format!("not alpha-realizable for alpha < 1 (alpha* = {alpha}); bound vacuous"),
            inputs,
        ));
    }
    let lhs = f.lambda_q_minus_1.max(0.0) / f.lambda_q;
    let rhs = alpha / (1.0 - alpha * alpha).sqrt();
    Ok(BoundReport::evaluate(NAME, lhs, rhs, inputs))
}

/// ||r(g) - r(g2)||_2 <= 2 alpha sqrt(2 d_max) for two weightings of one topology.
///
/// `alpha` is the larger of the two alpha stars. `d_max` counts incident
/// edges, the degree notion the bound's derivation sums over.
pub fn check_prop3(g: &Graph, g2: &Graph, p: &Partition) -> Result<BoundReport> {
    const NAME: &str = "resistance robustness bound";
    if !g.same_topology(g2) {
        return Err(Error::invalid(
            "metrics",
            "robustness check needs two graphs with the same vertices and edges",
        ));
    }
    let s1 = spectral::eigendecompose(&g.laplacian())?;
    let s2 = spectral::eigendecompose(&g2.laplacian())?;
    let f1 = PartitionFacts::new(g, &s1, p)?;
    let f2 = PartitionFacts::new(g2, &s2, p)?;
    let d_max = g.max_edge_degree() as f64;
    let mut inputs = f1.inputs();
    inputs.insert("lambda_q_second", f2.lambda_q);
    inputs.insert("avgrelout_second", f2.avgrelout);
    inputs.insert("d_max", d_max);
    if f1.lambda_q_is_zero || f2.lambda_q_is_zero {
        return Ok(BoundReport::vacuous(
            NAME,
            "lambda_q is numerically zero in one of the graphs".into(),
            inputs,
        ));
    }
    let alpha = f1.alpha().max(f2.alpha());
    inputs.insert("alpha", alpha);
    if alpha >= 1.0 {
        return Ok(BoundReport::vacuous(
            NAME,
            format!("partition is not alpha-realizable in both graphs for alpha < 1 (alpha = {alpha})"),
            inputs,
        ));
    }
    let r1 = resistance::aggregated_resistance_from_spectrum(g, &s1, p.q())?;
    let r2 = resistance::aggregated_resistance_from_spectrum(g2, &s2, p.q())?;
    let lhs = r1.distance(&r2);
    let rhs = 2.0 * alpha * (2.0 * d_max).sqrt();
    Ok(BoundReport::evaluate(NAME, lhs, rhs, inputs))
}

/// Relative operator-norm error of `eps (eps I + L)^-1` against `U_q U_q^T`
/// at `eps = epsilon_for(a_hat, alpha_hat, q)`, against
/// `(1 / beta) sqrt(alpha_hat) / (1 - alpha_hat^2)^(1/4)`.
///
/// Hypotheses checked here: the partition is alpha-realizable with
/// `alpha_star <= alpha_hat < 1`, and `beta = min(a / a_hat, a_hat / a)` for
/// the actual average relative outgoing weight `a`.
pub fn check_prop4(
    g: &Graph,
    p: &Partition,
    a_hat: f64,
    alpha_hat: f64,
) -> Result<BoundReport> {
    let spectrum = spectral::eigendecompose(&g.laplacian())?;
    check_prop4_with(g, &spectrum, p, a_hat, alpha_hat)
}

pub fn check_prop4_with(
    g: &Graph,
    spectrum: &Spectrum,
    p: &Partition,
    a_hat: f64,
    alpha_hat: f64,
) -> Result<BoundReport> {
    const NAME: &str = "resolvent approximation bound";
    let f = PartitionFacts::new(g, spectrum, p)?;
    let mut inputs = f.inputs();
    inputs.insert("a_hat", a_hat);
    inputs.insert("alpha_hat", alpha_hat);
    if !(a_hat > 0.0) {
        return Err(Error::invalid("metrics", format!("a_hat must be positive, got {a_hat}")));
    }
    if f.lambda_q_is_zero {
        return Ok(BoundReport::vacuous(
            NAME,
            format!("lambda_q = {:e} is numerically zero", f.lambda_q),
            inputs,
        ));
    }
    let alpha = f.alpha();
    inputs.insert("alpha", alpha);
    if !(alpha <= alpha_hat) {
        return Ok(BoundReport::vacuous(
            NAME,
            format!("alpha* = {alpha} exceeds alpha_hat = {alpha_hat}"),
            inputs,
        ));
    }
    if f.avgrelout <= 0.0 {
        return Ok(BoundReport::vacuous(
            NAME,
            "average relative outgoing weight is zero, so no beta > 0 brackets it".into(),
            inputs,
        ));
    }
    let beta = (f.avgrelout / a_hat).min(a_hat / f.avgrelout);
    let epsilon = resistance::epsilon_for(a_hat, alpha_hat, f.q)?;
    inputs.insert("beta", beta);
    inputs.insert("epsilon", epsilon);

    let projector = {
        let u = spectrum.leading_block(f.q);
        &u * u.transpose()
    };
    let difference = &projector - resistance::resolvent(g, epsilon)? * epsilon;
    let lhs = operator_norm_symmetric(&difference)? / operator_norm_symmetric(&projector)?;
    let rhs = alpha_hat.sqrt() / (1.0 - alpha_hat * alpha_hat).powf(0.25) / beta;
    Ok(BoundReport::evaluate(NAME, lhs, rhs, inputs))
}

/// Operator 2-norm of a symmetric matrix: its largest absolute eigenvalue.
pub fn operator_norm_symmetric(m: &DMatrix<f64>) -> Result<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let s = spectral::eigendecompose(&sym)?;
    Ok(s.eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barbell(bridge: f64) -> (Graph, Partition) {
        let g = Graph::new(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
                (2, 3, bridge),
            ],
        )
        .unwrap();
        (g, Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap())
    }

    fn two_triangles() -> (Graph, Partition) {
        let g = Graph::new(
            6,
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        )
        .unwrap();
        (g, Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap())
    }

    #[test]
    fn relout_examples() {
        let (g, p) = two_triangles();
        assert_eq!(relative_outgoing_weight(&g, &p, 0).unwrap(), 0.0);
        assert_eq!(avg_relative_outgoing_weight(&g, &p).unwrap(), 0.0);

        // K3 cluster with a single outgoing edge of weight 0.5.
        let g = Graph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 0.5)]).unwrap();
        let p = Partition::new(vec![0, 0, 0, 1]).unwrap();
        assert!((relative_outgoing_weight(&g, &p, 0).unwrap() - 0.5 / 3f64.sqrt()).abs() < 1e-15);
        assert!((relative_outgoing_weight(&g, &p, 0).unwrap() - 0.288675).abs() < 1e-6);

        // Single-vertex cluster with two unit outgoing edges.
        let star = Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let p = Partition::new(vec![0, 1, 1]).unwrap();
        assert_eq!(relative_outgoing_weight(&star, &p, 0).unwrap(), 2.0);
        assert!(relative_outgoing_weight(&star, &p, 2).is_err());
    }

    #[test]
    fn symmetric_barbell_avgrelout() {
        let w = 0.37;
        let (g, p) = barbell(w);
        let a = avg_relative_outgoing_weight(&g, &p).unwrap();
        assert!((a - w / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn alpha_star_examples() {
        assert!((alpha_star(0.6689, 4.0456, 5).unwrap() - 0.523).abs() < 1e-3);
        assert_eq!(alpha_star(0.0, 3.0, 4).unwrap(), 0.0);
        assert!((alpha_star(1.0, 2.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(alpha_star(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn component_partition_has_zero_modal_distance() {
        let (g, p) = two_triangles();
        let d = modal_distance(&g, &p).unwrap();
        assert!(d < 1e-7, "{d}");
        let report = check_prop1(&g, &p).unwrap();
        assert!(report.satisfied());
        assert_eq!(report.rhs, 0.0);
    }

    #[test]
    fn prop2_at_equality_for_components() {
        let (g, p) = two_triangles();
        let r = check_prop2(&g, &p).unwrap();
        assert!(r.satisfied());
        assert!(r.lhs.abs() < 1e-12);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn checkers_report_vacuous() {
        // Three components but a 2-partition: lambda_2 = 0.
        let g = Graph::new(6, [(0, 1, 1.0), (2, 3, 1.0), (4, 5, 1.0)]).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1, 1, 1]).unwrap();
        assert!(check_prop1(&g, &p).unwrap().is_vacuous());
        assert!(check_prop2(&g, &p).unwrap().is_vacuous());

        // A strong bridge with a bad partition gives alpha* >= 1.
        let (g, _) = barbell(5.0);
        let bad = Partition::new(vec![0, 1, 0, 1, 0, 1]).unwrap();
        assert!(check_prop2(&g, &bad).unwrap().is_vacuous());
    }

    #[test]
    fn prop3_identity_pair() {
        let (g, p) = barbell(0.01);
        let r = check_prop3(&g, &g, &p).unwrap();
        assert!(r.satisfied());
        assert!(r.lhs < 1e-12);

        let other = Graph::new(6, [(0, 1, 1.0)]).unwrap();
        assert!(check_prop3(&g, &other, &p).is_err());
    }

    #[test]
    fn prop4_on_barbell() {
        let (g, p) = barbell(0.01);
        let a = avg_relative_outgoing_weight(&g, &p).unwrap();
        let s = spectral::eigendecompose(&g.laplacian()).unwrap();
        let alpha = alpha_star(a, s.eigenvalue(2), 2).unwrap();
        let r = check_prop4(&g, &p, a, alpha * 1.5).unwrap();
        assert!(r.satisfied(), "{r:?}");
        assert!(check_prop4(&g, &p, a, alpha * 0.5).unwrap().is_vacuous());
    }

    #[test]
    fn modal_distance_rejects_q_equal_n() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let p = Partition::new(vec![0, 1]).unwrap();
        assert!(modal_distance(&g, &p).is_err());
    }
}
