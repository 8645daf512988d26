//! Edge resistance vectors and the weights derived from them.
//!
//! Three routes to the q-aggregated resistance `diag(B^T U_q U_q^T B)`:
//!
//! * [`aggregated_resistance_exact`]: from the first `q` Laplacian eigenvectors.
//! * [`aggregated_resistance_approx1`]: `eps * diag(B^T (eps I + L)^-1 B)`, no
//!   eigenvectors and no choice of `q`.
//! * [`aggregated_resistance_approx2`]: the resolvent replaced by the Neumann
//!   partial sum `sum_{t=0}^{p} A_eps^t (eps I + D)^-1` with
//!   `A_eps = (eps I + D)^-1 A`, evaluated with sparse neighbor sums only.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::edge_vector::EdgeVector;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::SplitMix64;
use crate::spectral::{self, Spectrum, MAX_DENSE_N};

/// Parameters of the eigendecomposition-free approximations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxConfig {
    /// Resolvent shift.
    pub epsilon: f64,
    /// Neumann truncation order (the partial sum includes `t = 0..=p`).
    pub p: usize,
    /// Barrier softness in `eps_b / (eps_b + r)`.
    pub epsilon_b: f64,
}

impl ApproxConfig {
    pub const DEFAULT_EPSILON: f64 = 0.1;
    pub const DEFAULT_EPSILON_B: f64 = 0.01;

    /// `epsilon = 0.1`, `p = ceil(n / 2)`, `epsilon_b = 0.01`.
    pub fn for_graph(n: usize) -> Self {
        Self {
            epsilon: Self::DEFAULT_EPSILON,
            p: n.div_ceil(2),
            epsilon_b: Self::DEFAULT_EPSILON_B,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if !(self.epsilon_b > 0.0 && self.epsilon_b.is_finite()) {
            return Err(Error::invalid(
                "resistance",
                format!("epsilon_b must be positive, got {}", self.epsilon_b),
            ));
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "resistance",
            format!("epsilon must be positive and finite, got {epsilon}"),
        ))
    }
}

/// `d = B^T u`: the head value minus the tail value on every edge.
pub fn mode_gradient(g: &Graph, u: &[f64]) -> Result<EdgeVector> {
    if u.len() != g.n() {
        return Err(Error::invalid(
            "resistance",
            format!("vertex distribution has length {}, graph has {} vertices", u.len(), g.n()),
        ));
    }
    Ok(EdgeVector::gradient(
        g.edges().iter().map(|e| u[e.head] - u[e.tail]).collect(),
    ))
}

/// Exact q-aggregated resistance: the sum over the first `q` modes of the
/// squared mode gradient on each edge.
pub fn aggregated_resistance_exact(g: &Graph, q: usize) -> Result<EdgeVector> {
    let spectrum = spectral::eigendecompose(&g.laplacian())?;
    aggregated_resistance_from_spectrum(g, &spectrum, q)
}

pub fn aggregated_resistance_from_spectrum(
    g: &Graph,
    spectrum: &Spectrum,
    q: usize,
) -> Result<EdgeVector> {
    if spectrum.n() != g.n() {
        return Err(Error::invalid("resistance", "spectrum does not match the graph"));
    }
    if q == 0 || q > g.n() {
        return Err(Error::invalid(
            "resistance",
            format!("q must lie in [1, {}], got {q}", g.n()),
        ));
    }
    let u = spectrum.eigenvectors();
    let values = g
        .edges()
        .iter()
        .map(|e| {
            (0..q)
                .map(|l| {
                    let d = u[(e.head, l)] - u[(e.tail, l)];
                    d * d
                })
                .sum()
        })
        .collect();
    EdgeVector::resistance(values)
}

/// `diag(B^T P B)` for a symmetric vertex-space matrix `P`:
/// `P_ii - P_ij - P_ji + P_jj` on edge `(i, j)`.
pub fn edge_quadratic_form(g: &Graph, p: &DMatrix<f64>) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|e| {
            let (i, j) = (e.tail, e.head);
            p[(i, i)] - p[(i, j)] - p[(j, i)] + p[(j, j)]
        })
        .collect()
}

/// Resolvent shift that matches a desired average relative outgoing weight
/// `a_hat` at realizability level `alpha_hat`:
/// `sqrt(2q) * a_hat / (alpha_hat * sqrt(1 - alpha_hat^2))^(1/2)`.
pub fn epsilon_for(a_hat: f64, alpha_hat: f64, q: usize) -> Result<f64> {
    if !(alpha_hat > 0.0 && alpha_hat < 1.0) {
        return Err(Error::invalid(
            "resistance",
            format!("alpha_hat must lie in (0, 1), got {alpha_hat}"),
        ));
    }
    if !(a_hat >= 0.0 && a_hat.is_finite()) || q == 0 {
        return Err(Error::invalid(
            "resistance",
            format!("need a_hat >= 0 and q >= 1, got a_hat = {a_hat}, q = {q}"),
        ));
    }
    let denom = (alpha_hat * (1.0 - alpha_hat * alpha_hat).sqrt()).sqrt();
    Ok((2.0 * q as f64).sqrt() * a_hat / denom)
}

/// Dense `(eps I + L)^-1` by Cholesky factorization.
pub fn resolvent(g: &Graph, epsilon: f64) -> Result<DMatrix<f64>> {
    check_epsilon(epsilon)?;
    if g.n() > MAX_DENSE_N {
        return Err(Error::invalid(
            "resistance",
            format!(
                "n = {} exceeds the dense budget of {MAX_DENSE_N}; use approx-ii",
                g.n()
            ),
        ));
    }
    let mut shifted = g.laplacian();
    for i in 0..g.n() {
        shifted[(i, i)] += epsilon;
    }
    let chol = shifted
        .cholesky()
        .ok_or_else(|| Error::numeric("resistance", "eps I + L is not positive definite"))?;
    Ok(chol.inverse())
}

/// `eps * diag(B^T (eps I + L)^-1 B)`.
pub fn aggregated_resistance_approx1(g: &Graph, epsilon: f64) -> Result<EdgeVector> {
    let r = resolvent(g, epsilon)?;
    let values = edge_quadratic_form(g, &r)
        .into_iter()
        .map(|v| (epsilon * v).max(0.0))
        .collect();
    EdgeVector::resistance(values)
}

/// `||A_eps||_inf = max_i D_i / (eps + D_i)`.
pub fn spectral_radius_bound(g: &Graph, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(g
        .degrees()
        .iter()
        .map(|&d| d / (epsilon + d))
        .fold(0.0, f64::max))
}

/// The closed-form ceiling `1 / (1 + eps / d_max)` on [`spectral_radius_bound`].
pub fn neumann_rate_ceiling(g: &Graph, epsilon: f64) -> f64 {
    let dmax = g.max_degree();
    if dmax == 0.0 {
        0.0
    } else {
        1.0 / (1.0 + epsilon / dmax)
    }
}

/// Dense `A_eps = (eps I + D)^-1 A`. Verification helper.
pub fn normalized_adjacency(g: &Graph, epsilon: f64) -> DMatrix<f64> {
    let mut a = g.adjacency();
    for i in 0..g.n() {
        let scale = 1.0 / (epsilon + g.degree(i));
        a.row_mut(i).scale_mut(scale);
    }
    a
}

/// Dense `S_N = sum_{t=0}^{N} A_eps^t`. Verification helper for small graphs.
pub fn neumann_partial_sum_dense(g: &Graph, epsilon: f64, order: usize) -> DMatrix<f64> {
    let a = normalized_adjacency(g, epsilon);
    let mut power = DMatrix::identity(g.n(), g.n());
    let mut sum = power.clone();
    for _ in 0..order {
        power = &a * &power;
        sum += &power;
    }
    sum
}

/// Matrix infinity norm (max absolute row sum).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Per-edge resistance from the four partial-sum entries an edge's endpoints
/// hold: `eps * ((S_ii - S_li) / (eps + D_i) + (S_ll - S_il) / (eps + D_l))`.
///
/// With `literal_closing` the `S_ll` term is multiplied by an extra `eps`,
/// reproducing the closing line of the published pseudocode for comparison.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn partial_sum_edge_value(
    epsilon: f64,
    s_ii: f64,
    s_li: f64,
    d_i: f64,
    s_ll: f64,
    s_il: f64,
    d_l: f64,
    literal_closing: bool,
) -> f64 {
    let s_ll = if literal_closing { epsilon * s_ll } else { s_ll };
    epsilon * ((s_ii - s_li) / (epsilon + d_i) + (s_ll - s_il) / (epsilon + d_l))
}

/// Entries of `S_p` each edge needs, indexed by canonical edge.
pub(crate) struct EdgePartialSums {
    pub diag: Vec<f64>,
    /// `S[head][tail]`, read from the tail's column.
    pub head_in_tail: Vec<f64>,
    /// `S[tail][head]`, read from the head's column.
    pub tail_in_head: Vec<f64>,
}

const BLOCK: usize = 32;

/// Columns of `S_p` restricted to each vertex and its neighbors.
///
/// Entry `(i, j)` is accumulated exactly as the neighbor-row recursion does:
/// `[A^{t+1}]_ij = sum over neighbors l of i, ascending, of A_il [A^t]_lj`,
/// then `S += A^{t+1}` in order of `t`.
pub(crate) fn neumann_edge_entries(g: &Graph, epsilon: f64, p: usize) -> EdgePartialSums {
    let n = g.n();
    // Row-normalized neighbor coefficients, sorted by neighbor.
    let coeffs: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let denom = epsilon + g.degree(i);
            g.neighbors(i)
                .iter()
                .map(|nb| (nb.vertex, g.edges()[nb.edge].weight / denom))
                .collect()
        })
        .collect();

    let blocks: Vec<usize> = (0..n).step_by(BLOCK).collect();
    let per_block: Vec<Vec<(usize, f64, Vec<(usize, f64)>)>> = blocks
        .par_iter()
        .map(|&start| {
            let width = BLOCK.min(n - start);
            let mut x = vec![0.0; n * width];
            for c in 0..width {
                x[(start + c) * width + c] = 1.0;
            }
            let mut sum = x.clone();
            let mut next = vec![0.0; n * width];
            for _ in 0..p {
                for (i, row) in coeffs.iter().enumerate() {
                    let out = &mut next[i * width..(i + 1) * width];
                    out.fill(0.0);
                    for &(l, a) in row {
                        let src = &x[l * width..(l + 1) * width];
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += a * s;
                        }
                    }
                }
                std::mem::swap(&mut x, &mut next);
                for (s, v) in sum.iter_mut().zip(&x) {
                    *s += v;
                }
            }
            (0..width)
                .map(|c| {
                    let j = start + c;
                    let at = |row: usize| sum[row * width + c];
                    let nbrs = g.neighbors(j).iter().map(|nb| (nb.vertex, at(nb.vertex))).collect();
                    (j, at(j), nbrs)
                })
                .collect()
        })
        .collect();

    let m = g.m();
    let mut out = EdgePartialSums {
        diag: vec![0.0; n],
        head_in_tail: vec![0.0; m],
        tail_in_head: vec![0.0; m],
    };
    for (j, s_jj, nbrs) in per_block.into_iter().flatten() {
        out.diag[j] = s_jj;
        for (l, s_lj) in nbrs {
            let k = g.edge_index(j, l).expect("neighbor has an edge");
            if j < l {
                out.head_in_tail[k] = s_lj;
            } else {
                out.tail_in_head[k] = s_lj;
            }
        }
    }
    out
}

/// `eps * diag(B^T S_p (eps I + D)^-1 B)` with `S_p = sum_{t=0}^{p} A_eps^t`.
pub fn aggregated_resistance_approx2(g: &Graph, epsilon: f64, p: usize) -> Result<EdgeVector> {
    check_epsilon(epsilon)?;
    let sums = neumann_edge_entries(g, epsilon, p);
    let values = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            partial_sum_edge_value(
                epsilon,
                sums.diag[e.tail],
                sums.head_in_tail[k],
                g.degree(e.tail),
                sums.diag[e.head],
                sums.tail_in_head[k],
                g.degree(e.head),
                false,
            )
        })
        .collect();
    EdgeVector::resistance(values)
}

/// `eps_b / (eps_b + r_k)` on every edge.
pub fn barrier_weights(resistance: &EdgeVector, epsilon_b: f64) -> Result<EdgeVector> {
    if !(epsilon_b > 0.0 && epsilon_b.is_finite()) {
        return Err(Error::invalid(
            "weights",
            format!("epsilon_b must be positive, got {epsilon_b}"),
        ));
    }
    if let Some((k, r)) = resistance
        .values()
        .iter()
        .enumerate()
        .find(|(_, r)| !(**r >= 0.0))
    {
        return Err(Error::invalid(
            "weights",
            format!("resistance on edge {k} is {r}, expected >= 0"),
        ));
    }
    EdgeVector::weight(
        resistance
            .values()
            .iter()
            .map(|r| epsilon_b / (epsilon_b + r))
            .collect(),
    )
}

/// A seeded Fisher-Yates permutation of the weights (SplitMix64 stream,
/// `j = below(i + 1)` for `i` from `m - 1` down to `1`).
pub fn shuffle_weights(weights: &EdgeVector, seed: u64) -> EdgeVector {
    let mut values = weights.values().to_vec();
    let mut rng = SplitMix64::new(seed);
    for i in (1..values.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        values.swap(i, j);
    }
    EdgeVector::weight(values).expect("a permutation of valid weights is valid")
}

pub fn unit_weights(m: usize) -> EdgeVector {
    EdgeVector::weight(vec![1.0; m]).expect("unit weights are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::new(2, [(0, 1, 1.0)]).unwrap()
    }

    fn barbell(bridge: f64) -> Graph {
        Graph::new(
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
        .unwrap()
    }

    #[test]
    fn gradient_examples() {
        let g = k2();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let d = mode_gradient(&g, &[h, -h]).unwrap();
        assert!((d[0] + std::f64::consts::SQRT_2).abs() < 1e-15);

        let b = barbell(0.01);
        let zero = mode_gradient(&b, &[0.3; 6]).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        assert!(mode_gradient(&b, &[0.0; 5]).is_err());
    }

    #[test]
    fn fiedler_gradient_concentrates_on_bridge() {
        let g = barbell(0.01);
        let s = spectral::eigendecompose(&g.laplacian()).unwrap();
        let d = mode_gradient(&g, s.eigenvector(1).as_slice()).unwrap();
        let bridge = g.edge_index(2, 3).unwrap();
        let intra_max = (0..g.m())
            .filter(|&k| k != bridge)
            .map(|k| d[k].abs())
            .fold(0.0, f64::max);
        assert!(d[bridge].abs() > 100.0 * intra_max);
    }

    #[test]
    fn exact_resistance_examples() {
        let r = aggregated_resistance_exact(&k2(), 2).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-12);

        let b = barbell(0.01);
        let r1 = aggregated_resistance_exact(&b, 1).unwrap();
        assert!(r1.values().iter().all(|&v| v.abs() < 1e-20));

        let r2 = aggregated_resistance_exact(&b, 2).unwrap();
        let bridge = b.edge_index(2, 3).unwrap();
        for k in 0..b.m() {
            if k != bridge {
                assert!(r2[bridge] > 10.0 * r2[k]);
            }
        }
        assert!(aggregated_resistance_exact(&b, 0).is_err());
        assert!(aggregated_resistance_exact(&b, 7).is_err());
    }

    #[test]
    fn epsilon_formula() {
        let eps = epsilon_for(1.0, 0.5, 2).unwrap();
        let hand = 2.0 / (0.5 * 0.75f64.sqrt()).sqrt();
        assert!((eps - hand).abs() < 1e-12);
        assert!((eps - 3.0394).abs() < 1e-4);
        assert_eq!(epsilon_for(0.0, 0.5, 2).unwrap(), 0.0);
        assert!(epsilon_for(1.0, 1.0, 2).is_err());
        assert!(epsilon_for(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn approx1_k2_closed_form() {
        let r = aggregated_resistance_approx1(&k2(), 0.1).unwrap();
        assert!((r[0] - 0.2 / 2.1).abs() < 1e-14);
        let far = aggregated_resistance_approx1(&k2(), 1e9).unwrap();
        assert!((far[0] - 2.0).abs() < 1e-6);
        assert!(aggregated_resistance_approx1(&k2(), 0.0).is_err());
    }

    #[test]
    fn approx2_k2_closed_form() {
        let r0 = aggregated_resistance_approx2(&k2(), 0.1, 0).unwrap();
        assert!((r0[0] - 0.2 / 1.1).abs() < 1e-15);
        let r200 = aggregated_resistance_approx2(&k2(), 0.1, 200).unwrap();
        assert!((r200[0] - 0.2 / 2.1).abs() < 1e-6);
    }

    #[test]
    fn radius_examples() {
        assert!((spectral_radius_bound(&k2(), 0.1).unwrap() - 1.0 / 1.1).abs() < 1e-15);
        let star = Graph::new(5, (1..5).map(|v| (0, v, 1.0))).unwrap();
        let rho = spectral_radius_bound(&star, 1.0).unwrap();
        assert!((rho - 0.8).abs() < 1e-15);
        assert!((neumann_rate_ceiling(&star, 1.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn approx2_matches_dense_partial_sum() {
        let g = barbell(0.3);
        let eps = 0.2;
        for p in [0, 1, 3, 17] {
            let s = neumann_partial_sum_dense(&g, eps, p);
            let mut scaled = s.clone();
            for j in 0..g.n() {
                scaled.column_mut(j).scale_mut(1.0 / (eps + g.degree(j)));
            }
            let dense: Vec<f64> = edge_quadratic_form(&g, &scaled)
                .into_iter()
                .map(|v| eps * v)
                .collect();
            let sparse = aggregated_resistance_approx2(&g, eps, p).unwrap();
            for (a, b) in dense.iter().zip(sparse.values()) {
                assert!((a - b).abs() < 1e-12, "p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn barrier_examples() {
        let w = barrier_weights(&EdgeVector::resistance(vec![0.0, 0.434281, 0.01]).unwrap(), 0.01)
            .unwrap();
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 0.01 / 0.444281).abs() < 1e-15);
        assert!((w[1] - 0.022508).abs() < 1e-6);
        assert!((w[2] - 0.5).abs() < 1e-15);
        let r = EdgeVector::resistance(vec![1.0]).unwrap();
        assert!(barrier_weights(&r, 0.0).is_err());
    }

    #[test]
    fn shuffle_is_seeded_permutation() {
        let w = EdgeVector::weight((1..=20).map(|i| i as f64 / 20.0).collect()).unwrap();
        let a = shuffle_weights(&w, 7);
        let b = shuffle_weights(&w, 7);
        assert_eq!(a, b);
        assert_ne!(a, w);
        let mut sorted = a.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, w.values());
        let flat = EdgeVector::weight(vec![0.5; 9]).unwrap();
        assert_eq!(shuffle_weights(&flat, 0), flat);
    }

    #[test]
    fn default_config() {
        let c = ApproxConfig::for_graph(7);
        assert_eq!(c.p, 4);
        assert_eq!(c.epsilon, 0.1);
        assert_eq!(c.epsilon_b, 0.01);
        c.validate().unwrap();
        assert!(ApproxConfig { epsilon: -1.0, ..c }.validate().is_err());
    }
}
