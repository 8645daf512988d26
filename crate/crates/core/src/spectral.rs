//! Dense symmetric eigendecomposition and eigengap-based cluster counting.

use nalgebra::{DMatrix, DVectorView};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest matrix the dense path accepts. Bigger graphs go through the
/// resolvent-free approximations in [`crate::resistance`].
pub const MAX_DENSE_N: usize = 2000;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn eigenvector(&self, i: usize) -> DVectorView<'_, f64> {
        self.vectors.column(i)
    }

    /// The `n x q` block of the first `q` eigenvectors.
    pub fn leading_block(&self, q: usize) -> DMatrix<f64> {
        self.vectors.columns(0, q).into_owned()
    }

    pub fn largest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Threshold below which an eigenvalue counts as zero.
    pub fn zero_tolerance(&self) -> f64 {
        1e-9 * self.largest().max(1.0)
    }

    pub fn zero_multiplicity(&self) -> usize {
        let tol = self.zero_tolerance();
        self.values.iter().take_while(|&&v| v.abs() <= tol).count()
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-12 * ||L||_F`.
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive, ties going to the lowest index.
pub fn eigendecompose(l: &DMatrix<f64>) -> Result<Spectrum> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::invalid(
            "spectral",
            format!("matrix is {}x{}, expected square", n, l.ncols()),
        ));
    }
    if n > MAX_DENSE_N {
        return Err(Error::invalid(
            "spectral",
            format!(
                "n = {n} exceeds the dense eigensolver budget of {MAX_DENSE_N}; \
                 use the approx-i or approx-ii resistance methods instead"
            ),
        ));
    }
    let scale = l.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (l[(i, j)] - l[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::invalid(
                    "spectral",
                    format!("matrix is not symmetric at ({i}, {j})"),
                ));
            }
        }
    }

    // Row-major working copy; eigenvectors stored column-contiguous.
    let mut a: Vec<f64> = (0..n * n).map(|idx| l[(idx / n, idx % n)]).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = 1e-12 * l.norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>();
        if (2.0 * off).sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::numeric(
            "spectral",
            format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let src = &v[i * n..(i + 1) * n];
        let maxabs = src.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lead = src
            .iter()
            .position(|x| x.abs() >= maxabs - 1e-12)
            .unwrap_or(0);
        let sign = if src[lead] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, col)] = sign * src[r];
        }
    }
    Ok(Spectrum { values, vectors })
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        a[r * n + p] = new_rp;
        a[p * n + r] = new_rp;
        a[r * n + q] = new_rq;
        a[q * n + r] = new_rq;
    }
    // Callers pass p < q, so column p lies entirely before column q.
    let (lo, hi) = v.split_at_mut(q * n);
    let (vp, vq) = (&mut lo[p * n..(p + 1) * n], &mut hi[..n]);
    for r in 0..n {
        let xp = vp[r];
        let xq = vq[r];
        vp[r] = xp - s * (xq + tau * xp);
        vq[r] = xq + s * (xp - tau * xq);
    }
}

/// Result of eigengap-based selection of the cluster count.
#[derive(Debug, Clone, Serialize)]
pub struct GapChoice {
    pub q: usize,
    pub score: f64,
    /// `scores[i]` is the relative gap between eigenvalues `i - 1` and `i`,
    /// for `i` in `2..=max_q`; earlier entries are unused and set to NaN.
    pub scores: Vec<f64>,
}

pub fn default_max_q(n: usize) -> usize {
    n.saturating_sub(1).min(32)
}

/// Picks `q` at the largest relative eigengap
/// `(lambda_i - lambda_{i-1}) / (lambda_i + delta)`, `delta = 1e-9 * lambda_max`,
/// over `i` in `[2, max_q]`, ties to the smaller `i`.
///
/// The `i = 1` gap is excluded: `lambda_0 = 0` for every graph, so on a
/// connected graph that score is `1 - O(delta)` and would always win.
pub fn detect_q(spectrum: &Spectrum, max_q: usize) -> Result<GapChoice> {
    let n = spectrum.n();
    if max_q < 2 || max_q + 1 > n {
        return Err(Error::invalid(
            "spectral",
            format!("max_q must lie in [2, n - 1] = [2, {}], got {max_q}", n.saturating_sub(1)),
        ));
    }
    let lambda = spectrum.eigenvalues();
    let delta = 1e-9 * spectrum.largest();
    let mut scores = vec![f64::NAN; max_q + 1];
    let mut best = (0, f64::NEG_INFINITY);
    for i in 2..=max_q {
        let s = (lambda[i] - lambda[i - 1]) / (lambda[i] + delta);
        scores[i] = s;
        if s > best.1 {
            best = (i, s);
        }
    }
    if !(best.1 > 1e-9) {
        return Err(Error::numeric(
            "spectral",
            format!("no gap found among the first {} eigenvalues", max_q + 1),
        ));
    }
    Ok(GapChoice {
        q: best.0,
        score: best.1,
        scores,
    })
}
