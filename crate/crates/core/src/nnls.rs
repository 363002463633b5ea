//! Non-negative least squares for small dense systems.
//!
//! Solves `min ‖A x - b‖²` subject to `x ≥ 0` with the Lawson-Hanson active
//! set method. `A` is tall (many pixels, few bands) so the solver works on
//! the normal equations `G = AᵀA`, `c = Aᵀb`, which are only `n x n`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    /// `‖A x - b‖₂`
    pub residual_norm: f64,
}

/// Columns of `A` are given as slices of equal length.
pub fn nnls(columns: &[&[f64]], b: &[f64]) -> Result<NnlsSolution> {
    let n = columns.len();
    if n == 0 {
        return Err(Error::InvalidParameter("NNLS needs at least one column".into()));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != b.len()) {
        return Err(Error::DimensionMismatch(format!("column of length {} vs target {}", c.len(), b.len())));
    }
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let gram: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dot(columns[i], columns[j])).collect()).collect();
    let rhs: Vec<f64> = columns.iter().map(|c| dot(c, b)).collect();

    if cholesky(&gram).is_none() {
        return Err(Error::RankDeficient(
            "columns are linearly dependent; the least-squares solution is not unique".into(),
        ));
    }

    let max_diag = (0..n).map(|i| gram[i][i]).fold(0.0, f64::max);
    let tol = 1e-10 * max_diag.sqrt() * dot(b, b).sqrt();
    let x = nnls_normal(&gram, &rhs, tol);

    let residual_norm = (0..b.len())
        .map(|p| {
            let r = (0..n).map(|j| x[j] * columns[j][p]).sum::<f64>() - b[p];
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(NnlsSolution { x, residual_norm })
}

/// Lawson-Hanson on the normal equations. `gram` must be positive definite.
/// `tol` bounds the dual variables `w = c - G x` treated as non-positive.
pub fn nnls_normal(gram: &[Vec<f64>], c: &[f64], tol: f64) -> Vec<f64> {
    let n = c.len();
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];

    let dual =
        |x: &[f64]| -> Vec<f64> { (0..n).map(|i| c[i] - (0..n).map(|j| gram[i][j] * x[j]).sum::<f64>()).collect() };

    for _outer in 0..3 * n + 1 {
        let w = dual(&x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let z = solve_passive(gram, c, &passive);
            let infeasible: Vec<usize> = (0..n).filter(|&k| passive[k] && z[k] <= 0.0).collect();
            if infeasible.is_empty() {
                x = z;
                break;
            }
            let alpha = infeasible.iter().map(|&k| x[k] / (x[k] - z[k])).fold(f64::INFINITY, f64::min);
            for k in 0..n {
                x[k] += alpha * (z[k] - x[k]);
                if passive[k] && x[k] <= 1e-15 * (1.0 + z[k].abs()) {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Unconstrained solve restricted to the passive set; other entries are 0.
fn solve_passive(gram: &[Vec<f64>], c: &[f64], passive: &[bool]) -> Vec<f64> {
    let idx: Vec<usize> = (0..c.len()).filter(|&i| passive[i]).collect();
    let sub: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| gram[i][j]).collect()).collect();
    let rhs: Vec<f64> = idx.iter().map(|&i| c[i]).collect();
    let mut out = vec![0.0; c.len()];
    if let Some(l) = cholesky(&sub) {
        for (&i, v) in idx.iter().zip(cholesky_solve(&l, &rhs)) {
            out[i] = v;
        }
    }
    out
}

/// Lower Cholesky factor, or `None` when a pivot is not safely positive.
fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let max_diag = (0..n).map(|i| a[i][i]).fold(0.0, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 1e-12 * max_diag {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}
