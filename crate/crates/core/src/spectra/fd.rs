//! Finite-difference reference spectrum for boxes with δ couplings.
//!
//! Piecewise-linear stiffness with lumped mass on a mesh aligned with the
//! vertices; a δ of strength α adds α to the stiffness at its node. The
//! symmetrized tridiagonal matrix is solved by Sturm-sequence bisection.

use rayon::prelude::*;

use super::{FiniteBox, Robin};
use crate::error::{LabError, Result};

/// Eigenvalues in `[window.0, window.1)` of the discretized box.
pub fn fd_oracle(bx: &FiniteBox, mesh: f64, window: (f64, f64)) -> Result<Vec<f64>> {
    let alphas = bx
        .delta_couplings()
        .ok_or_else(|| LabError::UnsupportedModel("finite differences need δ couplings [[1, 0], [α, 1]]".into()))?;
    let lmin = bx.lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(mesh > 0.0) || mesh > lmin / 50.0 {
        return Err(LabError::Domain(format!("mesh {mesh} must be in (0, {}]", lmin / 50.0)));
    }
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(LabError::Domain(format!("invalid energy window [{lo}, {hi}]")));
    }
    let (d, e) = assemble(bx, &alphas, mesh);
    let (first, last) = (sturm_count(&d, &e, lo), sturm_count(&d, &e, hi));
    let (glo, ghi) = gershgorin(&d, &e);
    Ok((first..last)
        .into_par_iter()
        .map(|k| {
            // smallest x with more than k eigenvalues below it
            let (mut a, mut b) = (lo.max(glo), hi.min(ghi));
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if sturm_count(&d, &e, m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect())
}

/// Discrete eigenvector near `energy` by inverse iteration, as `(x, u(x))`
/// on the mesh nodes with unit discrete L² norm.
#[cfg(test)]
pub(crate) fn fd_eigenvector(bx: &FiniteBox, mesh: f64, energy: f64) -> Vec<(f64, f64)> {
    let alphas = bx.delta_couplings().expect("δ box");
    let (d, e) = assemble(bx, &alphas, mesh);
    let (xs, mass) = nodes(bx, mesh);
    assert_eq!(xs.len(), d.len(), "dirichlet ends are not supported here");
    let shift = energy + 1e-9 * energy.abs().max(1.0);
    let mut y = vec![1.0; d.len()];
    for _ in 0..4 {
        // Thomas algorithm for (A - shift) z = y
        let n = d.len();
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let mut den = d[0] - shift;
        c[0] = if n > 1 { e[0] / den } else { 0.0 };
        r[0] = y[0] / den;
        for i in 1..n {
            den = d[i] - shift - e[i - 1] * c[i - 1];
            if i < n - 1 {
                c[i] = e[i] / den;
            }
            r[i] = (y[i] - e[i - 1] * r[i - 1]) / den;
        }
        for i in (0..n - 1).rev() {
            r[i] -= c[i] * r[i + 1];
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        y = r.iter().map(|v| v / norm).collect();
    }
    xs.iter().zip(&y).zip(&mass).map(|((&x, &v), &m)| (x, v / m.sqrt())).collect()
}

#[cfg(test)]
fn nodes(bx: &FiniteBox, mesh: f64) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![bx.positions()[0]];
    let mut mass = vec![0.0];
    for (c, &ell) in bx.lengths().iter().enumerate() {
        let n = (ell / mesh).round().max(1.0) as usize;
        let h = ell / n as f64;
        for i in 1..=n {
            *mass.last_mut().expect("node") += 0.5 * h;
            xs.push(if i == n { bx.positions()[c + 1] } else { bx.positions()[c] + i as f64 * h });
            mass.push(0.5 * h);
        }
    }
    (xs, mass)
}

/// Diagonal and off-diagonal of `M^{-1/2} K M^{-1/2}`.
fn assemble(bx: &FiniteBox, alphas: &[f64], mesh: f64) -> (Vec<f64>, Vec<f64>) {
    let mut k_diag = vec![0.0];
    let mut k_off = Vec::new();
    let mut mass = vec![0.0];
    for (c, &ell) in bx.lengths().iter().enumerate() {
        if c > 0 {
            *k_diag.last_mut().expect("node") += alphas[c - 1];
        }
        let n = (ell / mesh).round().max(1.0) as usize;
        let h = ell / n as f64;
        for _ in 0..n {
            let i = k_diag.len() - 1;
            k_diag[i] += 1.0 / h;
            mass[i] += 0.5 * h;
            k_off.push(-1.0 / h);
            k_diag.push(1.0 / h);
            mass.push(0.5 * h);
        }
    }
    let last = k_diag.len() - 1;
    let mut keep_first = true;
    let mut keep_last = true;
    match bx.left() {
        Robin { b: 0.0, .. } => keep_first = false,
        Robin { a, b } => k_diag[0] += -a / b,
    }
    match bx.right() {
        Robin { b: 0.0, .. } => keep_last = false,
        Robin { a, b } => k_diag[last] += a / b,
    }
    let start = if keep_first { 0 } else { 1 };
    let end = if keep_last { last } else { last - 1 };
    let d: Vec<f64> = (start..=end).map(|i| k_diag[i] / mass[i]).collect();
    let e: Vec<f64> = (start..end).map(|i| k_off[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    (d, e)
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < e.len() { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// Number of eigenvalues strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i > 0 { e[i - 1] * e[i - 1] / q } else { 0.0 };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}
