//! Moments `⟨|X|^p⟩(t)` of a wave packet projected onto a spectral window.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::eigenfunction::{cell_value, eigenpairs, quadrature_rule, Eigenpair};
use super::solve::DEFAULT_TOL;
use super::FiniteBox;
use crate::error::{LabError, Result};

#[derive(Clone, Debug, Serialize)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub moments: Vec<f64>,
    pub max: f64,
    /// Eigenpairs the packet was expanded in.
    pub modes: usize,
    /// Squared norm of the projected packet.
    pub weight: f64,
}

/// Projects `χ_K / √|K|` onto the box eigenfunctions with energies in
/// `interval` and evaluates `∫|x|^p |e^{-iHt} φ|²` at each time.
pub fn dynamical_moment(
    bx: &FiniteBox,
    interval: (f64, f64),
    p: f64,
    k: (f64, f64),
    times: &[f64],
) -> Result<MomentSeries> {
    let pairs = eigenpairs(bx, interval, DEFAULT_TOL)?;
    dynamical_moment_with(&pairs, interval, p, k, times)
}

/// As [`dynamical_moment`], with eigenpairs already computed on the box.
pub fn dynamical_moment_with(
    pairs: &[Eigenpair],
    interval: (f64, f64),
    p: f64,
    k: (f64, f64),
    times: &[f64],
) -> Result<MomentSeries> {
    if !(p > 0.0) {
        return Err(LabError::Domain(format!("moment order must be positive, got {p}")));
    }
    if !(k.0 < k.1) {
        return Err(LabError::Domain(format!("empty packet support [{}, {}]", k.0, k.1)));
    }
    let modes: Vec<&Eigenpair> = pairs.iter().filter(|e| e.energy >= interval.0 && e.energy < interval.1).collect();
    if modes.is_empty() {
        return Err(LabError::EmptyProjection(interval.0, interval.1));
    }
    let positions = &modes[0].positions;
    let lengths: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    let ell_max = lengths.iter().cloned().fold(0.0, f64::max);
    let emax = modes.iter().map(|e| e.energy).fold(f64::NEG_INFINITY, f64::max);
    let rule = quadrature_rule(emax, ell_max);
    let nodes = rule.as_node_weight_pairs();

    // packet coefficients ⟨f_n, χ_K⟩ / √|K|
    let norm_k = (k.1 - k.0).sqrt();
    let coeffs: Vec<f64> = modes
        .iter()
        .map(|pair| {
            let mut sum = 0.0;
            for c in 0..lengths.len() {
                let (a, b) = (positions[c].max(k.0), positions[c + 1].min(k.1));
                if a < b {
                    let off = positions[c];
                    sum += rule.integrate(a - off, b - off, |x| cell_value(pair.energy, pair.traces[c], x)[0]);
                }
            }
            sum / norm_k
        })
        .collect();

    // eigenfunction values and |x|^p weights on the quadrature nodes
    let mut weights = Vec::new();
    let mut points = Vec::new();
    for (c, &ell) in lengths.iter().enumerate() {
        for &(node, w) in nodes {
            let x = 0.5 * ell * (node + 1.0);
            points.push((c, x));
            weights.push(0.5 * ell * w * (positions[c] + x).abs().powf(p));
        }
    }
    let values: Vec<Vec<f64>> = modes
        .par_iter()
        .map(|pair| points.iter().map(|&(c, x)| cell_value(pair.energy, pair.traces[c], x)[0]).collect())
        .collect();

    let moments: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let phases: Vec<Complex64> =
                modes.iter().zip(&coeffs).map(|(pair, &c)| Complex64::from_polar(c, -pair.energy * t)).collect();
            let mut total = 0.0;
            for (q, w) in weights.iter().enumerate() {
                let mut psi = Complex64::new(0.0, 0.0);
                for (n, ph) in phases.iter().enumerate() {
                    psi += ph * values[n][q];
                }
                total += w * psi.norm_sqr();
            }
            total
        })
        .collect();
    let max = moments.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(MomentSeries {
        times: times.to_vec(),
        moments,
        max,
        modes: modes.len(),
        weight: coeffs.iter().map(|c| c * c).sum(),
    })
}
