//! Eigenfunctions rebuilt from vertex traces, and decay-rate fits.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use super::phase::{scaled_cell, unit};
use super::solve::{eigenvalues, SegmentSolver};
use super::{FiniteBox, Segment};
use crate::error::{LabError, Result};
use crate::sl2::cell_functions;

/// A unit vector and the log of the magnitude it was divided by.
pub(crate) type Scaled = ([f64; 2], f64);

/// Largest allowed sine between the two one-sided solutions at the junction.
const MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Eigenpair {
    #[serde(rename = "E")]
    pub energy: f64,
    /// `(u, u')` at `t_j⁺` for every vertex but the last, then at `t_n⁻`.
    pub traces: Vec<[f64; 2]>,
    pub norm: f64,
    #[serde(skip)]
    pub multiplicity_index: usize,
    #[serde(skip)]
    pub positions: Vec<f64>,
    /// Cells the eigenfunction may be nonzero on.
    #[serde(skip)]
    pub support: std::ops::Range<usize>,
}

impl Eigenpair {
    /// `(u(x), u'(x))`, taking the right-hand trace at interior vertices.
    pub fn value_at(&self, x: f64) -> [f64; 2] {
        let n = self.positions.len() - 1;
        let k = self.positions.partition_point(|&t| t <= x).saturating_sub(1).min(n - 1);
        cell_value(self.energy, self.traces[k], x - self.positions[k])
    }

    pub fn cells(&self) -> usize {
        self.positions.len() - 1
    }
}

pub(crate) fn cell_value(energy: f64, start: [f64; 2], dx: f64) -> [f64; 2] {
    if dx == 0.0 {
        return start;
    }
    let f = cell_functions(energy, dx);
    [start[0] * f.c + start[1] * f.s, start[0] * f.dc + start[1] * f.c]
}

/// `(∫c², ∫c·s, ∫s²)` over a cell.
pub(crate) fn cell_integrals(energy: f64, ell: f64) -> (f64, f64, f64) {
    let f = cell_functions(energy, ell);
    let cc = 0.5 * (ell + f.c * f.s);
    let cs = 0.5 * f.s * f.s;
    let z = energy * ell * ell;
    let ss = if z.abs() < 0.1 {
        // Σ_{k≥1} (-1)^{k+1} 4^k E^{k-1} ℓ^{2k+1} / (2 (2k+1)!)
        let mut term = 4.0 * ell.powi(3) / 12.0;
        let mut sum = 0.0;
        for k in 1..30 {
            sum += term;
            let k = k as f64;
            term *= -4.0 * z / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (ell - f.c * f.s) / (2.0 * energy)
    };
    (cc, cs, ss)
}

fn cell_norm_sq(energy: f64, ell: f64, v: [f64; 2]) -> f64 {
    let (cc, cs, ss) = cell_integrals(energy, ell);
    (v[0] * v[0] * cc + 2.0 * v[0] * v[1] * cs + v[1] * v[1] * ss).max(0.0)
}

/// Left-boundary solution at the segment vertices.
pub(crate) fn forward_pass(bx: &FiniteBox, seg: &Segment, energy: f64) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(seg.cells() + 1);
    let mut v = seg.left.kernel();
    let mut log = 0.0;
    out.push((v, log));
    for i in seg.first..=seg.last {
        let (m, s) = scaled_cell(energy, bx.lengths[i], false);
        let mut w = m.apply(v);
        if i < seg.last {
            w = bx.vertex(i + 1).0.apply(w);
        }
        let (u, r) = unit(w);
        v = u;
        log += s + r.ln();
        out.push((v, log));
    }
    out
}

/// Right-boundary solution at the segment vertices.
pub(crate) fn backward_pass(bx: &FiniteBox, seg: &Segment, energy: f64) -> Vec<Scaled> {
    let n = seg.cells();
    let mut out = vec![([0.0; 2], 0.0); n + 1];
    let mut v = seg.right.kernel();
    let mut log = 0.0;
    out[n] = (v, log);
    for k in (1..=n).rev() {
        let i = seg.first + k - 1;
        let mut w = v;
        if k < n {
            w = bx.vertex(i + 1).0.inverse().apply(w);
        }
        let (m, s) = scaled_cell(energy, bx.lengths[i], true);
        let (u, r) = unit(m.apply(w));
        v = u;
        log += s + r.ln();
        out[k - 1] = (v, log);
    }
    out
}

/// Joins the two one-sided solutions where they are most nearly parallel and
/// normalizes; returns traces on the segment vertices.
fn segment_eigenfunction(bx: &FiniteBox, seg: &Segment, energy: f64) -> Result<(Vec<[f64; 2]>, f64)> {
    let fwd = forward_pass(bx, seg, energy);
    let bwd = backward_pass(bx, seg, energy);
    let n = seg.cells();
    let mismatch = |k: usize| {
        let (f, g) = (fwd[k].0, bwd[k].0);
        (f[0] * g[1] - f[1] * g[0]).abs()
    };
    let join = (0..=n).min_by(|&a, &b| mismatch(a).total_cmp(&mismatch(b))).unwrap_or(0);
    if mismatch(join) > MATCH_TOL {
        return Err(LabError::Consistency(format!(
            "E = {energy} is not an eigenvalue of the segment (junction mismatch {:.3e})",
            mismatch(join)
        )));
    }
    let (f, g) = (fwd[join].0, bwd[join].0);
    let ratio = f[0] * g[0] + f[1] * g[1];
    let shift = fwd[join].1 - bwd[join].1;
    let scaled: Vec<Scaled> = (0..=n)
        .map(|k| {
            if k <= join {
                fwd[k]
            } else {
                let (v, l) = bwd[k];
                ([v[0] * ratio, v[1] * ratio], l + shift)
            }
        })
        .collect();
    let logs: Vec<f64> =
        (0..n).map(|k| cell_norm_sq(energy, bx.lengths[seg.first + k], scaled[k].0).ln() + 2.0 * scaled[k].1).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(LabError::Underflow(energy));
    }
    let log_norm_sq = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    if log_norm_sq < (1e-300f64).ln() {
        return Err(LabError::Underflow(energy));
    }
    let half = 0.5 * log_norm_sq;
    let traces = scaled
        .iter()
        .map(|(v, l)| {
            let s = (l - half).exp();
            [v[0] * s, v[1] * s]
        })
        .collect();
    Ok((traces, mismatch(join)))
}

fn embed(bx: &FiniteBox, seg: &Segment, energy: f64, local: Vec<[f64; 2]>) -> Eigenpair {
    let n = bx.cells();
    let mut traces = vec![[0.0; 2]; n + 1];
    // the segment's last trace is u(t⁻) at its right end, which the full box
    // only records when that end is the box boundary
    let upto = if seg.last + 1 == n { local.len() } else { local.len() - 1 };
    traces[seg.first..seg.first + upto].copy_from_slice(&local[..upto]);
    let mut pair = Eigenpair {
        energy,
        traces,
        norm: 1.0,
        multiplicity_index: 0,
        positions: bx.positions().to_vec(),
        support: seg.first..seg.last + 1,
    };
    pair.norm = box_norm(bx, &pair);
    pair
}

fn box_norm(bx: &FiniteBox, pair: &Eigenpair) -> f64 {
    (0..bx.cells()).map(|k| cell_norm_sq(pair.energy, bx.lengths[k], pair.traces[k])).sum::<f64>().sqrt()
}

/// Normalized eigenfunction at a refined eigenvalue. For a box split by
/// separating vertices it lives on the segment that matches best.
pub fn eigenfunction(bx: &FiniteBox, energy: f64) -> Result<Eigenpair> {
    let mut last_err = None;
    let mut best: Option<(f64, Eigenpair)> = None;
    for seg in bx.segments() {
        match segment_eigenfunction(bx, seg, energy) {
            Ok((local, fit)) => {
                let pair = embed(bx, seg, energy, local);
                if best.as_ref().is_none_or(|(f, _)| fit < *f) {
                    best = Some((fit, pair));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some((_, p)), _) => Ok(p),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("a box has at least one segment"),
    }
}

/// All eigenpairs with energies in the window. Repeated energies get
/// consecutive multiplicity indices.
pub fn eigenpairs(bx: &FiniteBox, window: (f64, f64), tol: f64) -> Result<Vec<Eigenpair>> {
    let mut pairs: Vec<Eigenpair> = if bx.is_connected() {
        let energies = eigenvalues(bx, window, tol)?;
        energies.par_iter().map(|&e| eigenfunction(bx, e)).collect::<Result<_>>()?
    } else {
        let per_segment: Vec<Vec<Eigenpair>> = bx
            .segments()
            .par_iter()
            .map(|seg| {
                SegmentSolver::new(bx, seg, tol)
                    .solve(window)?
                    .into_iter()
                    .map(|e| Ok(embed(bx, seg, e, segment_eigenfunction(bx, seg, e)?.0)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        per_segment.into_iter().flatten().collect()
    };
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    for i in 1..pairs.len() {
        if (pairs[i].energy - pairs[i - 1].energy).abs() <= 10.0 * tol {
            pairs[i].multiplicity_index = pairs[i - 1].multiplicity_index + 1;
        }
    }
    Ok(pairs)
}

/// Gauss–Legendre rule resolving the oscillation of products of two
/// eigenfunctions at energies up to `emax` on cells up to `ell_max`.
pub(crate) fn quadrature_rule(emax: f64, ell_max: f64) -> GaussLegendre {
    let turns = emax.max(0.0).sqrt() * ell_max;
    let n = (16.0 + 4.0 * turns).ceil().min(400.0) as usize;
    GaussLegendre::new(NonZeroUsize::new(n).expect("positive degree"))
}

/// L² inner product of two eigenfunctions on the same box.
pub fn inner_product(a: &Eigenpair, b: &Eigenpair) -> f64 {
    let lengths: Vec<f64> = a.positions.windows(2).map(|w| w[1] - w[0]).collect();
    let ell_max = lengths.iter().cloned().fold(0.0, f64::max);
    let rule = quadrature_rule(a.energy.max(b.energy), ell_max);
    let mut sum = 0.0;
    for (k, &ell) in lengths.iter().enumerate() {
        if a.traces[k] == [0.0; 2] || b.traces[k] == [0.0; 2] {
            continue;
        }
        sum += rule
            .integrate(0.0, ell, |x| cell_value(a.energy, a.traces[k], x)[0] * cell_value(b.energy, b.traces[k], x)[0]);
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Vertex index (from the left box end) of the amplitude maximum.
    pub center: usize,
    /// Decay rate per unit length; `+∞` for eigenfunctions vanishing on
    /// part of the box.
    pub rate: f64,
    pub r_squared: f64,
    pub points: usize,
}

const MIN_FIT_CELLS: usize = 40;
const MIN_FIT_POINTS: usize = 10;
const AMPLITUDE_FLOOR: f64 = 1e-13;
/// Fraction of each side, measured from the center, left out of the fit.
const INNER_FRACTION: f64 = 0.4;

/// Least-squares slope of `log(|u| + |u'|)` against the distance to the
/// amplitude maximum, using the outer part of each side of the box.
pub fn decay_fit(pair: &Eigenpair) -> Result<DecayFit> {
    let n = pair.cells();
    if n < MIN_FIT_CELLS {
        return Err(LabError::Domain(format!("decay fit needs at least {MIN_FIT_CELLS} cells, got {n}")));
    }
    let peak = |t: &[f64; 2]| t[0].abs().max(t[1].abs());
    let center = (0..=n).max_by(|&a, &b| peak(&pair.traces[a]).total_cmp(&peak(&pair.traces[b]))).unwrap_or(0);
    if pair.support.len() < n {
        return Ok(DecayFit { center, rate: f64::INFINITY, r_squared: 1.0, points: 0 });
    }
    let pos = &pair.positions;
    let tc = pos[center];
    let (left_side, right_side) = (tc - pos[0], pos[n] - tc);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (j, t) in pair.traces.iter().enumerate() {
        let d = (pos[j] - tc).abs();
        let side = if pos[j] < tc { left_side } else { right_side };
        let amp = t[0].abs() + t[1].abs();
        if d >= INNER_FRACTION * side && d > 0.0 && amp > AMPLITUDE_FLOOR {
            xs.push(d);
            ys.push(amp.ln());
        }
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(LabError::Fit(format!("only {} usable points (need {MIN_FIT_POINTS})", xs.len())));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::Fit("all fit points at the same distance".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(DecayFit { center, rate: (-slope).max(0.0), r_squared, points: xs.len() })
}
