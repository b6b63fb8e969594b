//! Root isolation for the secular function, certified by the phase count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::phase::{end_state, spectral_floor, EndState};
use super::{FiniteBox, Segment};
use crate::error::{LabError, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

const RESIDUAL_TARGET: f64 = 1e-12;

fn check_window(window: (f64, f64), tol: f64) -> Result<()> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(LabError::Domain(format!("invalid energy window [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(LabError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Eigenvalues in `[window.0, window.1)`, sorted, repeated by multiplicity.
pub fn eigenvalues(bx: &FiniteBox, window: (f64, f64), tol: f64) -> Result<Vec<f64>> {
    check_window(window, tol)?;
    if bx.is_connected() {
        SegmentSolver::new(bx, &bx.segments()[0], tol).solve(window)
    } else {
        decoupled(bx, window, tol)
    }
}

/// Spectrum of one segment of a box split at separating vertices.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentSpectrum {
    pub segment: Segment,
    /// Positions of the segment ends.
    pub start: f64,
    pub end: f64,
    pub eigenvalues: Vec<f64>,
}

/// Per-segment spectra of a box containing separating interior vertices.
pub fn separated_spectrum(bx: &FiniteBox, window: (f64, f64), tol: f64) -> Result<Vec<SegmentSpectrum>> {
    check_window(window, tol)?;
    if bx.is_connected() {
        return Err(LabError::Domain("box has no separating interior vertex".into()));
    }
    bx.segments()
        .par_iter()
        .map(|seg| {
            Ok(SegmentSpectrum {
                segment: *seg,
                start: bx.positions()[seg.first],
                end: bx.positions()[seg.last + 1],
                eigenvalues: SegmentSolver::new(bx, seg, tol).solve(window)?,
            })
        })
        .collect()
}

/// Seed grid whose spacing follows the free level spacing `π²(2k+1)/Λ²`.
pub(crate) fn seed_grid(lo: f64, hi: f64, span: f64) -> Vec<f64> {
    let base = PI * PI / (span * span);
    let mut grid = vec![lo];
    let mut e = lo;
    loop {
        let step = if e > 0.0 {
            let k = (span * e.sqrt() / PI).floor();
            base * (2.0 * k + 1.0)
        } else {
            base.max(0.05 * -e)
        };
        e += step;
        if e >= hi {
            break;
        }
        grid.push(e);
    }
    grid.push(hi);
    grid
}

pub(crate) struct SegmentSolver<'a> {
    bx: &'a FiniteBox,
    seg: &'a Segment,
    tol: f64,
}

impl<'a> SegmentSolver<'a> {
    pub fn new(bx: &'a FiniteBox, seg: &'a Segment, tol: f64) -> Self {
        Self { bx, seg, tol }
    }

    fn state(&self, e: f64) -> EndState {
        end_state(self.bx, self.seg, e)
    }

    pub fn solve(&self, (lo, hi): (f64, f64)) -> Result<Vec<f64>> {
        let span = self.bx.positions()[self.seg.last + 1] - self.bx.positions()[self.seg.first];
        let (floor, _) = spectral_floor(self.bx, self.seg);
        let lo = lo.max(floor);
        if lo >= hi {
            return Ok(Vec::new());
        }
        let grid = seed_grid(lo, hi, span);
        let states: Vec<EndState> = grid.par_iter().map(|&e| self.state(e)).collect();
        let parts: Vec<Vec<f64>> = (0..grid.len() - 1)
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                self.isolate((grid[i], states[i]), (grid[i + 1], states[i + 1]), &mut out)?;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let roots: Vec<f64> = parts.into_iter().flatten().collect();
        let expected = states[states.len() - 1].levels - states[0].levels;
        if roots.len() as i64 != expected {
            return Err(LabError::Consistency(format!(
                "found {} roots in [{lo}, {hi}) but the phase count is {expected}",
                roots.len()
            )));
        }
        Ok(roots)
    }

    fn isolate(&self, a: (f64, EndState), b: (f64, EndState), out: &mut Vec<f64>) -> Result<()> {
        let c = b.1.levels - a.1.levels;
        if c < 0 {
            return Err(LabError::Consistency(format!("phase decreased between E = {} and E = {}", a.0, b.0)));
        }
        if c == 0 {
            return Ok(());
        }
        if c == 1 {
            if a.1.secular == 0.0 {
                out.push(a.0);
                return Ok(());
            }
            if a.1.secular * b.1.secular < 0.0 {
                if let Some(r) = self.sign_bisect(a, b) {
                    out.push(r);
                    return Ok(());
                }
            }
            out.push(self.count_bisect(a, b)?);
            return Ok(());
        }
        let mid = 0.5 * (a.0 + b.0);
        if b.0 - a.0 <= self.tol || mid <= a.0 || mid >= b.0 {
            out.extend(std::iter::repeat_n(mid, c as usize));
            return Ok(());
        }
        let m = (mid, self.state(mid));
        self.isolate(a, m, out)?;
        self.isolate(m, b, out)
    }

    /// Bisection on the sign of the secular function; the final bracket must
    /// still hold exactly one level.
    fn sign_bisect(&self, a: (f64, EndState), b: (f64, EndState)) -> Option<f64> {
        let (mut a, mut b) = (a, b);
        loop {
            let mid = 0.5 * (a.0 + b.0);
            if mid <= a.0 || mid >= b.0 {
                break;
            }
            let best = a.1.secular.abs().min(b.1.secular.abs());
            if b.0 - a.0 <= self.tol && best < RESIDUAL_TARGET {
                break;
            }
            let m = (mid, self.state(mid));
            if m.1.secular == 0.0 {
                return Some(mid);
            }
            if (m.1.secular > 0.0) == (a.1.secular > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        if b.1.levels - a.1.levels != 1 {
            return None;
        }
        Some(if a.1.secular.abs() <= b.1.secular.abs() { a.0 } else { b.0 })
    }

    /// Bisection on the level count alone.
    fn count_bisect(&self, a: (f64, EndState), b: (f64, EndState)) -> Result<f64> {
        let (mut a, mut b) = (a, b);
        let base = a.1.levels;
        loop {
            let mid = 0.5 * (a.0 + b.0);
            let resolved = mid <= a.0 || mid >= b.0;
            if b.0 - a.0 <= self.tol || resolved {
                let agree = a.1.secular * b.1.secular <= 0.0 || a.1.secular.abs().min(b.1.secular.abs()) < 1e-6;
                if agree {
                    return Ok(mid.clamp(a.0, b.0));
                }
                if resolved {
                    return Err(LabError::Consistency(format!("phase count and secular sign disagree near E = {mid}")));
                }
            }
            let m = (mid, self.state(mid));
            if m.1.levels > base {
                b = m;
            } else {
                a = m;
            }
        }
    }
}

fn decoupled(bx: &FiniteBox, (lo, hi): (f64, f64), tol: f64) -> Result<Vec<f64>> {
    let floors: Vec<(f64, i64)> = bx.segments().iter().map(|s| spectral_floor(bx, s)).collect();
    let lo = lo.max(floors.iter().map(|f| f.0).fold(f64::INFINITY, f64::min));
    if lo >= hi {
        return Ok(Vec::new());
    }
    let count = |e: f64| -> i64 {
        bx.segments()
            .iter()
            .zip(&floors)
            .map(|(s, &(floor, base))| if e <= floor { 0 } else { end_state(bx, s, e).levels - base })
            .sum()
    };
    let grid = seed_grid(lo, hi, bx.span());
    let counts: Vec<i64> = grid.par_iter().map(|&e| count(e)).collect();
    let parts: Vec<Vec<f64>> = (0..grid.len() - 1)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let mut stack = vec![(grid[i], counts[i], grid[i + 1], counts[i + 1])];
            while let Some((a, ca, b, cb)) = stack.pop() {
                let c = cb - ca;
                if c < 0 {
                    return Err(LabError::Consistency(format!("count decreased on [{a}, {b}]")));
                }
                if c == 0 {
                    continue;
                }
                let mid = 0.5 * (a + b);
                if b - a <= tol || mid <= a || mid >= b {
                    out.extend(std::iter::repeat_n(mid, c as usize));
                    continue;
                }
                let cm = count(mid);
                stack.push((mid, cm, b, cb));
                stack.push((a, ca, mid, cm));
            }
            out.sort_by(f64::total_cmp);
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}
